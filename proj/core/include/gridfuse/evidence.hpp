#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>

#include "gridfuse/errors.hpp"

namespace gridfuse {

/// Belief masses over the two-state frame {free, occupied}. The ignorance
/// mass is derived as u = 1 - m_f - m_o and never stored.
struct MassCell {
    double m_f = 0.0;
    double m_o = 0.0;

    double uncertainty() const { return 1.0 - m_f - m_o; }
    bool is_vacuous() const { return m_f == 0.0 && m_o == 0.0; }
    bool valid(double tol = 1e-9) const {
        return m_f >= -tol && m_o >= -tol && m_f + m_o <= 1.0 + tol &&
               std::isfinite(m_f) && std::isfinite(m_o);
    }
};

inline bool operator==(const MassCell& a, const MassCell& b) {
    return a.m_f == b.m_f && a.m_o == b.m_o;
}

/// Nonnegative per-class evidence, as produced by a ReLU network head.
struct EvidenceCell {
    double e_f = 0.0;
    double e_o = 0.0;
};

constexpr double kConflictEps = 1e-12;

struct CombineResult {
    MassCell cell;
    double kappa = 0.0;     // conflicting mass before normalization
    bool conflict = false;  // 1 - kappa <= kConflictEps
};

/// Conjunctive combination without throwing; callers that tolerate total
/// conflict (whole-map fusion) inspect `conflict` instead of catching.
inline CombineResult dempster_combine_checked(const MassCell& a_in, const MassCell& b_in) {
    // canonical operand order makes the combination bit-exactly commutative
    const bool swap = b_in.m_f < a_in.m_f || (b_in.m_f == a_in.m_f && b_in.m_o < a_in.m_o);
    const MassCell& a = swap ? b_in : a_in;
    const MassCell& b = swap ? a_in : b_in;
    const double ua = a.uncertainty();
    const double ub = b.uncertainty();
    const double kappa = a.m_f * b.m_o + a.m_o * b.m_f;
    CombineResult r;
    r.kappa = kappa;
    const double denom = 1.0 - kappa;
    if (denom <= kConflictEps) {
        r.conflict = true;
        return r;
    }
    double mf = (a.m_f * b.m_f + a.m_f * ub + ua * b.m_f) / denom;
    double mo = (a.m_o * b.m_o + a.m_o * ub + ua * b.m_o) / denom;
    assert(mf > -1e-9 && mf < 1.0 + 1e-9);
    assert(mo > -1e-9 && mo < 1.0 + 1e-9);
    mf = std::clamp(mf, 0.0, 1.0);
    mo = std::clamp(mo, 0.0, 1.0);
    if (mf + mo > 1.0) {
        const double excess = mf + mo - 1.0;
        assert(excess < 1e-9);
        mf -= excess * 0.5;
        mo -= excess * 0.5;
    }
    r.cell = {mf, mo};
    return r;
}

/// Dempster's Rule of Combination on the two-state frame.
inline MassCell dempster_combine(const MassCell& a, const MassCell& b) {
    const CombineResult r = dempster_combine_checked(a, b);
    if (r.conflict) throw TotalConflict{};
    return r.cell;
}

/// Pignistic occupancy probability: ignorance is split evenly.
inline double pignistic_p_occupied(const MassCell& c) {
    return c.m_o + 0.5 * (1.0 - c.m_o - c.m_f);
}

struct MassWithU {
    MassCell cell;
    double u = 1.0;
};

/// Evidence to belief masses via the induced Dirichlet: S = e_f + e_o + K,
/// m_A = e_A / S, u = K / S with K = 2 classes.
inline MassWithU evidence_to_mass(const EvidenceCell& e) {
    if (!std::isfinite(e.e_f) || !std::isfinite(e.e_o) || e.e_f < 0.0 || e.e_o < 0.0)
        throw NonFiniteEvidence{};
    const double strength = e.e_f + e.e_o + 2.0;
    return {{e.e_f / strength, e.e_o / strength}, 2.0 / strength};
}

}  // namespace gridfuse
