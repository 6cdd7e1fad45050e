#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gridfuse/evidence.hpp"
#include "oracle.hpp"

using namespace gridfuse;
using gridfuse::testing::brute_force_combine;
using gridfuse::testing::random_mass;

TEST_CASE("dempster combination worked example") {
    // expected values frozen from the brute-force power-set oracle
    const MassCell a{0.6, 0.2}, b{0.5, 0.3};
    const auto oracle = brute_force_combine(a, b);
    REQUIRE(oracle.has_value());
    const MassCell r = dempster_combine(a, b);
    CHECK(r.m_f == doctest::Approx(oracle->m_f).epsilon(1e-12));
    CHECK(r.m_f == doctest::Approx(0.72222).epsilon(1e-4));
    CHECK(r.m_o == doctest::Approx(0.22222).epsilon(1e-4));
    CHECK(r.uncertainty() == doctest::Approx(0.05556).epsilon(1e-3));
}

TEST_CASE("vacuous mass is the identity") {
    const MassCell a{0.4, 0.1};
    const MassCell r = dempster_combine(a, MassCell{});
    CHECK(std::abs(r.m_f - a.m_f) < 1e-15);
    CHECK(std::abs(r.m_o - a.m_o) < 1e-15);
}

TEST_CASE("total conflict raises") {
    CHECK_THROWS_AS(dempster_combine({1.0, 0.0}, {0.0, 1.0}), TotalConflict);
}

TEST_CASE("combination matches oracle, commutes, and associates") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 20000; ++k) {
        const MassCell a = random_mass(rng), b = random_mass(rng), c = random_mass(rng);
        const auto oracle = brute_force_combine(a, b);
        REQUIRE(oracle.has_value());
        const MassCell ab = dempster_combine(a, b);
        CHECK(std::abs(ab.m_f - oracle->m_f) <= 1e-12);
        CHECK(std::abs(ab.m_o - oracle->m_o) <= 1e-12);

        const MassCell ba = dempster_combine(b, a);
        CHECK(ab.m_f == ba.m_f);  // bit-for-bit
        CHECK(ab.m_o == ba.m_o);

        const MassCell ab_c = dempster_combine(ab, c);
        const MassCell a_bc = dempster_combine(a, dempster_combine(b, c));
        CHECK(std::abs(ab_c.m_f - a_bc.m_f) <= 1e-12);
        CHECK(std::abs(ab_c.m_o - a_bc.m_o) <= 1e-12);

        CHECK(ab.valid());
    }
}

TEST_CASE("pignistic transform") {
    CHECK(pignistic_p_occupied({0.0, 0.0}) == 0.5);
    CHECK(pignistic_p_occupied({0.0, 1.0}) == 1.0);
    CHECK(pignistic_p_occupied({0.5, 0.3}) == doctest::Approx(0.40).epsilon(1e-15));

    std::mt19937_64 rng(11);
    for (int k = 0; k < 1000; ++k) {
        const MassCell c = random_mass(rng);
        const double p_o = pignistic_p_occupied(c);
        const double p_f = c.m_f + 0.5 * (1.0 - c.m_o - c.m_f);
        CHECK(std::abs(p_o + p_f - 1.0) <= 1e-15);  // complement up to one rounding
    }
}

TEST_CASE("evidence to mass") {
    const MassWithU zero = evidence_to_mass({0.0, 0.0});
    CHECK(zero.cell.m_f == 0.0);
    CHECK(zero.cell.m_o == 0.0);
    CHECK(zero.u == 1.0);

    const MassWithU two = evidence_to_mass({2.0, 0.0});
    CHECK(two.cell.m_f == 0.5);
    CHECK(two.cell.m_o == 0.0);
    CHECK(two.u == 0.5);

    const MassWithU mixed = evidence_to_mass({8.0, 6.0});
    CHECK(mixed.cell.m_f == 0.5);
    CHECK(mixed.cell.m_o == 0.375);
    CHECK(mixed.u == 0.125);

    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int k = 0; k < 1000; ++k) {
        const MassWithU m = evidence_to_mass({u(rng), u(rng)});
        CHECK(std::abs(m.cell.m_f + m.cell.m_o + m.u - 1.0) <= 1e-12);
        CHECK(m.u >= 0.0);
    }

    CHECK_THROWS_AS(evidence_to_mass({std::nan(""), 0.0}), NonFiniteEvidence);
    CHECK_THROWS_AS(evidence_to_mass({0.0, std::numeric_limits<double>::infinity()}),
                    NonFiniteEvidence);
    CHECK_THROWS_AS(evidence_to_mass({-1.0, 0.0}), NonFiniteEvidence);
}
