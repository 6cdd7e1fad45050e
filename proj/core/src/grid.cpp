#include "gridfuse/grid.hpp"

namespace gridfuse {

double wrap_angle(double psi) {
    psi = std::remainder(psi, 2.0 * M_PI);
    if (psi <= -M_PI) psi += 2.0 * M_PI;
    return psi;
}

Transform2 Transform2::inverse() const {
    // R^T, -R^T t
    return {c, -s, -(c * tx + s * ty), -(-s * tx + c * ty)};
}

Transform2 Transform2::then(const Transform2& o) const {
    return {o.c * c - o.s * s, o.s * c + o.c * s,
            o.c * tx - o.s * ty + o.tx, o.s * tx + o.c * ty + o.ty};
}

Transform2 Transform2::from_pose(const Pose2& p) {
    return {std::cos(p.psi), std::sin(p.psi), p.x, p.y};
}

Transform2 Transform2::rotation(double theta) {
    return {std::cos(theta), std::sin(theta), 0.0, 0.0};
}

Transform2 relative_transform(const Pose2& pose_ref, const Pose2& pose_src) {
    return Transform2::from_pose(pose_src).then(Transform2::from_pose(pose_ref).inverse());
}

std::optional<CellIndex> world_to_cell(const GridGeometry& g, const Point2& p) {
    const double i = std::floor((p.x + 0.5 * g.n_x * g.resolution) / g.resolution);
    const double j = std::floor((p.y + 0.5 * g.n_y * g.resolution) / g.resolution);
    if (i < 0 || j < 0 || i >= g.n_x || j >= g.n_y) return std::nullopt;
    return CellIndex{int32_t(i), int32_t(j)};
}

namespace {

// Continuous cell coordinate: u == i exactly at the center of cell i.
inline double to_cell_coord(double x, int32_t n, double res) {
    return (x + 0.5 * n * res) / res - 0.5;
}

// Snap near-integer coordinates so identity and whole-cell shifts copy bits.
inline void split_coord(double u, int32_t& i0, double& f) {
    i0 = int32_t(std::floor(u));
    f = u - i0;
    if (f < 1e-9) {
        f = 0.0;
    } else if (f > 1.0 - 1e-9) {
        ++i0;
        f = 0.0;
    }
}

}  // namespace

EvidentialGrid resample(const EvidentialGrid& src, const Transform2& t, Interp interp) {
    const GridGeometry& g = src.geometry();
    EvidentialGrid dst(g);
    const Transform2 inv = t.inverse();

    for (int32_t i = 0; i < g.n_x; ++i) {
        for (int32_t j = 0; j < g.n_y; ++j) {
            const Point2 p = inv.apply(dst.cell_center(i, j));
            const double u = to_cell_coord(p.x, g.n_x, g.resolution);
            const double v = to_cell_coord(p.y, g.n_y, g.resolution);

            if (interp == Interp::Nearest) {
                const int32_t si = int32_t(std::lround(u));
                const int32_t sj = int32_t(std::lround(v));
                if (si >= 0 && si < g.n_x && sj >= 0 && sj < g.n_y)
                    dst.at(i, j) = src.at(si, sj);
                continue;
            }

            if (u <= -1.0 || u >= g.n_x || v <= -1.0 || v >= g.n_y) continue;
            int32_t i0, j0;
            double fx, fy;
            split_coord(u, i0, fx);
            split_coord(v, j0, fy);
            if (fx == 0.0 && fy == 0.0) {
                if (i0 >= 0 && i0 < g.n_x && j0 >= 0 && j0 < g.n_y)
                    dst.at(i, j) = src.at(i0, j0);
                continue;
            }

            double mf = 0.0, mo = 0.0;
            const double wx[2] = {1.0 - fx, fx};
            const double wy[2] = {1.0 - fy, fy};
            for (int a = 0; a < 2; ++a) {
                const int32_t si = i0 + a;
                if (si < 0 || si >= g.n_x || wx[a] == 0.0) continue;
                for (int b = 0; b < 2; ++b) {
                    const int32_t sj = j0 + b;
                    if (sj < 0 || sj >= g.n_y || wy[b] == 0.0) continue;
                    const double w = wx[a] * wy[b];
                    const MassCell& cell = src.at(si, sj);
                    mf += w * cell.m_f;
                    mo += w * cell.m_o;
                }
            }
            dst.at(i, j) = {mf, mo};
        }
    }
    return dst;
}

}  // namespace gridfuse
