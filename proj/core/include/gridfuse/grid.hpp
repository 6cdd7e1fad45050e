#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "gridfuse/evidence.hpp"

namespace gridfuse {

/// Grid extent and metric anchoring. The sensor origin sits at the grid
/// center; x is the vehicle forward axis, y the lateral axis.
struct GridGeometry {
    int32_t n_x = 256;
    int32_t n_y = 176;
    double resolution = 0.32;

    double length() const { return n_x * resolution; }
    double width() const { return n_y * resolution; }
    int64_t cell_count() const { return int64_t(n_x) * n_y; }
    bool operator==(const GridGeometry& o) const {
        return n_x == o.n_x && n_y == o.n_y && resolution == o.resolution;
    }
};

struct CellIndex {
    int32_t i = 0;
    int32_t j = 0;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// SE(2) vehicle pose; yaw is counterclockwise positive and wrapped to (-pi, pi].
struct Pose2 {
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;
};

double wrap_angle(double psi);

/// Rigid 2D transform q = R(theta) p + t.
struct Transform2 {
    double c = 1.0;  // cos(theta)
    double s = 0.0;  // sin(theta)
    double tx = 0.0;
    double ty = 0.0;

    Point2 apply(const Point2& p) const {
        return {c * p.x - s * p.y + tx, s * p.x + c * p.y + ty};
    }
    Transform2 inverse() const;
    Transform2 then(const Transform2& outer) const;  // outer ∘ this

    static Transform2 identity() { return {}; }
    static Transform2 from_pose(const Pose2& p);
    static Transform2 rotation(double theta);
};

/// Transform mapping points in the src vehicle frame into the ref vehicle frame.
Transform2 relative_transform(const Pose2& pose_ref, const Pose2& pose_src);

/// Fixed-geometry 2D field of belief masses, row-major with x-major rows.
class EvidentialGrid {
public:
    EvidentialGrid() = default;
    explicit EvidentialGrid(const GridGeometry& g)
        : geom_(g), cells_(size_t(g.cell_count())) {}

    const GridGeometry& geometry() const { return geom_; }
    MassCell& at(int32_t i, int32_t j) { return cells_[size_t(i) * geom_.n_y + j]; }
    const MassCell& at(int32_t i, int32_t j) const { return cells_[size_t(i) * geom_.n_y + j]; }
    std::vector<MassCell>& cells() { return cells_; }
    const std::vector<MassCell>& cells() const { return cells_; }

    /// Metric position of the cell center in the vehicle frame.
    Point2 cell_center(int32_t i, int32_t j) const {
        const double res = geom_.resolution;
        return {(i + 0.5) * res - 0.5 * geom_.n_x * res,
                (j + 0.5) * res - 0.5 * geom_.n_y * res};
    }

private:
    GridGeometry geom_;
    std::vector<MassCell> cells_;
};

/// Floor-convention mapping from a metric point to its cell, or nullopt
/// when the point falls outside the grid (max edges exclusive).
std::optional<CellIndex> world_to_cell(const GridGeometry& g, const Point2& p);

enum class Interp { Bilinear, Nearest };

/// Pull-based resampling of the mass planes: each destination cell center is
/// mapped through t^-1 into the source grid and interpolated there. Locations
/// outside the source extent yield vacuous mass.
EvidentialGrid resample(const EvidentialGrid& src, const Transform2& t,
                        Interp interp = Interp::Bilinear);

}  // namespace gridfuse
