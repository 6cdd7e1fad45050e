#include "gridfuse/fusion.hpp"

#include "gridfuse/errors.hpp"

namespace gridfuse {

FusionReport fuse_baseline(const EvidentialGrid& g1, const Pose2& pose1,
                           const EvidentialGrid& g2, const Pose2& pose2) {
    if (!(g1.geometry() == g2.geometry())) throw GeometryMismatch{};

    const EvidentialGrid g2_in_1 = resample(g2, relative_transform(pose1, pose2));

    FusionReport report;
    report.fused = EvidentialGrid(g1.geometry());
    double kappa_sum = 0.0;
    int64_t overlap = 0;
    const size_t n = g1.cells().size();
    for (size_t k = 0; k < n; ++k) {
        const MassCell& a = g1.cells()[k];
        const MassCell& b = g2_in_1.cells()[k];
        const CombineResult r = dempster_combine_checked(a, b);
        if (r.conflict) {
            ++report.conflict_cells;  // cell stays vacuous
        } else {
            report.fused.cells()[k] = r.cell;
        }
        if (!a.is_vacuous() && !b.is_vacuous()) {
            kappa_sum += r.kappa;
            ++overlap;
        }
    }
    report.mean_conflict = overlap > 0 ? kappa_sum / double(overlap) : 0.0;
    return report;
}

std::pair<EvidentialGrid, EvidentialGrid> build_label(const EvidentialGrid& g1,
                                                      const Pose2& pose1_exact,
                                                      const EvidentialGrid& g2,
                                                      const Pose2& pose2_exact) {
    return {fuse_baseline(g1, pose1_exact, g2, pose2_exact).fused,
            fuse_baseline(g2, pose2_exact, g1, pose1_exact).fused};
}

}  // namespace gridfuse
