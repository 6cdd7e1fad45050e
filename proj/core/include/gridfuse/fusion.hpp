#pragma once

#include <cstdint>
#include <utility>

#include "gridfuse/grid.hpp"

namespace gridfuse {

struct FusionReport {
    EvidentialGrid fused;
    int64_t conflict_cells = 0;  // cells hitting total conflict, reset to vacuous
    double mean_conflict = 0.0;  // mean kappa over cells where both inputs carry mass
};

/// Rule-based baseline: bring g2 into g1's frame via the (possibly noisy)
/// poses, then combine cellwise with Dempster's Rule. Total-conflict cells
/// become vacuous and are counted rather than aborting the whole map.
FusionReport fuse_baseline(const EvidentialGrid& g1, const Pose2& pose1,
                           const EvidentialGrid& g2, const Pose2& pose2);

/// Label construction: the exact-pose fusion from each vehicle's perspective.
std::pair<EvidentialGrid, EvidentialGrid> build_label(const EvidentialGrid& g1,
                                                      const Pose2& pose1_exact,
                                                      const EvidentialGrid& g2,
                                                      const Pose2& pose2_exact);

}  // namespace gridfuse
