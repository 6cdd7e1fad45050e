#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gridfuse/pipeline.hpp"
#include "oracle.hpp"

using namespace gridfuse;

namespace {

SamplePair make_pair(uint64_t seed, int32_t nx = 32, int32_t ny = 24) {
    GridGeometry geom{nx, ny, 0.5};
    SamplePair pair;
    pair.g1 = EvidentialGrid(geom);
    pair.g2 = EvidentialGrid(geom);
    std::mt19937_64 rng(seed);
    for (MassCell& c : pair.g1.cells()) c = gridfuse::testing::random_mass(rng);
    for (MassCell& c : pair.g2.cells()) c = gridfuse::testing::random_mass(rng);
    pair.pose1 = {1.0, 0.5, 0.1};
    pair.pose2 = {3.0, -1.0, -0.4};
    auto [l1, l2] = build_label(pair.g1, pair.pose1, pair.g2, pair.pose2);
    pair.label = std::move(l1);
    return pair;
}

}  // namespace

TEST_CASE("prealign with zero noise equals exact-pose resampling") {
    const SamplePair pair = make_pair(3);
    std::mt19937_64 rng(1);
    auto [input, label] = prealign(pair, {0.0, 0.0}, rng);
    REQUIRE(input.t.c == 4);
    REQUIRE(input.t.h == 32);
    REQUIRE(input.t.w == 24);

    const EvidentialGrid exact = resample(pair.g2, relative_transform(pair.pose1, pair.pose2));
    for (int32_t i = 0; i < 32; ++i)
        for (int32_t j = 0; j < 24; ++j) {
            CHECK(input.t.at(0, i, j) == pair.g1.at(i, j).m_f);
            CHECK(input.t.at(1, i, j) == pair.g1.at(i, j).m_o);
            CHECK(input.t.at(2, i, j) == exact.at(i, j).m_f);
            CHECK(input.t.at(3, i, j) == exact.at(i, j).m_o);
            CHECK(label.at(0, i, j) == pair.label.at(i, j).m_f);
        }
}

TEST_CASE("vacuous g2 gives zero aligned channels regardless of noise") {
    SamplePair pair = make_pair(4);
    pair.g2 = EvidentialGrid(pair.g2.geometry());
    std::mt19937_64 rng(9);
    auto [input, label] = prealign(pair, {5.0, 20.0}, rng);
    for (int32_t i = 0; i < input.t.h; ++i)
        for (int32_t j = 0; j < input.t.w; ++j) {
            CHECK(input.t.at(2, i, j) == 0.0);
            CHECK(input.t.at(3, i, j) == 0.0);
        }
}

TEST_CASE("prealign alignment residual stays within 3-sigma bounds") {
    const SamplePair pair = make_pair(5);
    const NoiseSpec spec{5.0, 20.0};
    const double sigma_t = spec.r / kQuantile98;
    const double sigma_r = spec.alpha * M_PI / 180.0 / kQuantile98;
    int inside = 0;
    const int n = 10000;
    for (int k = 0; k < n; ++k) {
        std::mt19937_64 rng{uint64_t(k)};
        const Pose2 n1 = perturb_pose(pair.pose1, spec, rng);
        const Pose2 n2 = perturb_pose(pair.pose2, spec, rng);
        // residual of the noisy relative transform against the exact one
        const double dx = (n1.x - pair.pose1.x) - (n2.x - pair.pose2.x);
        const double dy = (n1.y - pair.pose1.y) - (n2.y - pair.pose2.y);
        const double dpsi = wrap_angle((n1.psi - pair.pose1.psi) - (n2.psi - pair.pose2.psi));
        // each difference of two independent draws has variance 2 sigma^2
        const double bound_t = 3.0 * sigma_t * std::sqrt(2.0);
        const double bound_r = 3.0 * sigma_r * std::sqrt(2.0);
        if (std::abs(dx) <= bound_t && std::abs(dy) <= bound_t && std::abs(dpsi) <= bound_r)
            ++inside;
    }
    CHECK(double(inside) / n >= 0.99);
}

TEST_CASE("label is never perturbed by pose noise") {
    const SamplePair pair = make_pair(6);
    std::mt19937_64 rng(77);
    auto [input, label] = prealign(pair, {5.0, 20.0}, rng);
    for (int32_t i = 0; i < label.h; ++i)
        for (int32_t j = 0; j < label.w; ++j) {
            CHECK(label.at(0, i, j) == pair.label.at(i, j).m_f);
            CHECK(label.at(1, i, j) == pair.label.at(i, j).m_o);
        }
}

TEST_CASE("augmentation applies the identical transform to input and label") {
    // when input planes equal the label planes, they must stay equal
    const SamplePair pair = make_pair(7, 24, 24);
    NetInput input;
    input.t = Tensor(4, 24, 24);
    Tensor label = label_to_tensor(pair.label);
    for (int32_t i = 0; i < 24; ++i)
        for (int32_t j = 0; j < 24; ++j) {
            input.t.at(0, i, j) = label.at(0, i, j);
            input.t.at(1, i, j) = label.at(1, i, j);
            input.t.at(2, i, j) = label.at(0, i, j);
            input.t.at(3, i, j) = label.at(1, i, j);
        }
    for (uint64_t seed = 0; seed < 8; ++seed) {
        NetInput in = input;
        Tensor lab = label;
        std::mt19937_64 rng(seed);
        augment(in, lab, rng);
        for (int32_t i = 0; i < 24; ++i)
            for (int32_t j = 0; j < 24; ++j) {
                CHECK(in.t.at(0, i, j) == doctest::Approx(lab.at(0, i, j)).epsilon(1e-12));
                CHECK(in.t.at(3, i, j) == doctest::Approx(lab.at(1, i, j)).epsilon(1e-12));
                // mass invariants survive augmentation
                CHECK(in.t.at(0, i, j) + in.t.at(1, i, j) <= 1.0 + 1e-9);
                CHECK(lab.at(0, i, j) + lab.at(1, i, j) <= 1.0 + 1e-9);
            }
    }
}

TEST_CASE("pipeline agrees with the baseline under zero noise") {
    const SamplePair pair = make_pair(8);
    std::mt19937_64 rng(2);
    auto [input, label] = prealign(pair, {0.0, 0.0}, rng);
    const FusionReport base = fuse_baseline(pair.g1, pair.pose1, pair.g2, pair.pose2);
    for (int32_t i = 0; i < input.t.h; ++i)
        for (int32_t j = 0; j < input.t.w; ++j) {
            const MassCell a{input.t.at(0, i, j), input.t.at(1, i, j)};
            const MassCell b{input.t.at(2, i, j), input.t.at(3, i, j)};
            const CombineResult r = dempster_combine_checked(a, b);
            const MassCell fused = r.conflict ? MassCell{} : r.cell;
            CHECK(std::abs(fused.m_f - base.fused.at(i, j).m_f) <= 1e-12);
            CHECK(std::abs(fused.m_o - base.fused.at(i, j).m_o) <= 1e-12);
        }
}

TEST_CASE("crop keeps input and label aligned") {
    const SamplePair pair = make_pair(9, 40, 32);
    std::mt19937_64 rng(3);
    auto [input, label] = prealign(pair, {0.0, 0.0}, rng);
    const Tensor full_input = input.t;
    const Tensor full_label = label;
    std::mt19937_64 crop_rng(4);
    crop(input, label, 16, crop_rng);
    REQUIRE(input.t.h == 16);
    REQUIRE(input.t.w == 16);
    REQUIRE(label.h == 16);
    bool found = false;
    for (int oy = 0; oy <= full_input.h - 16 && !found; ++oy)
        for (int ox = 0; ox <= full_input.w - 16 && !found; ++ox) {
            if (input.t.at(0, 0, 0) == full_input.at(0, oy, ox) &&
                input.t.at(0, 15, 15) == full_input.at(0, oy + 15, ox + 15) &&
                label.at(0, 0, 0) == full_label.at(0, oy, ox))
                found = true;
        }
    CHECK(found);
}

TEST_CASE("evidence_to_grid converts planes through the Dirichlet mapping") {
    GridGeometry geom{4, 4, 0.5};
    Tensor e(2, 4, 4);
    e.at(0, 1, 2) = 2.0;
    const EvidentialGrid g = evidence_to_grid(e, geom);
    CHECK(g.at(1, 2).m_f == 0.5);
    CHECK(g.at(1, 2).m_o == 0.0);
    CHECK(g.at(0, 0).is_vacuous());
    CHECK_THROWS_AS(evidence_to_grid(e, GridGeometry{8, 8, 0.5}), ShapeMismatch);
}
