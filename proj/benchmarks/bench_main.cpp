#include <benchmark/benchmark.h>

#include <random>

#include "gridfuse/evidence.hpp"
#include "gridfuse/fusion.hpp"
#include "gridfuse/net.hpp"
#include "gridfuse/simworld.hpp"

using namespace gridfuse;

namespace {

MassCell random_mass(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double f = u(rng);
    return {f, u(rng) * (1.0 - f)};
}

EvidentialGrid random_grid(const GridGeometry& g, uint64_t seed) {
    EvidentialGrid grid(g);
    std::mt19937_64 rng(seed);
    for (MassCell& c : grid.cells()) c = random_mass(rng);
    return grid;
}

void BM_DempsterCombine(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::vector<std::pair<MassCell, MassCell>> pairs(1024);
    for (auto& p : pairs) p = {random_mass(rng), random_mass(rng)};
    size_t k = 0;
    for (auto _ : state) {
        const auto& [a, b] = pairs[k++ & 1023];
        benchmark::DoNotOptimize(dempster_combine_checked(a, b));
    }
}
BENCHMARK(BM_DempsterCombine);

void BM_Resample(benchmark::State& state) {
    const EvidentialGrid g = random_grid({256, 176, 0.32}, 2);
    const Transform2 t = Transform2::from_pose({1.3, -0.7, 0.2});
    for (auto _ : state) benchmark::DoNotOptimize(resample(g, t));
}
BENCHMARK(BM_Resample)->Unit(benchmark::kMillisecond);

void BM_FuseBaseline(benchmark::State& state) {
    const EvidentialGrid g1 = random_grid({256, 176, 0.32}, 3);
    const EvidentialGrid g2 = random_grid({256, 176, 0.32}, 4);
    const Pose2 p1{0.0, 0.0, 0.0}, p2{2.0, 1.0, 0.3};
    for (auto _ : state) benchmark::DoNotOptimize(fuse_baseline(g1, p1, g2, p2));
}
BENCHMARK(BM_FuseBaseline)->Unit(benchmark::kMillisecond);

void BM_Raycast(benchmark::State& state) {
    WorldConfig wc;
    const Scenario sc = build_scenario(wc, 5, 99);
    for (auto _ : state)
        benchmark::DoNotOptimize(raycast_ism(sc, sc.pose1, wc.sensor, wc.geometry));
}
BENCHMARK(BM_Raycast)->Unit(benchmark::kMillisecond);

void BM_NetForward(benchmark::State& state) {
    NetConfig cfg;
    const NetParams params = init_params(cfg, 6);
    Tensor x(4, 64, 64);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : x.v) v = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(forward(params, x));
}
BENCHMARK(BM_NetForward)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
