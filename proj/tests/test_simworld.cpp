#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gridfuse/simworld.hpp"

using namespace gridfuse;

namespace {

WorldConfig tiny_world() {
    WorldConfig cfg;
    cfg.geometry = {64, 48, 0.5};
    cfg.sensor.ray_count = 360;
    cfg.sensor.max_range = 20.0;
    cfg.overlap_max_distance = 15.0;
    return cfg;
}

}  // namespace

TEST_CASE("empty world produces only free mass") {
    Scenario sc;  // no obstacles
    GridGeometry geom{64, 64, 0.5};
    SensorSpec sensor{360, 100.0, 0.7, 0.9};
    const EvidentialGrid g = raycast_ism(sc, {0, 0, 0}, sensor, geom);
    bool any_free = false;
    for (const MassCell& c : g.cells()) {
        CHECK(c.m_o == 0.0);
        if (c.m_f > 0.0) any_free = true;
    }
    CHECK(any_free);
    // cells on the axes are crossed by rays and must carry free mass
    CHECK(g.at(40, 32).m_f >= 0.7);
}

TEST_CASE("single wall at 10 m produces occupied cells there and shadow behind") {
    Scenario sc;
    sc.rects.push_back({10.5, 0.0, 0.5, 20.0});  // wall spanning y, front face at x=10
    GridGeometry geom{64, 64, 0.5};
    SensorSpec sensor{720, 30.0, 0.7, 0.9};
    const EvidentialGrid g = raycast_ism(sc, {0, 0, 0}, sensor, geom);

    // forward ray: the hit cell at x = 10 m
    const auto hit = world_to_cell(geom, {10.0, 0.0});
    REQUIRE(hit.has_value());
    CHECK(g.at(hit->i, hit->j).m_o >= 0.9);
    // in front of the wall: free
    const auto front = world_to_cell(geom, {8.0, 0.0});
    CHECK(g.at(front->i, front->j).m_f >= 0.7);
    CHECK(g.at(front->i, front->j).m_o == 0.0);
    // behind the wall: vacuous (occluded)
    const auto behind = world_to_cell(geom, {13.0, 0.0});
    CHECK(g.at(behind->i, behind->j).is_vacuous());
}

TEST_CASE("occluded obstacle receives no occupied mass") {
    Scenario sc;
    sc.rects.push_back({6.0, 0.0, 0.5, 3.0});   // near wall
    sc.circles.push_back({12.0, 0.0, 1.0});     // fully shadowed
    GridGeometry geom{64, 64, 0.5};
    const EvidentialGrid g = raycast_ism(sc, {0, 0, 0}, SensorSpec{720, 30.0}, geom);
    for (double x = 10.5; x <= 13.5; x += 0.5)
        for (double y = -1.0; y <= 1.0; y += 0.5) {
            const auto idx = world_to_cell(geom, {x, y});
            if (idx) CHECK(g.at(idx->i, idx->j).m_o == 0.0);
        }
}

TEST_CASE("first-hit semantics: no occupied mass before the nearest obstacle") {
    const WorldConfig cfg = tiny_world();
    const Scenario sc = build_scenario(cfg, 2, 99);
    const EvidentialGrid g = raycast_ism(sc, sc.pose1, cfg.sensor, cfg.geometry);
    // every occupied cell must be at least as far as the first hit on a ray toward it
    for (int32_t i = 0; i < cfg.geometry.n_x; ++i)
        for (int32_t j = 0; j < cfg.geometry.n_y; ++j) {
            if (g.at(i, j).m_o == 0.0) continue;
            const Point2 c = g.cell_center(i, j);
            const double dist = std::hypot(c.x, c.y);
            const double ang = std::atan2(c.y, c.x);
            const double hit = cast_ray(sc, {sc.pose1.x, sc.pose1.y}, sc.pose1.psi + ang,
                                        cfg.sensor.max_range);
            CHECK(hit >= 0.0);
            // hit point may fall into a neighboring cell; allow one diagonal
            CHECK(dist <= hit + cfg.geometry.resolution * 1.5);
        }
}

TEST_CASE("sample generation determinism and pairing") {
    const WorldConfig cfg = tiny_world();
    const auto a = generate_sample_pairs(cfg, 3, 42);
    const auto b = generate_sample_pairs(cfg, 3, 42);
    REQUIRE(a.size() == 6);  // two pairs per scene
    REQUIRE(b.size() == 6);
    for (size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].pose1.x == b[k].pose1.x);
        CHECK(a[k].pose2.psi == b[k].pose2.psi);
        REQUIRE(a[k].g1.cells().size() == b[k].g1.cells().size());
        for (size_t c = 0; c < a[k].g1.cells().size(); ++c) {
            CHECK(a[k].g1.cells()[c] == b[k].g1.cells()[c]);
            CHECK(a[k].label.cells()[c] == b[k].label.cells()[c]);
        }
    }
    // perspectives swap roles within a scene
    CHECK(a[0].pose1.x == a[1].pose2.x);
    CHECK(a[0].pose2.x == a[1].pose1.x);

    const auto c = generate_sample_pairs(cfg, 3, 43);
    bool differs = false;
    for (size_t k = 0; k < c.size() && !differs; ++k)
        differs = !(c[k].pose1.x == a[k].pose1.x && c[k].pose1.y == a[k].pose1.y);
    CHECK(differs);
}

TEST_CASE("zero overlap distance co-locates both vehicles") {
    WorldConfig cfg = tiny_world();
    cfg.overlap_max_distance = 0.0;
    const auto pairs = generate_sample_pairs(cfg, 1, 7);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].pose1.x == pairs[0].pose2.x);
    CHECK(pairs[0].pose1.psi == pairs[0].pose2.psi);
    for (size_t k = 0; k < pairs[0].g1.cells().size(); ++k)
        CHECK(pairs[0].g1.cells()[k] == pairs[0].g2.cells()[k]);

    // label equals the self-fusion of g1
    const FusionReport self = fuse_baseline(pairs[0].g1, pairs[0].pose1, pairs[0].g1,
                                            pairs[0].pose1);
    for (size_t k = 0; k < pairs[0].label.cells().size(); ++k) {
        CHECK(std::abs(pairs[0].label.cells()[k].m_f - self.fused.cells()[k].m_f) < 1e-12);
        CHECK(std::abs(pairs[0].label.cells()[k].m_o - self.fused.cells()[k].m_o) < 1e-12);
    }
}

TEST_CASE("vehicles are placed clear of obstacles and inside the overlap radius") {
    const WorldConfig cfg = tiny_world();
    for (int32_t scene = 0; scene < 20; ++scene) {
        const Scenario sc = build_scenario(cfg, scene, 1234);
        const double d = std::hypot(sc.pose2.x - sc.pose1.x, sc.pose2.y - sc.pose1.y);
        CHECK(d <= cfg.overlap_max_distance);
        for (const Rect& r : sc.rects) {
            CHECK(!(std::abs(sc.pose1.x - r.cx) <= r.hx && std::abs(sc.pose1.y - r.cy) <= r.hy));
            CHECK(!(std::abs(sc.pose2.x - r.cx) <= r.hx && std::abs(sc.pose2.y - r.cy) <= r.hy));
        }
    }
}

TEST_CASE("perturb_pose") {
    std::mt19937_64 rng(5);
    const Pose2 pose{1.0, 2.0, 0.5};

    SUBCASE("zero noise is the identity") {
        const Pose2 out = perturb_pose(pose, {0.0, 0.0}, rng);
        CHECK(out.x == pose.x);
        CHECK(out.y == pose.y);
        CHECK(out.psi == pose.psi);
    }

    SUBCASE("sigma follows the 98% quantile") {
        // r = 5 -> sigma_t = 5 / 2.3263 ~ 2.149
        const double sigma = 5.0 / kQuantile98;
        CHECK(sigma == doctest::Approx(2.149).epsilon(1e-3));
    }

    SUBCASE("empirical 98% coverage") {
        const NoiseSpec spec{1.0, 0.0};
        int inside = 0;
        const int n = 100000;
        for (int k = 0; k < n; ++k) {
            const Pose2 out = perturb_pose(pose, spec, rng);
            if (std::abs(out.x - pose.x) <= 1.0) ++inside;
        }
        const double frac = double(inside) / n;
        CHECK(frac >= 0.975);
        CHECK(frac <= 0.985);
    }
}

TEST_CASE("derive_seed decorrelates neighboring indices") {
    const uint64_t a = derive_seed(1, 0), b = derive_seed(1, 1), c = derive_seed(2, 0);
    CHECK(a != b);
    CHECK(a != c);
    CHECK(derive_seed(1, 0) == a);
}

TEST_CASE("template round trip") {
    for (TemplateId t : {TemplateId::Straight, TemplateId::TJunction, TemplateId::Crossroad})
        CHECK(template_from_string(to_string(t)) == t);
    CHECK_THROWS_AS(template_from_string("roundabout"), Error);
}
