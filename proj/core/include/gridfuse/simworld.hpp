#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gridfuse/fusion.hpp"
#include "gridfuse/grid.hpp"

namespace gridfuse {

enum class TemplateId { Straight, TJunction, Crossroad };

std::string to_string(TemplateId id);
TemplateId template_from_string(const std::string& s);

/// Axis-aligned obstacle footprint (building, parked or moving car).
struct Rect {
    double cx = 0.0, cy = 0.0;  // center, meters
    double hx = 0.0, hy = 0.0;  // half extents
};

/// Pedestrian disc.
struct Circle {
    double cx = 0.0, cy = 0.0;
    double r = 0.0;
};

struct Scenario {
    TemplateId tpl = TemplateId::Straight;
    std::vector<Rect> rects;
    std::vector<Circle> circles;
    std::vector<Rect> road;  // drivable area (not obstacles)
    Pose2 pose1, pose2;
    uint64_t rng_seed = 0;
};

/// 98% confidence half-widths of the Gaussian pose error.
struct NoiseSpec {
    double r = 0.0;      // meters, translational
    double alpha = 0.0;  // degrees, rotational
};

/// Two-sided 98% standard-normal quantile: P(|Z| <= 2.3263) = 0.98.
constexpr double kQuantile98 = 2.3263;

struct SensorSpec {
    int ray_count = 720;
    double max_range = 50.0;
    double m_free = 0.7;  // mass placed on free cells along a ray
    double m_occ = 0.9;   // mass placed on the hit cell
};

struct SamplePair {
    EvidentialGrid g1, g2;
    Pose2 pose1, pose2;       // exact poses
    EvidentialGrid label;     // exact-pose fusion, perspective of g1
    int32_t scenario_index = 0;
    int32_t perspective = 0;  // 0 or 1: which vehicle owns the frame
};

struct WorldConfig {
    std::vector<TemplateId> templates = {TemplateId::Straight, TemplateId::TJunction,
                                         TemplateId::Crossroad};
    GridGeometry geometry;
    SensorSpec sensor;
    double road_width = 8.0;
    double world_half = 60.0;           // template half extent, meters
    double overlap_max_distance = 40.0; // "close enough" threshold
    int max_parked_cars = 6;
    int max_moving_cars = 4;
    int max_pedestrians = 8;
    bool buildings = true;
};

/// Distance along the ray to the first obstacle, or a negative value when
/// nothing is hit within max_range.
double cast_ray(const Scenario& sc, Point2 origin, double angle, double max_range);

/// Analytic ray-cast inverse sensor model: equiangular rays from the vehicle
/// origin; free mass before the first hit, occupied mass on the hit cell,
/// vacuous beyond.
EvidentialGrid raycast_ism(const Scenario& sc, const Pose2& vehicle_pose,
                           const SensorSpec& sensor, const GridGeometry& geometry);

/// Deterministic per-scenario construction; the RNG stream is derived from
/// (seed, scenario_index) so parallel and serial generation agree.
Scenario build_scenario(const WorldConfig& cfg, int32_t scenario_index, uint64_t seed);

/// Emits two SamplePairs per scenario (one per perspective).
void generate_sample_pairs(const WorldConfig& cfg, int32_t scene_count, uint64_t seed,
                           const std::function<void(const SamplePair&)>& emit);

std::vector<SamplePair> generate_sample_pairs(const WorldConfig& cfg, int32_t scene_count,
                                              uint64_t seed);

Pose2 perturb_pose(const Pose2& pose, const NoiseSpec& spec, std::mt19937_64& rng);

/// Stream seed for scenario or sample k, decorrelated from neighboring k.
uint64_t derive_seed(uint64_t seed, uint64_t k);

}  // namespace gridfuse
