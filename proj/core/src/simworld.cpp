#include "gridfuse/simworld.hpp"

#include <algorithm>
#include <cmath>

#include "gridfuse/errors.hpp"

namespace gridfuse {

std::string to_string(TemplateId id) {
    switch (id) {
        case TemplateId::Straight: return "straight";
        case TemplateId::TJunction: return "t_junction";
        case TemplateId::Crossroad: return "crossroad";
    }
    return "straight";
}

TemplateId template_from_string(const std::string& s) {
    if (s == "straight") return TemplateId::Straight;
    if (s == "t_junction") return TemplateId::TJunction;
    if (s == "crossroad") return TemplateId::Crossroad;
    throw Error("unknown template: " + s);
}

uint64_t derive_seed(uint64_t seed, uint64_t k) {
    // splitmix64 over the combined words
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Pose2 perturb_pose(const Pose2& pose, const NoiseSpec& spec, std::mt19937_64& rng) {
    const double sigma_t = spec.r / kQuantile98;
    const double sigma_r = spec.alpha * M_PI / 180.0 / kQuantile98;
    std::normal_distribution<double> nt(0.0, 1.0);
    Pose2 out = pose;
    if (sigma_t > 0.0) {
        out.x += sigma_t * nt(rng);
        out.y += sigma_t * nt(rng);
    }
    if (sigma_r > 0.0) out.psi = wrap_angle(out.psi + sigma_r * nt(rng));
    return out;
}

namespace {

bool ray_rect(Point2 o, double dx, double dy, const Rect& r, double& t_hit) {
    // slab method
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
    const double lo[2] = {r.cx - r.hx, r.cy - r.hy};
    const double hi[2] = {r.cx + r.hx, r.cy + r.hy};
    const double org[2] = {o.x, o.y};
    const double dir[2] = {dx, dy};
    for (int a = 0; a < 2; ++a) {
        if (std::abs(dir[a]) < 1e-12) {
            if (org[a] < lo[a] || org[a] > hi[a]) return false;
            continue;
        }
        double ta = (lo[a] - org[a]) / dir[a];
        double tb = (hi[a] - org[a]) / dir[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return false;
    }
    t_hit = t0;
    return true;
}

bool ray_circle(Point2 o, double dx, double dy, const Circle& c, double& t_hit) {
    const double mx = o.x - c.cx, my = o.y - c.cy;
    const double b = mx * dx + my * dy;
    const double q = mx * mx + my * my - c.r * c.r;
    const double disc = b * b - q;
    if (disc < 0.0) return false;
    const double root = std::sqrt(disc);
    double t = -b - root;
    if (t < 0.0) t = -b + root;
    if (t < 0.0) return false;
    t_hit = t;
    return true;
}

bool point_in_rect(Point2 p, const Rect& r, double margin) {
    return std::abs(p.x - r.cx) <= r.hx + margin && std::abs(p.y - r.cy) <= r.hy + margin;
}

bool point_in_circle(Point2 p, const Circle& c, double margin) {
    const double dx = p.x - c.cx, dy = p.y - c.cy;
    const double rr = c.r + margin;
    return dx * dx + dy * dy <= rr * rr;
}

bool clear_of_obstacles(const Scenario& sc, Point2 p, double margin) {
    for (const Rect& r : sc.rects)
        if (point_in_rect(p, r, margin)) return false;
    for (const Circle& c : sc.circles)
        if (point_in_circle(p, c, margin)) return false;
    return true;
}

bool on_road(const Scenario& sc, Point2 p) {
    for (const Rect& r : sc.road)
        if (point_in_rect(p, r, 0.0)) return true;
    return false;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

void add_buildings(Scenario& sc, const WorldConfig& cfg, std::mt19937_64& rng) {
    // rows of buildings flanking the horizontal road; skip anything that
    // would intrude on the drivable area
    const double edge = cfg.road_width * 0.5;
    for (int side = -1; side <= 1; side += 2) {
        double x = -cfg.world_half + uniform(rng, 0.0, 10.0);
        while (x < cfg.world_half - 6.0) {
            const double w = uniform(rng, 8.0, 20.0);
            const double d = uniform(rng, 6.0, 15.0);
            const double setback = uniform(rng, 1.5, 5.0);
            Rect b{x + w * 0.5, side * (edge + setback + d * 0.5), w * 0.5, d * 0.5};
            bool blocked = false;
            for (const Rect& r : sc.road) {
                if (std::abs(b.cx - r.cx) < b.hx + r.hx && std::abs(b.cy - r.cy) < b.hy + r.hy) {
                    blocked = true;
                    break;
                }
            }
            if (!blocked) sc.rects.push_back(b);
            x += w + uniform(rng, 2.0, 12.0);
        }
    }
}

void add_parked_cars(Scenario& sc, const WorldConfig& cfg, std::mt19937_64& rng) {
    const int n = uniform_int(rng, 0, cfg.max_parked_cars);
    const double edge = cfg.road_width * 0.5;
    for (int k = 0; k < n; ++k) {
        const double x = uniform(rng, -cfg.world_half + 5.0, cfg.world_half - 5.0);
        const int side = uniform_int(rng, 0, 1) * 2 - 1;
        sc.rects.push_back({x, side * (edge - 1.1), 2.25, 0.9});
    }
}

void add_moving_cars(Scenario& sc, const WorldConfig& cfg, std::mt19937_64& rng) {
    // frozen per frame; both input maps observe the same instant
    const int n = uniform_int(rng, 0, cfg.max_moving_cars);
    const double lane = cfg.road_width * 0.25;
    for (int k = 0; k < n; ++k) {
        const Rect& road = sc.road[size_t(uniform_int(rng, 0, int(sc.road.size()) - 1))];
        const bool horizontal = road.hx >= road.hy;
        const int side = uniform_int(rng, 0, 1) * 2 - 1;
        if (horizontal) {
            const double x = uniform(rng, road.cx - road.hx + 4.0, road.cx + road.hx - 4.0);
            sc.rects.push_back({x, road.cy + side * lane, 2.25, 1.0});
        } else {
            const double y = uniform(rng, road.cy - road.hy + 4.0, road.cy + road.hy - 4.0);
            sc.rects.push_back({road.cx + side * lane, y, 1.0, 2.25});
        }
    }
}

void add_pedestrians(Scenario& sc, const WorldConfig& cfg, std::mt19937_64& rng) {
    const int n = uniform_int(rng, 0, cfg.max_pedestrians);
    const double edge = cfg.road_width * 0.5;
    for (int k = 0; k < n; ++k) {
        const double x = uniform(rng, -cfg.world_half, cfg.world_half);
        const double y = (uniform_int(rng, 0, 1) * 2 - 1) * uniform(rng, edge * 0.3, edge + 3.0);
        sc.circles.push_back({x, y, uniform(rng, 0.25, 0.4)});
    }
}

Pose2 sample_lane_pose(const Scenario& sc, const WorldConfig& cfg, std::mt19937_64& rng) {
    const Rect& road = sc.road[size_t(uniform_int(rng, 0, int(sc.road.size()) - 1))];
    const bool horizontal = road.hx >= road.hy;
    const double lane = cfg.road_width * 0.25;
    const int dir = uniform_int(rng, 0, 1) * 2 - 1;
    const double jitter = uniform(rng, -10.0, 10.0) * M_PI / 180.0;
    Pose2 p;
    if (horizontal) {
        p.x = uniform(rng, road.cx - road.hx + 3.0, road.cx + road.hx - 3.0);
        p.y = road.cy + dir * lane;
        p.psi = wrap_angle((dir > 0 ? 0.0 : M_PI) + jitter);
    } else {
        p.x = road.cx + dir * lane;
        p.y = uniform(rng, road.cy - road.hy + 3.0, road.cy + road.hy - 3.0);
        p.psi = wrap_angle((dir > 0 ? -M_PI_2 : M_PI_2) + jitter);
    }
    return p;
}

}  // namespace

double cast_ray(const Scenario& sc, Point2 origin, double angle, double max_range) {
    const double dx = std::cos(angle), dy = std::sin(angle);
    double best = -1.0;
    double t;
    for (const Rect& r : sc.rects) {
        if (ray_rect(origin, dx, dy, r, t) && t <= max_range && (best < 0.0 || t < best))
            best = t;
    }
    for (const Circle& c : sc.circles) {
        if (ray_circle(origin, dx, dy, c, t) && t <= max_range && (best < 0.0 || t < best))
            best = t;
    }
    return best;
}

EvidentialGrid raycast_ism(const Scenario& sc, const Pose2& vehicle_pose,
                           const SensorSpec& sensor, const GridGeometry& geometry) {
    EvidentialGrid grid(geometry);
    const double step = geometry.resolution * 0.5;
    const Point2 origin{vehicle_pose.x, vehicle_pose.y};
    const MassCell free_mass{sensor.m_free, 0.0};
    const MassCell occ_mass{0.0, sensor.m_occ};

    // One scan yields at most one free and one occupied observation per cell
    // (rays are not independent sources); cells that collect both — a ray ends
    // where another passes through — take the Dempster-combined value.
    const size_t n_cells = size_t(geometry.n_x) * size_t(geometry.n_y);
    std::vector<uint8_t> seen_free(n_cells, 0), seen_occ(n_cells, 0);
    auto flat = [&](int32_t i, int32_t j) { return size_t(i) * size_t(geometry.n_y) + size_t(j); };

    for (int ray = 0; ray < sensor.ray_count; ++ray) {
        const double local = 2.0 * M_PI * ray / sensor.ray_count;
        const double hit = cast_ray(sc, origin, vehicle_pose.psi + local, sensor.max_range);
        const double free_end = hit >= 0.0 ? hit : sensor.max_range;

        int32_t hit_i = -1, hit_j = -1;
        if (hit >= 0.0) {
            const Point2 hp{hit * std::cos(local), hit * std::sin(local)};
            if (auto idx = world_to_cell(geometry, hp)) {
                hit_i = idx->i;
                hit_j = idx->j;
            }
        }

        const double cl = std::cos(local), sl = std::sin(local);
        for (double s = step * 0.5; s < free_end; s += step) {
            const auto idx = world_to_cell(geometry, {s * cl, s * sl});
            if (!idx) break;  // rays start at the grid center and exit once
            if (idx->i == hit_i && idx->j == hit_j) continue;
            seen_free[flat(idx->i, idx->j)] = 1;
        }
        if (hit_i >= 0) seen_occ[flat(hit_i, hit_j)] = 1;
    }

    const MassCell both = dempster_combine_checked(free_mass, occ_mass).cell;
    for (int32_t i = 0; i < geometry.n_x; ++i)
        for (int32_t j = 0; j < geometry.n_y; ++j) {
            const size_t k = flat(i, j);
            if (seen_free[k] && seen_occ[k])
                grid.at(i, j) = both;
            else if (seen_free[k])
                grid.at(i, j) = free_mass;
            else if (seen_occ[k])
                grid.at(i, j) = occ_mass;
        }
    return grid;
}

Scenario build_scenario(const WorldConfig& cfg, int32_t scenario_index, uint64_t seed) {
    Scenario sc;
    sc.rng_seed = derive_seed(seed, uint64_t(scenario_index));
    std::mt19937_64 rng(sc.rng_seed);

    sc.tpl = cfg.templates[size_t(scenario_index) % cfg.templates.size()];
    const double w2 = cfg.road_width * 0.5;
    const double half = cfg.world_half;
    sc.road.push_back({0.0, 0.0, half, w2});  // horizontal band
    if (sc.tpl == TemplateId::TJunction)
        sc.road.push_back({0.0, -half * 0.5, w2, half * 0.5});
    else if (sc.tpl == TemplateId::Crossroad)
        sc.road.push_back({0.0, 0.0, w2, half});

    if (cfg.buildings) add_buildings(sc, cfg, rng);
    add_parked_cars(sc, cfg, rng);
    add_moving_cars(sc, cfg, rng);
    add_pedestrians(sc, cfg, rng);

    const double margin = 1.5;
    constexpr int kMaxRetries = 200;
    bool placed = false;
    for (int attempt = 0; attempt < kMaxRetries && !placed; ++attempt) {
        sc.pose1 = sample_lane_pose(sc, cfg, rng);
        placed = clear_of_obstacles(sc, {sc.pose1.x, sc.pose1.y}, margin) &&
                 on_road(sc, {sc.pose1.x, sc.pose1.y});
    }
    if (!placed) throw PlacementFailure{};

    if (cfg.overlap_max_distance <= 0.0) {
        sc.pose2 = sc.pose1;  // degenerate co-location
        return sc;
    }
    placed = false;
    for (int attempt = 0; attempt < kMaxRetries && !placed; ++attempt) {
        sc.pose2 = sample_lane_pose(sc, cfg, rng);
        const double dx = sc.pose2.x - sc.pose1.x, dy = sc.pose2.y - sc.pose1.y;
        placed = std::hypot(dx, dy) <= cfg.overlap_max_distance &&
                 clear_of_obstacles(sc, {sc.pose2.x, sc.pose2.y}, margin) &&
                 on_road(sc, {sc.pose2.x, sc.pose2.y});
    }
    if (!placed) throw PlacementFailure{};
    return sc;
}

void generate_sample_pairs(const WorldConfig& cfg, int32_t scene_count, uint64_t seed,
                           const std::function<void(const SamplePair&)>& emit) {
    if (scene_count < 1) throw Error("scene_count must be >= 1");
    for (int32_t k = 0; k < scene_count; ++k) {
        const Scenario sc = build_scenario(cfg, k, seed);
        const EvidentialGrid g1 = raycast_ism(sc, sc.pose1, cfg.sensor, cfg.geometry);
        const EvidentialGrid g2 = raycast_ism(sc, sc.pose2, cfg.sensor, cfg.geometry);
        auto [label1, label2] = build_label(g1, sc.pose1, g2, sc.pose2);
        emit({g1, g2, sc.pose1, sc.pose2, std::move(label1), k, 0});
        emit({g2, g1, sc.pose2, sc.pose1, std::move(label2), k, 1});
    }
}

std::vector<SamplePair> generate_sample_pairs(const WorldConfig& cfg, int32_t scene_count,
                                              uint64_t seed) {
    std::vector<SamplePair> out;
    out.reserve(size_t(scene_count) * 2);
    generate_sample_pairs(cfg, scene_count, seed,
                          [&](const SamplePair& p) { out.push_back(p); });
    return out;
}

}  // namespace gridfuse
