#include "gridfuse/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "gridfuse/grid_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gridfuse {

std::string to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "train";
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw Error("unknown split: " + s);
}

std::map<char, NoiseSpec> default_noise_configs() {
    return {{'A', {0.0, 0.0}}, {'B', {1.0, 10.0}}, {'C', {2.5, 15.0}}, {'D', {5.0, 20.0}}};
}

namespace {

json pose_to_json(const Pose2& p) { return {{"x", p.x}, {"y", p.y}, {"psi", p.psi}}; }

Pose2 pose_from_json(const json& j) {
    return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("psi").get<double>()};
}

Split split_for_scenario(int32_t scenario, int32_t scene_count) {
    // 80:10:10 by scenario so perspectives never straddle splits
    const double f = (scenario + 0.5) / double(scene_count);
    if (f < 0.8) return Split::Train;
    if (f < 0.9) return Split::Val;
    return Split::Test;
}

}  // namespace

WorldConfig load_world_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    json j;
    is >> j;
    WorldConfig cfg;
    if (j.contains("templates")) {
        cfg.templates.clear();
        for (const auto& t : j.at("templates"))
            cfg.templates.push_back(template_from_string(t.get<std::string>()));
        if (cfg.templates.empty()) throw Error("template list is empty");
    }
    if (j.contains("geometry")) {
        const auto& g = j.at("geometry");
        cfg.geometry.n_x = g.value("n_x", cfg.geometry.n_x);
        cfg.geometry.n_y = g.value("n_y", cfg.geometry.n_y);
        cfg.geometry.resolution = g.value("resolution", cfg.geometry.resolution);
    }
    if (j.contains("sensor")) {
        const auto& s = j.at("sensor");
        cfg.sensor.ray_count = s.value("ray_count", cfg.sensor.ray_count);
        cfg.sensor.max_range = s.value("max_range", cfg.sensor.max_range);
        cfg.sensor.m_free = s.value("m_free", cfg.sensor.m_free);
        cfg.sensor.m_occ = s.value("m_occ", cfg.sensor.m_occ);
    }
    cfg.road_width = j.value("road_width", cfg.road_width);
    cfg.world_half = j.value("world_half", cfg.world_half);
    cfg.overlap_max_distance = j.value("overlap_max_distance", cfg.overlap_max_distance);
    cfg.max_parked_cars = j.value("max_parked_cars", cfg.max_parked_cars);
    cfg.max_moving_cars = j.value("max_moving_cars", cfg.max_moving_cars);
    cfg.max_pedestrians = j.value("max_pedestrians", cfg.max_pedestrians);
    cfg.buildings = j.value("buildings", cfg.buildings);
    return cfg;
}

void save_world_config(const WorldConfig& cfg, const std::string& path) {
    json j;
    for (TemplateId t : cfg.templates) j["templates"].push_back(to_string(t));
    j["geometry"] = {{"n_x", cfg.geometry.n_x},
                     {"n_y", cfg.geometry.n_y},
                     {"resolution", cfg.geometry.resolution}};
    j["sensor"] = {{"ray_count", cfg.sensor.ray_count},
                   {"max_range", cfg.sensor.max_range},
                   {"m_free", cfg.sensor.m_free},
                   {"m_occ", cfg.sensor.m_occ}};
    j["road_width"] = cfg.road_width;
    j["world_half"] = cfg.world_half;
    j["overlap_max_distance"] = cfg.overlap_max_distance;
    j["max_parked_cars"] = cfg.max_parked_cars;
    j["max_moving_cars"] = cfg.max_moving_cars;
    j["max_pedestrians"] = cfg.max_pedestrians;
    j["buildings"] = cfg.buildings;
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << j.dump(2) << "\n";
}

void write_dataset(const std::string& root, const WorldConfig& cfg, int32_t scene_count,
                   uint64_t seed) {
    fs::create_directories(root);
    DatasetManifest manifest;
    manifest.geometry = cfg.geometry;
    manifest.noise_configs = default_noise_configs();
    manifest.scenario_seed = seed;

    int32_t sample_index = 0;
    generate_sample_pairs(cfg, scene_count, seed, [&](const SamplePair& pair) {
        char name[32];
        std::snprintf(name, sizeof(name), "sample_%04d", sample_index);
        const fs::path dir = fs::path(root) / name;
        fs::create_directories(dir);
        save_grid(pair.g1, (dir / "g1.eogm").string());
        save_grid(pair.g2, (dir / "g2.eogm").string());
        save_grid(pair.label, (dir / "label.eogm").string());
        json meta = {{"pose1", pose_to_json(pair.pose1)},
                     {"pose2", pose_to_json(pair.pose2)},
                     {"scenario_index", pair.scenario_index},
                     {"perspective", pair.perspective}};
        std::ofstream ms(dir / "meta.json");
        ms << meta.dump(2) << "\n";

        SampleEntry entry;
        entry.dir = name;
        entry.scenario_index = pair.scenario_index;
        entry.perspective = pair.perspective;
        entry.split = split_for_scenario(pair.scenario_index, scene_count);
        manifest.samples.push_back(std::move(entry));
        ++sample_index;
    });

    json j;
    j["version"] = manifest.version;
    j["geometry"] = {{"n_x", manifest.geometry.n_x},
                     {"n_y", manifest.geometry.n_y},
                     {"resolution", manifest.geometry.resolution}};
    for (const auto& [letter, spec] : manifest.noise_configs)
        j["noise_configs"][std::string(1, letter)] = {{"r", spec.r}, {"alpha", spec.alpha}};
    j["scenario_seed"] = manifest.scenario_seed;
    for (const SampleEntry& e : manifest.samples)
        j["samples"].push_back({{"dir", e.dir},
                                {"scenario_index", e.scenario_index},
                                {"perspective", e.perspective},
                                {"split", to_string(e.split)}});
    // manifest last: its presence marks a complete dataset
    std::ofstream os(fs::path(root) / "manifest.json");
    if (!os) throw IoError("cannot write manifest in " + root);
    os << j.dump(2) << "\n";
}

DatasetManifest load_manifest(const std::string& root) {
    const fs::path path = fs::path(root) / "manifest.json";
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path.string());
    json j;
    is >> j;
    DatasetManifest m;
    m.version = j.at("version").get<uint32_t>();
    if (m.version != 1) throw VersionMismatch{};
    const auto& g = j.at("geometry");
    m.geometry = {g.at("n_x").get<int32_t>(), g.at("n_y").get<int32_t>(),
                  g.at("resolution").get<double>()};
    for (const auto& [key, spec] : j.at("noise_configs").items())
        m.noise_configs[key[0]] = {spec.at("r").get<double>(), spec.at("alpha").get<double>()};
    m.scenario_seed = j.at("scenario_seed").get<uint64_t>();
    for (const auto& e : j.at("samples")) {
        SampleEntry entry;
        entry.dir = e.at("dir").get<std::string>();
        entry.scenario_index = e.at("scenario_index").get<int32_t>();
        entry.perspective = e.at("perspective").get<int32_t>();
        entry.split = split_from_string(e.at("split").get<std::string>());
        if (!fs::exists(fs::path(root) / entry.dir / "label.eogm"))
            throw IoError("manifest references missing sample: " + entry.dir);
        m.samples.push_back(std::move(entry));
    }
    return m;
}

SamplePair load_sample(const std::string& root, const SampleEntry& entry) {
    const fs::path dir = fs::path(root) / entry.dir;
    SamplePair pair;
    pair.g1 = load_grid((dir / "g1.eogm").string());
    pair.g2 = load_grid((dir / "g2.eogm").string());
    pair.label = load_grid((dir / "label.eogm").string());
    std::ifstream ms(dir / "meta.json");
    if (!ms) throw IoError("cannot open meta.json in " + dir.string());
    json meta;
    ms >> meta;
    pair.pose1 = pose_from_json(meta.at("pose1"));
    pair.pose2 = pose_from_json(meta.at("pose2"));
    pair.scenario_index = meta.at("scenario_index").get<int32_t>();
    pair.perspective = meta.at("perspective").get<int32_t>();
    return pair;
}

DiskSource::DiskSource(std::string root, const DatasetManifest& manifest, Split split)
    : root_(std::move(root)) {
    for (const SampleEntry& e : manifest.samples)
        if (e.split == split) entries_.push_back(e);
}

SamplePair DiskSource::get(size_t index) const { return load_sample(root_, entries_[index]); }

}  // namespace gridfuse
