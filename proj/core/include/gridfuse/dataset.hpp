#pragma once

#include <map>
#include <string>
#include <vector>

#include "gridfuse/simworld.hpp"
#include "gridfuse/train.hpp"

namespace gridfuse {

enum class Split { Train, Val, Test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct SampleEntry {
    std::string dir;  // relative to the dataset root
    int32_t scenario_index = 0;
    int32_t perspective = 0;
    Split split = Split::Train;
};

struct DatasetManifest {
    uint32_t version = 1;
    GridGeometry geometry;
    std::map<char, NoiseSpec> noise_configs;  // A-D table
    uint64_t scenario_seed = 0;
    std::vector<SampleEntry> samples;
};

/// The standard noise table: A (0 m, 0 deg) through D (5 m, 20 deg).
std::map<char, NoiseSpec> default_noise_configs();

/// Scenario template configuration, loadable from a JSON file.
WorldConfig load_world_config(const std::string& path);
void save_world_config(const WorldConfig& cfg, const std::string& path);

/// Writes one directory per sample (g1.eogm, g2.eogm, label.eogm, meta.json)
/// plus manifest.json; the manifest is written last as the commit point.
/// Scenarios are split 80:10:10 so both perspectives of a scene share a split.
void write_dataset(const std::string& root, const WorldConfig& cfg, int32_t scene_count,
                   uint64_t seed);

DatasetManifest load_manifest(const std::string& root);
SamplePair load_sample(const std::string& root, const SampleEntry& entry);

/// Lazily loads samples of one split from a dataset on disk.
class DiskSource final : public SampleSource {
public:
    DiskSource(std::string root, const DatasetManifest& manifest, Split split);
    size_t size() const override { return entries_.size(); }
    SamplePair get(size_t index) const override;
    const SampleEntry& entry(size_t index) const { return entries_[index]; }

private:
    std::string root_;
    std::vector<SampleEntry> entries_;
};

}  // namespace gridfuse
