#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "gridfuse/dataset.hpp"
#include "gridfuse/grid_io.hpp"

using namespace gridfuse;
namespace fs = std::filesystem;

namespace {

// float-valued masses so the float32 planes round-trip without loss
EvidentialGrid random_float_grid(const GridGeometry& g, uint64_t seed) {
    EvidentialGrid grid(g);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (MassCell& c : grid.cells()) {
        const float f = float(u(rng));
        const float o = float(u(rng) * (1.0 - f));
        c = {double(f), double(o)};
    }
    return grid;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("gf_io_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("grid save/load round trip is bit exact") {
    TempDir tmp;
    const std::string path = (tmp.path / "g.eogm").string();
    for (uint64_t seed = 0; seed < 5; ++seed) {
        const EvidentialGrid g = random_float_grid({32, 24, 0.32}, seed);
        save_grid(g, path);
        const EvidentialGrid back = load_grid(path);
        CHECK(back.geometry() == g.geometry());
        for (size_t k = 0; k < g.cells().size(); ++k) CHECK(back.cells()[k] == g.cells()[k]);
    }
}

TEST_CASE("grid load error paths") {
    TempDir tmp;
    const std::string path = (tmp.path / "g.eogm").string();
    const EvidentialGrid g = random_float_grid({16, 16, 0.5}, 1);
    save_grid(g, path);

    SUBCASE("bad magic") {
        std::fstream fsr(path, std::ios::in | std::ios::out | std::ios::binary);
        fsr.write("XXXX", 4);
        fsr.close();
        CHECK_THROWS_AS(load_grid(path), BadMagic);
    }

    SUBCASE("truncated mid-plane") {
        fs::resize_file(path, fs::file_size(path) - 100);
        CHECK_THROWS_AS(load_grid(path), TruncatedFile);
    }

    SUBCASE("invariant violation on ingestion") {
        // craft one cell with m_f = 0.8, m_o = 0.5
        std::fstream fsr(path, std::ios::in | std::ios::out | std::ios::binary);
        const float mf = 0.8f, mo = 0.5f;
        const size_t header = 4 + 4 + 4 + 4 + 8;
        fsr.seekp(header);
        fsr.write(reinterpret_cast<const char*>(&mf), 4);
        fsr.seekp(std::streamoff(header + 16 * 16 * 4));
        fsr.write(reinterpret_cast<const char*>(&mo), 4);
        fsr.close();
        CHECK_THROWS_AS(load_grid(path), InvariantViolation);
    }
}

TEST_CASE("render writes the documented PPM mapping") {
    TempDir tmp;
    GridGeometry geom{2, 2, 0.5};
    EvidentialGrid g(geom);
    g.at(0, 0) = {1.0, 0.0};         // pure green
    g.at(1, 1) = {0.5, 0.25};        // RGB (64, 128, 0)
    const std::string path = (tmp.path / "g.ppm").string();
    render(g, path);

    std::ifstream is(path, std::ios::binary);
    std::string header;
    is >> header;
    REQUIRE(header == "P6");
    int w, h, maxval;
    is >> w >> h >> maxval;
    is.get();  // single whitespace after header
    REQUIRE(w == 2);
    REQUIRE(h == 2);
    std::vector<unsigned char> px(12);
    is.read(reinterpret_cast<char*>(px.data()), 12);
    // row 0 = i=1 (forward up), col 0 = j=1 (+y left)
    CHECK(px[0] == 64);   // (1,1) red
    CHECK(px[1] == 128);  // (1,1) green
    CHECK(px[2] == 0);
    // row 1 col 1 = cell (0,0): pure green
    CHECK(px[9] == 0);
    CHECK(px[10] == 255);

    // vacuous grid renders all black
    const EvidentialGrid vac(geom);
    render(vac, path);
    std::ifstream is2(path, std::ios::binary);
    std::string all((std::istreambuf_iterator<char>(is2)), std::istreambuf_iterator<char>());
    for (size_t k = all.size() - 12; k < all.size(); ++k) CHECK(all[k] == 0);
}

TEST_CASE("dataset write/load with split partition") {
    TempDir tmp;
    WorldConfig cfg;
    cfg.geometry = {32, 24, 0.5};
    cfg.sensor.ray_count = 180;
    cfg.sensor.max_range = 10.0;
    cfg.overlap_max_distance = 8.0;
    write_dataset(tmp.path.string(), cfg, 10, 11);

    const DatasetManifest m = load_manifest(tmp.path.string());
    CHECK(m.geometry == cfg.geometry);
    CHECK(m.samples.size() == 20);
    CHECK(m.noise_configs.at('D').r == 5.0);
    CHECK(m.noise_configs.at('D').alpha == 20.0);
    CHECK(m.noise_configs.at('A').r == 0.0);

    // every sample is in exactly one split; scenarios never straddle splits
    std::map<int32_t, Split> scenario_split;
    int n_train = 0, n_val = 0, n_test = 0;
    for (const SampleEntry& e : m.samples) {
        if (e.split == Split::Train) ++n_train;
        if (e.split == Split::Val) ++n_val;
        if (e.split == Split::Test) ++n_test;
        auto it = scenario_split.find(e.scenario_index);
        if (it == scenario_split.end())
            scenario_split[e.scenario_index] = e.split;
        else
            CHECK(it->second == e.split);
    }
    CHECK(n_train == 16);
    CHECK(n_val == 2);
    CHECK(n_test == 2);

    // samples load back with matching label geometry
    const SamplePair pair = load_sample(tmp.path.string(), m.samples[0]);
    CHECK(pair.label.geometry() == cfg.geometry);
    CHECK(pair.g1.geometry() == cfg.geometry);

    DiskSource train_set(tmp.path.string(), m, Split::Train);
    CHECK(train_set.size() == 16);
    const SamplePair first = train_set.get(0);
    CHECK(first.label.cells().size() == pair.label.cells().size());
}

TEST_CASE("world config round trip") {
    TempDir tmp;
    WorldConfig cfg;
    cfg.templates = {TemplateId::Crossroad};
    cfg.geometry = {64, 48, 0.25};
    cfg.sensor.ray_count = 100;
    cfg.sensor.m_free = 0.6;
    cfg.road_width = 10.0;
    cfg.overlap_max_distance = 25.0;
    const std::string path = (tmp.path / "world.json").string();
    save_world_config(cfg, path);
    const WorldConfig back = load_world_config(path);
    CHECK(back.templates == cfg.templates);
    CHECK(back.geometry == cfg.geometry);
    CHECK(back.sensor.ray_count == 100);
    CHECK(back.sensor.m_free == 0.6);
    CHECK(back.road_width == 10.0);
    CHECK(back.overlap_max_distance == 25.0);
}
