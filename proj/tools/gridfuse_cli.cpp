#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridfuse/dataset.hpp"
#include "gridfuse/grid_io.hpp"
#include "gridfuse/metrics.hpp"
#include "gridfuse/net.hpp"
#include "gridfuse/pipeline.hpp"
#include "gridfuse/train.hpp"

using namespace gridfuse;
using nlohmann::json;

namespace {

uint64_t sample_noise_seed(uint64_t seed, const SampleEntry& e) {
    return derive_seed(seed, uint64_t(e.scenario_index) * 2 + uint64_t(e.perspective));
}

std::vector<SampleEntry> select_split(const DatasetManifest& m, const std::string& split) {
    std::vector<SampleEntry> out;
    for (const SampleEntry& e : m.samples)
        if (split == "all" || to_string(e.split) == split) out.push_back(e);
    return out;
}

EvalRecord make_record(const SampleEntry& e, char config, const std::string& method,
                       const EvidentialGrid& pred, const EvidentialGrid& label) {
    EvalRecord r;
    r.sample_id = e.dir;
    r.config = config;
    r.method = method;
    r.kld = kld_score(pred, label);
    r.scores = classification_scores(pred, label);
    return r;
}

int cmd_generate(const std::string& templates_file, int count, uint64_t seed,
                 const std::string& out_dir) {
    WorldConfig cfg;
    if (!templates_file.empty()) cfg = load_world_config(templates_file);
    write_dataset(out_dir, cfg, count, seed);
    std::cout << "wrote " << count * 2 << " samples to " << out_dir << "\n";
    return 0;
}

int cmd_fuse_baseline(const std::string& dataset, char config, uint64_t seed,
                      const std::string& split, const std::string& out_csv) {
    const DatasetManifest manifest = load_manifest(dataset);
    const NoiseSpec noise = manifest.noise_configs.at(config);
    std::vector<EvalRecord> records;
    for (const SampleEntry& e : select_split(manifest, split)) {
        const SamplePair pair = load_sample(dataset, e);
        std::mt19937_64 rng(sample_noise_seed(seed, e));
        const Pose2 noisy1 = perturb_pose(pair.pose1, noise, rng);
        const Pose2 noisy2 = perturb_pose(pair.pose2, noise, rng);
        const FusionReport report = fuse_baseline(pair.g1, noisy1, pair.g2, noisy2);
        records.push_back(make_record(e, config, "baseline", report.fused, pair.label));
    }
    write_eval_csv(records, out_csv);
    std::cout << "wrote " << records.size() << " records to " << out_csv << "\n";
    return 0;
}

TrainConfig load_train_config(const std::string& path, LossConfig& loss_cfg) {
    TrainConfig tc;
    if (path.empty()) return tc;
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    json j;
    is >> j;
    tc.initial_lr = j.value("initial_lr", tc.initial_lr);
    tc.decay_factor = j.value("decay_factor", tc.decay_factor);
    tc.plateau_patience = j.value("plateau_patience", tc.plateau_patience);
    tc.max_epochs = j.value("max_epochs", tc.max_epochs);
    tc.batch_size = j.value("batch_size", tc.batch_size);
    tc.crop_size = j.value("crop_size", tc.crop_size);
    tc.augment = j.value("augment", tc.augment);
    tc.rng_seed = j.value("seed", tc.rng_seed);
    loss_cfg.o_w = j.value("o_w", loss_cfg.o_w);
    return tc;
}

int cmd_train(const std::string& dataset, char config, const std::string& train_cfg,
              const std::string& out_ckpt, const std::string& log_csv, uint64_t seed) {
    const DatasetManifest manifest = load_manifest(dataset);
    const NoiseSpec noise = manifest.noise_configs.at(config);
    LossConfig lc;
    TrainConfig tc = load_train_config(train_cfg, lc);
    tc.rng_seed = seed;

    DiskSource train_set(dataset, manifest, Split::Train);
    DiskSource val_set(dataset, manifest, Split::Val);
    const TrainResult result = train(train_set, val_set, tc, lc, noise);
    save_params(result.best_params, out_ckpt);
    if (!log_csv.empty()) write_training_log(result.log, log_csv);
    std::cout << "trained " << result.log.size() << " epochs; initial train loss "
              << result.initial_train_loss << ", best val loss ";
    double best = std::numeric_limits<double>::infinity();
    for (const EpochLog& e : result.log) best = std::min(best, e.val_loss);
    std::cout << best << "\n";
    return 0;
}

int cmd_eval(const std::string& dataset, const std::string& ckpt, char config, uint64_t seed,
             const std::string& split, const std::string& out_csv) {
    const DatasetManifest manifest = load_manifest(dataset);
    const NoiseSpec noise = manifest.noise_configs.at(config);
    const NetParams params = load_params(ckpt);
    std::vector<EvalRecord> records;
    for (const SampleEntry& e : select_split(manifest, split)) {
        const SamplePair pair = load_sample(dataset, e);
        std::mt19937_64 rng(sample_noise_seed(seed, e));
        auto [input, label_t] = prealign(pair, noise, rng);
        const Tensor evidence = forward(params, input.t);
        const EvidentialGrid pred = evidence_to_grid(evidence, manifest.geometry);
        records.push_back(make_record(e, config, "ours", pred, pair.label));
    }
    write_eval_csv(records, out_csv);
    std::cout << "wrote " << records.size() << " records to " << out_csv << "\n";
    return 0;
}

int cmd_aggregate(const std::vector<std::string>& inputs, const std::string& out_csv) {
    std::vector<EvalRecord> all;
    for (const std::string& path : inputs) {
        std::vector<EvalRecord> r = read_eval_csv(path);
        all.insert(all.end(), r.begin(), r.end());
    }
    write_summary_csv(aggregate(all), out_csv);
    std::cout << "wrote summary to " << out_csv << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evidential occupancy grid registration, fusion, and evaluation"};
    app.require_subcommand(1);

    std::string templates_file, dataset, out_path, split = "test";
    std::string checkpoint, train_cfg, log_csv, grid_file;
    std::vector<std::string> inputs;
    std::string config = "A";
    int count = 1;
    uint64_t seed = 0;

    auto* gen = app.add_subcommand("generate", "Generate a synthetic dataset");
    gen->add_option("--templates", templates_file, "Scenario template config (JSON)");
    gen->add_option("--count", count, "Number of scenes (two samples each)")->required();
    gen->add_option("--seed", seed, "RNG seed")->required();
    gen->add_option("--out", out_path, "Output dataset directory")->required();

    const std::vector<std::string> config_letters = {"A", "B", "C", "D"};
    auto* fuse = app.add_subcommand("fuse-baseline", "Rule-based fusion with noisy poses");
    fuse->add_option("--dataset", dataset)->required();
    fuse->add_option("--config", config)->check(CLI::IsMember(config_letters))->required();
    fuse->add_option("--seed", seed, "Noise RNG seed")->required();
    fuse->add_option("--split", split)->check(CLI::IsMember({"train", "val", "test", "all"}));
    fuse->add_option("--out", out_path, "eval.csv path")->required();

    auto* tr = app.add_subcommand("train", "Train the fusion network");
    tr->add_option("--dataset", dataset)->required();
    tr->add_option("--config", config)->check(CLI::IsMember(config_letters))->required();
    tr->add_option("--train-cfg", train_cfg, "Training config (JSON)");
    tr->add_option("--seed", seed, "RNG seed")->required();
    tr->add_option("--out", out_path, "Checkpoint path")->required();
    tr->add_option("--log", log_csv, "Training log CSV path");

    auto* ev = app.add_subcommand("eval", "Evaluate a trained network");
    ev->add_option("--dataset", dataset)->required();
    ev->add_option("--checkpoint", checkpoint)->required();
    ev->add_option("--config", config)->check(CLI::IsMember(config_letters))->required();
    ev->add_option("--seed", seed, "Noise RNG seed")->required();
    ev->add_option("--split", split)->check(CLI::IsMember({"train", "val", "test", "all"}));
    ev->add_option("--out", out_path, "eval.csv path")->required();

    auto* agg = app.add_subcommand("aggregate", "Aggregate eval CSVs into a summary");
    agg->add_option("--in", inputs, "Input eval.csv files")->required();
    agg->add_option("--out", out_path, "summary.csv path")->required();

    auto* ren = app.add_subcommand("render", "Render a grid file to PPM");
    ren->add_option("--grid", grid_file)->required();
    ren->add_option("--out", out_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_generate(templates_file, count, seed, out_path);
        if (fuse->parsed()) return cmd_fuse_baseline(dataset, config[0], seed, split, out_path);
        if (tr->parsed()) return cmd_train(dataset, config[0], train_cfg, out_path, log_csv, seed);
        if (ev->parsed()) return cmd_eval(dataset, checkpoint, config[0], seed, split, out_path);
        if (agg->parsed()) return cmd_aggregate(inputs, out_path);
        if (ren->parsed()) {
            render(load_grid(grid_file), out_path);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
