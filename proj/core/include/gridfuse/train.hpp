#pragma once

#include <cstdint>
#include <vector>

#include "gridfuse/net.hpp"
#include "gridfuse/pipeline.hpp"
#include "gridfuse/simworld.hpp"

namespace gridfuse {

struct TrainConfig {
    double initial_lr = 0.01;
    double decay_factor = 0.5;
    int plateau_patience = 10;
    int max_epochs = 200;
    int batch_size = 8;
    int crop_size = 64;   // 0 = train on full grids
    bool augment = true;
    uint64_t rng_seed = 0;
    NetConfig net;
};

struct AdamState {
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    int64_t t = 0;
    std::vector<double> m, v;

    explicit AdamState(size_t n) : m(n, 0.0), v(n, 0.0) {}
    void step(std::vector<double>& params, const std::vector<double>& grad, double lr);
};

/// Halves the learning rate whenever the validation loss has not improved
/// for `patience` consecutive epochs.
struct PlateauScheduler {
    double lr;
    double factor;
    int patience;
    double best = std::numeric_limits<double>::infinity();
    int stale = 0;
    int decays = 0;

    PlateauScheduler(double lr0, double f, int p) : lr(lr0), factor(f), patience(p) {}
    /// Returns true when this epoch triggered a decay.
    bool observe(double val_loss);
};

struct EpochLog {
    int epoch;
    double train_loss;
    double val_loss;
    double lr;
};

struct TrainResult {
    NetParams best_params;  // parameters with the best validation loss
    std::vector<EpochLog> log;
    double initial_train_loss = 0.0;  // before the first update
};

/// Abstract sample access so large datasets can stay on disk.
struct SampleSource {
    virtual ~SampleSource() = default;
    virtual size_t size() const = 0;
    virtual SamplePair get(size_t index) const = 0;
};

struct VectorSource final : SampleSource {
    std::vector<SamplePair> samples;
    size_t size() const override { return samples.size(); }
    SamplePair get(size_t index) const override { return samples[index]; }
};

TrainResult train(const SampleSource& train_set, const SampleSource& val_set,
                  const TrainConfig& tc, const LossConfig& lc, const NoiseSpec& noise);

void write_training_log(const std::vector<EpochLog>& log, const std::string& path);

}  // namespace gridfuse
