#include "gridfuse/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace gridfuse {

void AdamState::step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, double(t));
    const double bc2 = 1.0 - std::pow(beta2, double(t));
    for (size_t k = 0; k < params.size(); ++k) {
        m[k] = beta1 * m[k] + (1.0 - beta1) * grad[k];
        v[k] = beta2 * v[k] + (1.0 - beta2) * grad[k] * grad[k];
        const double mhat = m[k] / bc1;
        const double vhat = v[k] / bc2;
        params[k] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

bool PlateauScheduler::observe(double val_loss) {
    if (val_loss < best) {
        best = val_loss;
        stale = 0;
        return false;
    }
    if (++stale >= patience) {
        lr *= factor;
        ++decays;
        stale = 0;
        return true;
    }
    return false;
}

namespace {

struct Prepared {
    Tensor input;
    Tensor label;
};

Prepared prepare(const SamplePair& pair, const NoiseSpec& noise, const TrainConfig& tc,
                 uint64_t sample_seed, bool training) {
    std::mt19937_64 rng(sample_seed);
    auto [input, label] = prealign(pair, noise, rng);
    if (tc.crop_size > 0) {
        if (training) {
            crop(input, label, tc.crop_size, rng);
        } else {
            // deterministic center crop for comparable validation losses
            NetInput tmp = std::move(input);
            const int oy = std::max(0, (tmp.t.h - tc.crop_size) / 2);
            const int ox = std::max(0, (tmp.t.w - tc.crop_size) / 2);
            const int ch = std::min(tc.crop_size, tmp.t.h);
            const int cw = std::min(tc.crop_size, tmp.t.w);
            Tensor ci(tmp.t.c, ch, cw), cl(label.c, ch, cw);
            for (int c = 0; c < tmp.t.c; ++c)
                for (int y = 0; y < ch; ++y)
                    for (int x = 0; x < cw; ++x)
                        ci.at(c, y, x) = tmp.t.at(c, oy + y, ox + x);
            for (int c = 0; c < label.c; ++c)
                for (int y = 0; y < ch; ++y)
                    for (int x = 0; x < cw; ++x)
                        cl.at(c, y, x) = label.at(c, oy + y, ox + x);
            input.t = std::move(ci);
            label = std::move(cl);
        }
    }
    if (training && tc.augment) augment(input, label, rng);
    return {std::move(input.t), std::move(label)};
}

double eval_pass(const SampleSource& set, const NetParams& params, const TrainConfig& tc,
                 const LossConfig& lc, const NoiseSpec& noise, uint64_t seed_tag) {
    double total = 0.0;
    for (size_t k = 0; k < set.size(); ++k) {
        const Prepared p =
            prepare(set.get(k), noise, tc, derive_seed(seed_tag, k), /*training=*/false);
        total += evid_loss(forward(params, p.input), p.label, lc);
    }
    return total / double(set.size());
}

}  // namespace

TrainResult train(const SampleSource& train_set, const SampleSource& val_set,
                  const TrainConfig& tc, const LossConfig& lc, const NoiseSpec& noise) {
    if (train_set.size() == 0 || val_set.size() == 0) throw EmptyDataset{};

    NetParams params = init_params(tc.net, derive_seed(tc.rng_seed, 0xF00D));
    AdamState adam(params.flat.size());
    PlateauScheduler sched(tc.initial_lr, tc.decay_factor, tc.plateau_patience);

    const uint64_t val_tag = derive_seed(tc.rng_seed, 0x7A1);
    TrainResult result;
    result.initial_train_loss =
        eval_pass(train_set, params, tc, lc, noise, derive_seed(tc.rng_seed, 0x7A0));

    NetParams best = params;
    double best_val = std::numeric_limits<double>::infinity();

    std::vector<size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), size_t(0));
    std::vector<double> grad(params.flat.size());

    for (int epoch = 1; epoch <= tc.max_epochs; ++epoch) {
        std::mt19937_64 shuffle_rng(derive_seed(tc.rng_seed, 0x5E00 + uint64_t(epoch)));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double epoch_loss = 0.0;
        size_t done = 0;
        while (done < order.size()) {
            const size_t bs = std::min(size_t(tc.batch_size), order.size() - done);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (size_t b = 0; b < bs; ++b) {
                const size_t idx = order[done + b];
                const uint64_t seed =
                    derive_seed(tc.rng_seed, uint64_t(epoch) * 0x100000 + idx);
                const Prepared p = prepare(train_set.get(idx), noise, tc, seed, true);
                ForwardCache cache;
                const Tensor pred = forward(params, p.input, &cache);
                Tensor d_pred;
                epoch_loss += evid_loss(pred, p.label, lc, &d_pred);
                const double scale = 1.0 / double(bs);
                for (double& g : d_pred.v) g *= scale;
                backward(params, cache, d_pred, grad);
            }
            adam.step(params.flat, grad, sched.lr);
            done += bs;
        }
        epoch_loss /= double(order.size());

        const double val_loss = eval_pass(val_set, params, tc, lc, noise, val_tag);
        result.log.push_back({epoch, epoch_loss, val_loss, sched.lr});
        if (val_loss < best_val) {
            best_val = val_loss;
            best = params;
        }
        sched.observe(val_loss);
    }

    result.best_params = std::move(best);
    return result;
}

void write_training_log(const std::vector<EpochLog>& log, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "epoch,train_loss,val_loss,lr\n";
    char buf[128];
    for (const EpochLog& e : log) {
        std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g\n", e.epoch, e.train_loss,
                      e.val_loss, e.lr);
        os << buf;
    }
}

}  // namespace gridfuse
