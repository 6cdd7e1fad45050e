#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gridfuse/tensor.hpp"

namespace gridfuse {

/// Fully convolutional evidence predictor: three stride-2 downsampling convs,
/// two dilation-2 context convs, three nearest-neighbor x2 upsampling stages.
/// Every activation is ReLU, including the final evidence head. All kernels
/// are 3x3. Input spatial dims must be divisible by 8.
struct NetConfig {
    int in_c = 4;
    std::array<int, 3> down = {16, 32, 64};
    std::array<int, 2> context = {64, 64};
    std::array<int, 3> up = {32, 16, 2};

    bool operator==(const NetConfig&) const = default;
};

struct LayerSpec {
    int in_c, out_c, stride, dilation;
    bool pre_upsample;  // nearest x2 before the conv
    size_t w_off, b_off;
    size_t weight_count() const { return size_t(out_c) * in_c * 9; }
};

std::vector<LayerSpec> layer_specs(const NetConfig& cfg);
size_t param_count(const NetConfig& cfg);

struct NetParams {
    NetConfig cfg;
    std::vector<double> flat;  // all kernels and biases, layer by layer
};

/// Kernels uniform in [-sqrt(1/fan_in), +sqrt(1/fan_in)], biases zero.
NetParams init_params(const NetConfig& cfg, uint64_t seed);

/// Forward activations kept for the backward pass.
struct ForwardCache {
    std::vector<Tensor> inputs;   // conv input per layer (post-upsample)
    std::vector<Tensor> preacts;  // conv output before ReLU
};

Tensor forward(const NetParams& params, const Tensor& x, ForwardCache* cache = nullptr);

/// Backprop from d(loss)/d(evidence map) to parameter gradients.
/// `grad` must have param_count entries; gradients are accumulated into it.
void backward(const NetParams& params, const ForwardCache& cache, const Tensor& d_out,
              std::vector<double>& grad);

// --- evidential loss (evidence -> Dirichlet -> expected Brier + variance) ---

struct LossConfig {
    double o_w = 3.0;  // occupied-cell weight, >= 1
    double occupied_threshold = 0.5;
};

/// Mean per-cell loss; label layout (y_f, y_o). When d_pred is non-null the
/// gradient w.r.t. the evidence planes is written there.
double evid_loss(const Tensor& pred_e, const Tensor& label, const LossConfig& cfg,
                 Tensor* d_pred = nullptr);

/// Closed-form single-cell loss, exposed for oracle tests.
double evid_loss_cell(double e_f, double e_o, double y_f, double y_o);

/// Max relative error between analytic and central finite-difference
/// gradients over `n_samples` randomly chosen parameters.
double grad_check(const NetParams& params, const Tensor& x, const Tensor& label,
                  const LossConfig& cfg, int n_samples = 200, uint64_t seed = 1,
                  double h = 1e-4);

// --- checkpoint io ---

void save_params(const NetParams& params, const std::string& path);
NetParams load_params(const std::string& path);

}  // namespace gridfuse
