#include "gridfuse/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>

namespace gridfuse {

std::vector<LayerSpec> layer_specs(const NetConfig& cfg) {
    std::vector<LayerSpec> specs;
    int in_c = cfg.in_c;
    auto push = [&](int out_c, int stride, int dilation, bool up) {
        specs.push_back({in_c, out_c, stride, dilation, up, 0, 0});
        in_c = out_c;
    };
    for (int oc : cfg.down) push(oc, 2, 1, false);
    for (int oc : cfg.context) push(oc, 1, 2, false);
    for (int oc : cfg.up) push(oc, 1, 1, true);

    size_t off = 0;
    for (LayerSpec& l : specs) {
        l.w_off = off;
        off += l.weight_count();
        l.b_off = off;
        off += size_t(l.out_c);
    }
    return specs;
}

size_t param_count(const NetConfig& cfg) {
    const auto specs = layer_specs(cfg);
    const LayerSpec& last = specs.back();
    return last.b_off + size_t(last.out_c);
}

NetParams init_params(const NetConfig& cfg, uint64_t seed) {
    NetParams p{cfg, std::vector<double>(param_count(cfg))};
    std::mt19937_64 rng(seed);
    for (const LayerSpec& l : layer_specs(cfg)) {
        // He-style uniform bound for the all-ReLU stack: Var(w) = 2 / fan_in.
        const double bound = std::sqrt(6.0 / (l.in_c * 9));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (size_t k = 0; k < l.weight_count(); ++k) p.flat[l.w_off + k] = u(rng);
        // small positive biases keep units initially alive
        for (int k = 0; k < l.out_c; ++k) p.flat[l.b_off + size_t(k)] = 0.01;
    }
    return p;
}

namespace {

// Valid output range for one kernel tap so the inner loops stay branch-free:
// in = out*stride - pad + k*dilation must land in [0, n).
inline void tap_range(int n_in, int n_out, int stride, int pad, int kd, int& lo, int& hi) {
    lo = 0;
    while (lo < n_out && lo * stride - pad + kd < 0) ++lo;
    hi = n_out;
    while (hi > lo && (hi - 1) * stride - pad + kd >= n_in) --hi;
}

Tensor conv_forward(const Tensor& in, const LayerSpec& l, const double* flat) {
    const int s = l.stride, d = l.dilation;
    const int pad = (s == 2) ? 1 : d;
    const int oh = (s == 2) ? in.h / 2 : in.h;
    const int ow = (s == 2) ? in.w / 2 : in.w;
    Tensor out(l.out_c, oh, ow);

    const double* w = flat + l.w_off;
    const double* b = flat + l.b_off;
    for (int oc = 0; oc < l.out_c; ++oc) {
        double* op = out.plane(oc);
        std::fill(op, op + size_t(oh) * ow, b[oc]);
        for (int ic = 0; ic < l.in_c; ++ic) {
            const double* ip = in.plane(ic);
            const double* wk = w + (size_t(oc) * l.in_c + ic) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                int ylo, yhi;
                tap_range(in.h, oh, s, pad, ky * d, ylo, yhi);
                for (int kx = 0; kx < 3; ++kx) {
                    const double wv = wk[ky * 3 + kx];
                    if (wv == 0.0) continue;
                    int xlo, xhi;
                    tap_range(in.w, ow, s, pad, kx * d, xlo, xhi);
                    for (int oy = ylo; oy < yhi; ++oy) {
                        const double* irow = ip + size_t(oy * s - pad + ky * d) * in.w;
                        double* orow = op + size_t(oy) * ow;
                        const int xoff = -pad + kx * d;
                        if (s == 1) {
                            for (int ox = xlo; ox < xhi; ++ox)
                                orow[ox] += wv * irow[ox + xoff];
                        } else {
                            for (int ox = xlo; ox < xhi; ++ox)
                                orow[ox] += wv * irow[ox * 2 + xoff];
                        }
                    }
                }
            }
        }
    }
    return out;
}

void conv_backward(const Tensor& in, const LayerSpec& l, const double* flat,
                   const Tensor& d_out, Tensor& d_in, double* grad) {
    const int s = l.stride, d = l.dilation;
    const int pad = (s == 2) ? 1 : d;
    const int oh = d_out.h, ow = d_out.w;

    const double* w = flat + l.w_off;
    double* gw = grad + l.w_off;
    double* gb = grad + l.b_off;
    for (int oc = 0; oc < l.out_c; ++oc) {
        const double* dop = d_out.plane(oc);
        double acc_b = 0.0;
        for (size_t k = 0; k < size_t(oh) * ow; ++k) acc_b += dop[k];
        gb[oc] += acc_b;
        for (int ic = 0; ic < l.in_c; ++ic) {
            const double* ip = in.plane(ic);
            double* dip = d_in.plane(ic);
            const double* wk = w + (size_t(oc) * l.in_c + ic) * 9;
            double* gk = gw + (size_t(oc) * l.in_c + ic) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                int ylo, yhi;
                tap_range(in.h, oh, s, pad, ky * d, ylo, yhi);
                for (int kx = 0; kx < 3; ++kx) {
                    int xlo, xhi;
                    tap_range(in.w, ow, s, pad, kx * d, xlo, xhi);
                    const double wv = wk[ky * 3 + kx];
                    double acc_w = 0.0;
                    const int xoff = -pad + kx * d;
                    for (int oy = ylo; oy < yhi; ++oy) {
                        const size_t irow = size_t(oy * s - pad + ky * d) * in.w;
                        const double* dorow = dop + size_t(oy) * ow;
                        for (int ox = xlo; ox < xhi; ++ox) {
                            const size_t ii = irow + size_t(ox * s + xoff);
                            acc_w += ip[ii] * dorow[ox];
                            dip[ii] += wv * dorow[ox];
                        }
                    }
                    gk[ky * 3 + kx] += acc_w;
                }
            }
        }
    }
}

Tensor upsample2x(const Tensor& in) {
    Tensor out(in.c, in.h * 2, in.w * 2);
    for (int c = 0; c < in.c; ++c)
        for (int y = 0; y < out.h; ++y) {
            const double* irow = in.plane(c) + size_t(y / 2) * in.w;
            double* orow = out.plane(c) + size_t(y) * out.w;
            for (int x = 0; x < out.w; ++x) orow[x] = irow[x / 2];
        }
    return out;
}

Tensor upsample2x_backward(const Tensor& d_out) {
    Tensor d_in(d_out.c, d_out.h / 2, d_out.w / 2);
    for (int c = 0; c < d_out.c; ++c)
        for (int y = 0; y < d_out.h; ++y) {
            const double* drow = d_out.plane(c) + size_t(y) * d_out.w;
            double* irow = d_in.plane(c) + size_t(y / 2) * d_in.w;
            for (int x = 0; x < d_out.w; ++x) irow[x / 2] += drow[x];
        }
    return d_in;
}

}  // namespace

Tensor forward(const NetParams& params, const Tensor& x, ForwardCache* cache) {
    if (x.c != params.cfg.in_c) throw ShapeMismatch("input channel count");
    if (x.h % 8 != 0 || x.w % 8 != 0) throw ShapeMismatch("spatial dims must be divisible by 8");

    const auto specs = layer_specs(params.cfg);
    Tensor act = x;
    for (const LayerSpec& l : specs) {
        Tensor in = l.pre_upsample ? upsample2x(act) : std::move(act);
        Tensor pre = conv_forward(in, l, params.flat.data());
        if (cache) {
            cache->inputs.push_back(std::move(in));
            cache->preacts.push_back(pre);
        }
        for (double& v : pre.v) v = v > 0.0 ? v : 0.0;  // ReLU, final layer included
        act = std::move(pre);
    }
    return act;
}

void backward(const NetParams& params, const ForwardCache& cache, const Tensor& d_out,
              std::vector<double>& grad) {
    const auto specs = layer_specs(params.cfg);
    Tensor d_act = d_out;
    for (int li = int(specs.size()) - 1; li >= 0; --li) {
        const LayerSpec& l = specs[size_t(li)];
        const Tensor& pre = cache.preacts[size_t(li)];
        // ReLU mask
        for (size_t k = 0; k < d_act.v.size(); ++k)
            if (pre.v[k] <= 0.0) d_act.v[k] = 0.0;
        const Tensor& in = cache.inputs[size_t(li)];
        Tensor d_in(in.c, in.h, in.w);
        conv_backward(in, l, params.flat.data(), d_act, d_in, grad.data());
        d_act = l.pre_upsample ? upsample2x_backward(d_in) : std::move(d_in);
    }
}

double evid_loss_cell(double e_f, double e_o, double y_f, double y_o) {
    const double strength = e_f + e_o + 2.0;
    const double p_f = (e_f + 1.0) / strength;
    const double p_o = (e_o + 1.0) / strength;
    const double var_scale = 1.0 / (strength + 1.0);
    return (y_f - p_f) * (y_f - p_f) + p_f * (1.0 - p_f) * var_scale +
           (y_o - p_o) * (y_o - p_o) + p_o * (1.0 - p_o) * var_scale;
}

double evid_loss(const Tensor& pred_e, const Tensor& label, const LossConfig& cfg,
                 Tensor* d_pred) {
    if (pred_e.c != 2 || !pred_e.same_shape(label)) throw ShapeMismatch("loss operands");
    const size_t n = size_t(pred_e.h) * pred_e.w;
    const double* ef = pred_e.plane(0);
    const double* eo = pred_e.plane(1);
    const double* yf = label.plane(0);
    const double* yo = label.plane(1);
    if (d_pred && !d_pred->same_shape(pred_e)) *d_pred = Tensor(2, pred_e.h, pred_e.w);
    double* df = d_pred ? d_pred->plane(0) : nullptr;
    double* dodata = d_pred ? d_pred->plane(1) : nullptr;

    double total = 0.0;
    const double inv_n = 1.0 / double(n);
    for (size_t k = 0; k < n; ++k) {
        const double strength = ef[k] + eo[k] + 2.0;
        const double a_f = ef[k] + 1.0, a_o = eo[k] + 1.0;
        const double p_f = a_f / strength, p_o = a_o / strength;
        const double vs = 1.0 / (strength + 1.0);
        const double cell = (yf[k] - p_f) * (yf[k] - p_f) + p_f * (1.0 - p_f) * vs +
                            (yo[k] - p_o) * (yo[k] - p_o) + p_o * (1.0 - p_o) * vs;
        const double w = yo[k] > cfg.occupied_threshold ? cfg.o_w : 1.0;
        total += w * cell;

        if (d_pred) {
            const double dl_dpf = -2.0 * (yf[k] - p_f) + (1.0 - 2.0 * p_f) * vs;
            const double dl_dpo = -2.0 * (yo[k] - p_o) + (1.0 - 2.0 * p_o) * vs;
            // variance terms also depend on S directly
            const double dl_ds = -(p_f * (1.0 - p_f) + p_o * (1.0 - p_o)) * vs * vs;
            const double s2 = strength * strength;
            // dp_A/de_B = (delta_AB * S - alpha_A) / S^2
            const double dpf_def = (strength - a_f) / s2;
            const double dpf_deo = -a_f / s2;
            const double dpo_def = -a_o / s2;
            const double dpo_deo = (strength - a_o) / s2;
            df[k] = w * inv_n * (dl_dpf * dpf_def + dl_dpo * dpo_def + dl_ds);
            dodata[k] = w * inv_n * (dl_dpf * dpf_deo + dl_dpo * dpo_deo + dl_ds);
        }
    }
    return total * inv_n;
}

double grad_check(const NetParams& params, const Tensor& x, const Tensor& label,
                  const LossConfig& cfg, int n_samples, uint64_t seed, double h) {
    ForwardCache cache;
    const Tensor pred = forward(params, x, &cache);
    Tensor d_pred;
    evid_loss(pred, label, cfg, &d_pred);
    std::vector<double> analytic(params.flat.size(), 0.0);
    backward(params, cache, d_pred, analytic);

    NetParams probe = params;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, params.flat.size() - 1);
    double max_rel = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        const size_t k = pick(rng);
        const double orig = probe.flat[k];
        probe.flat[k] = orig + h;
        const double lp = evid_loss(forward(probe, x), label, cfg);
        probe.flat[k] = orig - h;
        const double lm = evid_loss(forward(probe, x), label, cfg);
        probe.flat[k] = orig;
        const double numeric = (lp - lm) / (2.0 * h);
        const double rel = std::abs(analytic[k] - numeric) /
                           std::max({std::abs(analytic[k]), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

// --- checkpoint io: magic "GFNP", version, tensor count, then per tensor
// (u32 ndims, u32 dims..., float32 payload), little-endian ---

namespace {

constexpr char kMagic[4] = {'G', 'F', 'N', 'P'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }

uint32_t read_u32(std::istream& is) {
    uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    if (!is) throw TruncatedFile{};
    return v;
}

void write_tensor(std::ostream& os, const std::vector<uint32_t>& dims, const double* data) {
    write_u32(os, uint32_t(dims.size()));
    size_t n = 1;
    for (uint32_t d : dims) {
        write_u32(os, d);
        n *= d;
    }
    std::vector<float> buf(n);
    for (size_t k = 0; k < n; ++k) buf[k] = float(data[k]);
    os.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(n * 4));
}

std::vector<float> read_tensor(std::istream& is, std::vector<uint32_t>& dims) {
    const uint32_t ndims = read_u32(is);
    if (ndims > 8) throw IoError("implausible tensor rank");
    dims.resize(ndims);
    size_t n = 1;
    for (uint32_t& d : dims) {
        d = read_u32(is);
        n *= d;
    }
    std::vector<float> buf(n);
    is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(n * 4));
    if (!is) throw TruncatedFile{};
    return buf;
}

}  // namespace

void save_params(const NetParams& params, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    const auto specs = layer_specs(params.cfg);
    write_u32(os, uint32_t(specs.size() * 2));
    for (const LayerSpec& l : specs) {
        write_tensor(os, {uint32_t(l.out_c), uint32_t(l.in_c), 3, 3},
                     params.flat.data() + l.w_off);
        write_tensor(os, {uint32_t(l.out_c)}, params.flat.data() + l.b_off);
    }
    if (!os) throw IoError("write failed: " + path);
}

NetParams load_params(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw BadMagic{};
    if (read_u32(is) != kVersion) throw VersionMismatch{};
    const uint32_t n_tensors = read_u32(is);
    if (n_tensors != 16) throw IoError("unexpected checkpoint layer count");

    std::vector<std::vector<uint32_t>> dims(n_tensors);
    std::vector<std::vector<float>> payload(n_tensors);
    for (uint32_t t = 0; t < n_tensors; ++t) payload[t] = read_tensor(is, dims[t]);

    // channel widths are recovered from the kernel shapes
    NetConfig cfg;
    cfg.in_c = int(dims[0][1]);
    cfg.down = {int(dims[0][0]), int(dims[2][0]), int(dims[4][0])};
    cfg.context = {int(dims[6][0]), int(dims[8][0])};
    cfg.up = {int(dims[10][0]), int(dims[12][0]), int(dims[14][0])};

    NetParams p{cfg, std::vector<double>(param_count(cfg))};
    const auto specs = layer_specs(cfg);
    for (size_t li = 0; li < specs.size(); ++li) {
        const auto& wv = payload[li * 2];
        const auto& bv = payload[li * 2 + 1];
        if (wv.size() != specs[li].weight_count() || bv.size() != size_t(specs[li].out_c))
            throw IoError("checkpoint shape mismatch");
        std::copy(wv.begin(), wv.end(), p.flat.begin() + std::ptrdiff_t(specs[li].w_off));
        std::copy(bv.begin(), bv.end(), p.flat.begin() + std::ptrdiff_t(specs[li].b_off));
    }
    return p;
}

}  // namespace gridfuse
