#pragma once

#include <cstdint>
#include <vector>

#include "gridfuse/errors.hpp"

namespace gridfuse {

/// Dense CHW tensor of doubles. h follows the grid's x (forward) axis,
/// w the y (lateral) axis.
struct Tensor {
    int c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(size_t(c_) * h_ * w_, 0.0) {}

    double& at(int ch, int y, int x) { return v[(size_t(ch) * h + y) * w + x]; }
    double at(int ch, int y, int x) const { return v[(size_t(ch) * h + y) * w + x]; }
    double* plane(int ch) { return v.data() + size_t(ch) * h * w; }
    const double* plane(int ch) const { return v.data() + size_t(ch) * h * w; }
    size_t size() const { return v.size(); }

    bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }
};

}  // namespace gridfuse
