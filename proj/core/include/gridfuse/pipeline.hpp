#pragma once

#include <random>
#include <utility>

#include "gridfuse/simworld.hpp"
#include "gridfuse/tensor.hpp"

namespace gridfuse {

/// Network input: channels [g1.m_f, g1.m_o, g2_aligned.m_f, g2_aligned.m_o].
struct NetInput {
    Tensor t;  // (4, n_x, n_y)
};

/// Label as mass planes (y_f, y_o), matching the loss layout.
Tensor label_to_tensor(const EvidentialGrid& label);

/// Perturbs both poses, resamples g2 into g1's frame with the noisy relative
/// transform, and stacks the four mass channels. The label keeps exact poses.
std::pair<NetInput, Tensor> prealign(const SamplePair& pair, const NoiseSpec& spec,
                                     std::mt19937_64& rng);

/// Random horizontal/vertical flips (p = 0.5 each) and a rotation uniform in
/// [-20, 20] degrees about the grid center, applied identically to the input
/// channels and the label.
void augment(NetInput& input, Tensor& label, std::mt19937_64& rng);

/// Same-offset spatial crop of input and label; grid dims must cover the crop.
void crop(NetInput& input, Tensor& label, int size, std::mt19937_64& rng);

/// Evidence planes back to a grid of belief masses.
EvidentialGrid evidence_to_grid(const Tensor& evidence, const GridGeometry& geom);

}  // namespace gridfuse
