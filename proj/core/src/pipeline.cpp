#include "gridfuse/pipeline.hpp"

#include <cmath>

namespace gridfuse {

namespace {

void grid_to_planes(const EvidentialGrid& g, Tensor& t, int ch0) {
    const GridGeometry& geom = g.geometry();
    for (int32_t i = 0; i < geom.n_x; ++i)
        for (int32_t j = 0; j < geom.n_y; ++j) {
            const MassCell& c = g.at(i, j);
            t.at(ch0, i, j) = c.m_f;
            t.at(ch0 + 1, i, j) = c.m_o;
        }
}

EvidentialGrid planes_to_grid(const Tensor& t, int ch0, const GridGeometry& geom) {
    EvidentialGrid g(geom);
    for (int32_t i = 0; i < geom.n_x; ++i)
        for (int32_t j = 0; j < geom.n_y; ++j)
            g.at(i, j) = {t.at(ch0, i, j), t.at(ch0 + 1, i, j)};
    return g;
}

void flip_h(Tensor& t) {  // mirror the lateral axis
    for (int c = 0; c < t.c; ++c)
        for (int y = 0; y < t.h; ++y)
            for (int x = 0; x < t.w / 2; ++x)
                std::swap(t.at(c, y, x), t.at(c, y, t.w - 1 - x));
}

void flip_v(Tensor& t) {  // mirror the forward axis
    for (int c = 0; c < t.c; ++c)
        for (int y = 0; y < t.h / 2; ++y)
            for (int x = 0; x < t.w; ++x)
                std::swap(t.at(c, y, x), t.at(c, t.h - 1 - y, x));
}

void rotate_pairs(Tensor& t, double angle, const GridGeometry& geom) {
    const Transform2 rot = Transform2::rotation(angle);
    Tensor out(t.c, t.h, t.w);
    for (int ch0 = 0; ch0 + 1 < t.c; ch0 += 2) {
        const EvidentialGrid rotated = resample(planes_to_grid(t, ch0, geom), rot);
        for (int32_t i = 0; i < geom.n_x; ++i)
            for (int32_t j = 0; j < geom.n_y; ++j) {
                out.at(ch0, i, j) = rotated.at(i, j).m_f;
                out.at(ch0 + 1, i, j) = rotated.at(i, j).m_o;
            }
    }
    t = std::move(out);
}

}  // namespace

Tensor label_to_tensor(const EvidentialGrid& label) {
    Tensor t(2, label.geometry().n_x, label.geometry().n_y);
    grid_to_planes(label, t, 0);
    return t;
}

std::pair<NetInput, Tensor> prealign(const SamplePair& pair, const NoiseSpec& spec,
                                     std::mt19937_64& rng) {
    const Pose2 noisy1 = perturb_pose(pair.pose1, spec, rng);
    const Pose2 noisy2 = perturb_pose(pair.pose2, spec, rng);
    const EvidentialGrid g2_aligned = resample(pair.g2, relative_transform(noisy1, noisy2));

    const GridGeometry& geom = pair.g1.geometry();
    NetInput input;
    input.t = Tensor(4, geom.n_x, geom.n_y);
    grid_to_planes(pair.g1, input.t, 0);
    grid_to_planes(g2_aligned, input.t, 2);
    return {std::move(input), label_to_tensor(pair.label)};
}

void augment(NetInput& input, Tensor& label, std::mt19937_64& rng) {
    const bool do_h = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.5;
    const bool do_v = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.5;
    const double angle =
        std::uniform_real_distribution<double>(-20.0, 20.0)(rng) * M_PI / 180.0;

    if (do_h) {
        flip_h(input.t);
        flip_h(label);
    }
    if (do_v) {
        flip_v(input.t);
        flip_v(label);
    }
    if (angle != 0.0) {
        GridGeometry geom{input.t.h, input.t.w, 0.32};
        rotate_pairs(input.t, angle, geom);
        rotate_pairs(label, angle, geom);
    }
}

void crop(NetInput& input, Tensor& label, int size, std::mt19937_64& rng) {
    if (input.t.h <= size && input.t.w <= size) return;
    const int ch = std::min(size, input.t.h);
    const int cw = std::min(size, input.t.w);
    const int oy = std::uniform_int_distribution<int>(0, input.t.h - ch)(rng);
    const int ox = std::uniform_int_distribution<int>(0, input.t.w - cw)(rng);

    auto do_crop = [&](const Tensor& t) {
        Tensor out(t.c, ch, cw);
        for (int c = 0; c < t.c; ++c)
            for (int y = 0; y < ch; ++y)
                for (int x = 0; x < cw; ++x)
                    out.at(c, y, x) = t.at(c, oy + y, ox + x);
        return out;
    };
    input.t = do_crop(input.t);
    label = do_crop(label);
}

EvidentialGrid evidence_to_grid(const Tensor& evidence, const GridGeometry& geom) {
    if (evidence.c != 2 || evidence.h != geom.n_x || evidence.w != geom.n_y)
        throw ShapeMismatch("evidence planes vs grid geometry");
    EvidentialGrid g(geom);
    for (int32_t i = 0; i < geom.n_x; ++i)
        for (int32_t j = 0; j < geom.n_y; ++j) {
            const MassWithU m = evidence_to_mass({evidence.at(0, i, j), evidence.at(1, i, j)});
            g.at(i, j) = m.cell;
        }
    return g;
}

}  // namespace gridfuse
