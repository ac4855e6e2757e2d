#pragma once

// Shared fixtures and independent reference implementations for the tests.
// Nothing here calls into the library's numeric paths except where noted.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "ivis/entropy.hpp"
#include "ivis/image.hpp"
#include "ivis/model.hpp"
#include "ivis/rng.hpp"

namespace ivis::test {

inline ImageBuffer random_image(std::size_t size, std::uint64_t seed, bool integral = false)
{
    Xoshiro256 rng(seed);
    ImageBuffer image(size, size);
    for (double& v : image.values()) {
        v = integral ? static_cast<double>(rng.below(256)) : rng.uniform(0.0, 255.0);
    }
    return image;
}

inline Tensor random_tensor(Shape shape, Xoshiro256& rng, double bound)
{
    Tensor t(std::move(shape));
    for (double& v : t.values()) {
        v = rng.uniform(-bound, bound);
    }
    return t;
}

/// Small random conv net on (3, size, size). `variant` picks one of a few layouts.
inline Model random_model(std::uint64_t seed, std::size_t size = 8, std::size_t classes = 4)
{
    Xoshiro256 rng(seed);
    Model model;
    model.input_shape = {3, size, size};
    for (std::size_t i = 0; i < classes; ++i) {
        model.class_names.push_back("class" + std::to_string(i));
    }
    model.pixel_norm = rng.below(2) == 0 ? PixelNorm::unit_01 : PixelNorm::signed_11;
    const std::size_t ch1 = 2 + rng.below(3);
    const std::size_t k1 = 1 + 2 * rng.below(2);  // 1 or 3
    const std::size_t stride = 1 + rng.below(2);
    const std::size_t pad = k1 / 2;
    model.layers.push_back(LayerSpec::conv2d(random_tensor({ch1, 3, k1, k1}, rng, 0.8),
                                             random_tensor({ch1}, rng, 0.3), stride, pad));
    model.layers.push_back(LayerSpec::relu());
    Shape shape = layer_output_shape(model.layers[0], model.input_shape, 0);
    switch (rng.below(3)) {
    case 0: {
        model.layers.push_back(LayerSpec::maxpool2x2());
        shape = {shape[0], shape[1] / 2, shape[2] / 2};
        model.layers.push_back(LayerSpec::flatten());
        break;
    }
    case 1: {
        const std::size_t ch2 = 2 + rng.below(3);
        model.layers.push_back(
            LayerSpec::conv2d(random_tensor({ch2, ch1, 3, 3}, rng, 0.6), random_tensor({ch2}, rng, 0.3), 1, 1));
        model.layers.push_back(LayerSpec::relu());
        model.layers.push_back(LayerSpec::avgpool_global());
        shape = {ch2};
        break;
    }
    default:
        model.layers.push_back(LayerSpec::flatten());
        break;
    }
    const std::size_t flat = element_count(shape);
    model.layers.push_back(
        LayerSpec::dense(random_tensor({classes, flat}, rng, 1.0), random_tensor({classes}, rng, 0.5)));
    return model;
}

/// Direct evaluation of a model on a normalized input with plain nested loops.
/// `pattern` receives every relu sign and pool argmax, which identifies the
/// piecewise-linear region the input lies in.
inline std::vector<double> oracle_logits(const Model& model, const Tensor& input,
                                         std::vector<std::size_t>* pattern = nullptr)
{
    std::vector<double> x(input.values().begin(), input.values().end());
    std::vector<std::size_t> shape = input.shape();
    for (const auto& layer : model.layers) {
        switch (layer.kind) {
        case LayerKind::conv2d: {
            const long C = static_cast<long>(shape[0]), H = static_cast<long>(shape[1]), W = static_cast<long>(shape[2]);
            const long O = static_cast<long>(layer.weight.dim(0));
            const long KH = static_cast<long>(layer.weight.dim(2)), KW = static_cast<long>(layer.weight.dim(3));
            const long S = static_cast<long>(layer.stride), P = static_cast<long>(layer.padding);
            const long OH = (H + 2 * P - KH) / S + 1, OW = (W + 2 * P - KW) / S + 1;
            std::vector<double> y(static_cast<std::size_t>(O * OH * OW));
            for (long o = 0; o < O; ++o)
                for (long oy = 0; oy < OH; ++oy)
                    for (long ox = 0; ox < OW; ++ox) {
                        double acc = layer.bias[static_cast<std::size_t>(o)];
                        for (long c = 0; c < C; ++c)
                            for (long ky = 0; ky < KH; ++ky)
                                for (long kx = 0; kx < KW; ++kx) {
                                    const long iy = oy * S + ky - P, ix = ox * S + kx - P;
                                    if (iy < 0 || ix < 0 || iy >= H || ix >= W) continue;
                                    acc += layer.weight[static_cast<std::size_t>(((o * C + c) * KH + ky) * KW + kx)] *
                                           x[static_cast<std::size_t>((c * H + iy) * W + ix)];
                                }
                        y[static_cast<std::size_t>((o * OH + oy) * OW + ox)] = acc;
                    }
            x = std::move(y);
            shape = {static_cast<std::size_t>(O), static_cast<std::size_t>(OH), static_cast<std::size_t>(OW)};
            break;
        }
        case LayerKind::relu:
            for (double& v : x) {
                if (pattern) pattern->push_back(v > 0);
                v = v > 0 ? v : 0;
            }
            break;
        case LayerKind::maxpool2x2: {
            const std::size_t C = shape[0], H = shape[1], W = shape[2];
            std::vector<double> y(C * (H / 2) * (W / 2));
            for (std::size_t c = 0; c < C; ++c)
                for (std::size_t oy = 0; oy < H / 2; ++oy)
                    for (std::size_t ox = 0; ox < W / 2; ++ox) {
                        double m = -INFINITY;
                        std::size_t arg = 0;
                        for (std::size_t d = 0; d < 4; ++d) {
                            const double v = x[(c * H + 2 * oy + d / 2) * W + 2 * ox + d % 2];
                            if (v > m) {
                                m = v;
                                arg = d;
                            }
                        }
                        if (pattern) pattern->push_back(arg);
                        y[(c * (H / 2) + oy) * (W / 2) + ox] = m;
                    }
            x = std::move(y);
            shape = {C, H / 2, W / 2};
            break;
        }
        case LayerKind::avgpool_global: {
            const std::size_t C = shape[0], N = shape[1] * shape[2];
            std::vector<double> y(C, 0.0);
            for (std::size_t c = 0; c < C; ++c) {
                for (std::size_t k = 0; k < N; ++k) y[c] += x[c * N + k];
                y[c] /= static_cast<double>(N);
            }
            x = std::move(y);
            shape = {C};
            break;
        }
        case LayerKind::flatten:
            shape = {x.size()};
            break;
        case LayerKind::dense: {
            const std::size_t O = layer.weight.dim(0), I = layer.weight.dim(1);
            std::vector<double> y(O);
            for (std::size_t o = 0; o < O; ++o) {
                y[o] = layer.bias[o];
                for (std::size_t i = 0; i < I; ++i) y[o] += layer.weight[o * I + i] * x[i];
            }
            x = std::move(y);
            shape = {O};
            break;
        }
        }
    }
    return x;
}

/// True when no central-difference stencil of half-width h around `input`
/// leaves its piecewise-linear region, so finite differences are valid there.
inline bool stencil_is_smooth(const Model& model, const Tensor& input, double h)
{
    std::vector<std::size_t> base;
    (void)oracle_logits(model, input, &base);
    Tensor probe = input;
    for (std::size_t i = 0; i < input.size(); ++i) {
        for (double offset : {h, -h}) {
            probe[i] = input[i] + offset;
            std::vector<std::size_t> moved;
            (void)oracle_logits(model, probe, &moved);
            if (moved != base) return false;
        }
        probe[i] = input[i];
    }
    return true;
}

/// Softmax confidence of `target` (or its logit) from oracle logits. The
/// softmax runs in extended precision so that confidences near 1 keep the
/// digits a central difference needs.
inline long double oracle_objective(const Model& model, const Tensor& input, std::size_t target, bool logit)
{
    const auto z = oracle_logits(model, input);
    if (logit) {
        return z[target];
    }
    long double others = 0.0L;
    for (std::size_t k = 0; k < z.size(); ++k) {
        if (k != target) others += std::exp(static_cast<long double>(z[k]) - static_cast<long double>(z[target]));
    }
    return 1.0L / (1.0L + others);
}

/// Brute-force co-occurrence: j from a floating mean rounded with std::round.
inline std::vector<std::uint64_t> oracle_cooccurrence(const GrayImage& g)
{
    std::vector<std::uint64_t> counts(256 * 256, 0);
    const long H = static_cast<long>(g.height), W = static_cast<long>(g.width);
    auto at = [&](long y, long x) {
        y = y < 0 ? 0 : (y >= H ? H - 1 : y);
        x = x < 0 ? 0 : (x >= W ? W - 1 : x);
        return static_cast<double>(g.values[static_cast<std::size_t>(y * W + x)]);
    };
    for (long y = 0; y < H; ++y)
        for (long x = 0; x < W; ++x) {
            const double mean = (at(y - 1, x - 1) + at(y - 1, x) + at(y - 1, x + 1) + at(y, x - 1) + at(y, x + 1) +
                                 at(y + 1, x - 1) + at(y + 1, x) + at(y + 1, x + 1)) /
                                8.0;
            const auto j = static_cast<std::size_t>(std::round(mean));
            const auto i = static_cast<std::size_t>(at(y, x));
            ++counts[i * 256 + j];
        }
    return counts;
}

/// Entropy via natural logs and compensated summation.
inline double oracle_entropy(const std::vector<std::uint64_t>& counts)
{
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    double sum = 0.0, carry = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        const double term = -p * std::log(p) / std::log(2.0) - carry;
        const double next = sum + term;
        carry = (next - sum) - term;
        sum = next;
    }
    return sum;
}

}  // namespace ivis::test
