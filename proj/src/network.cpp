#include "ivis/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ivis/error.hpp"

namespace ivis {

std::string_view to_string(Objective objective) noexcept
{
    return objective == Objective::softmax_confidence ? "softmax_confidence" : "logit";
}

Objective parse_objective(std::string_view text)
{
    if (text == "softmax_confidence" || text == "confidence") {
        return Objective::softmax_confidence;
    }
    if (text == "logit") {
        return Objective::logit;
    }
    throw ArgumentError("unknown objective '" + std::string(text) + "'");
}

std::vector<double> softmax(std::span<const double> logits)
{
    std::vector<double> out(logits.size());
    if (logits.empty()) {
        return out;
    }
    const double peak = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - peak);
        total += out[i];
    }
    for (double& v : out) {
        v /= total;
    }
    return out;
}

std::vector<std::size_t> rank_classes(std::span<const double> confidences)
{
    std::vector<std::size_t> order(confidences.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return confidences[a] > confidences[b]; });
    return order;
}

namespace {

/// Output columns [first, last) whose input column ox*stride + k - pad is in range.
struct ColumnRange {
    std::size_t first = 0;
    std::size_t last = 0;
};

ColumnRange valid_outputs(std::size_t k, std::size_t pad, std::size_t stride, std::size_t in_len,
                          std::size_t out_len)
{
    // ox*stride + k >= pad  and  ox*stride + k < in_len + pad
    std::size_t first = 0;
    if (k < pad) {
        first = (pad - k + stride - 1) / stride;
    }
    std::size_t last = 0;
    if (in_len + pad > k) {
        last = (in_len + pad - k - 1) / stride + 1;
    }
    last = std::min(last, out_len);
    if (first > last) {
        first = last;
    }
    return {first, last};
}

void conv2d_forward(const LayerSpec& layer, const Tensor& in, Tensor& out)
{
    const auto in_ch = in.dim(0), in_h = in.dim(1), in_w = in.dim(2);
    const auto out_ch = out.dim(0), out_h = out.dim(1), out_w = out.dim(2);
    const auto kh = layer.weight.dim(2), kw = layer.weight.dim(3);
    const auto stride = layer.stride;
    const auto pad = layer.padding;
    const double* w = layer.weight.data();

    for (std::size_t o = 0; o < out_ch; ++o) {
        double* dst = out.data() + o * out_h * out_w;
        std::fill(dst, dst + out_h * out_w, layer.bias[o]);
        for (std::size_t c = 0; c < in_ch; ++c) {
            const double* src = in.data() + c * in_h * in_w;
            for (std::size_t ky = 0; ky < kh; ++ky) {
                const auto rows = valid_outputs(ky, pad, stride, in_h, out_h);
                for (std::size_t kx = 0; kx < kw; ++kx) {
                    const auto cols = valid_outputs(kx, pad, stride, in_w, out_w);
                    const double weight = w[((o * in_ch + c) * kh + ky) * kw + kx];
                    for (std::size_t oy = rows.first; oy < rows.last; ++oy) {
                        const double* src_row = src + (oy * stride + ky - pad) * in_w;
                        double* dst_row = dst + oy * out_w;
                        if (stride == 1) {
                            for (std::size_t ox = cols.first; ox < cols.last; ++ox) {
                                dst_row[ox] += weight * src_row[ox + kx - pad];
                            }
                        } else {
                            for (std::size_t ox = cols.first; ox < cols.last; ++ox) {
                                dst_row[ox] += weight * src_row[ox * stride + kx - pad];
                            }
                        }
                    }
                }
            }
        }
    }
}

void conv2d_backward(const LayerSpec& layer, const Tensor& in, const Tensor& grad_out, Tensor& grad_in,
                     LayerGradients* grads)
{
    const auto in_ch = in.dim(0), in_h = in.dim(1), in_w = in.dim(2);
    const auto out_ch = grad_out.dim(0), out_h = grad_out.dim(1), out_w = grad_out.dim(2);
    const auto kh = layer.weight.dim(2), kw = layer.weight.dim(3);
    const auto stride = layer.stride;
    const auto pad = layer.padding;
    const double* w = layer.weight.data();

    for (std::size_t o = 0; o < out_ch; ++o) {
        const double* g = grad_out.data() + o * out_h * out_w;
        if (grads != nullptr) {
            double sum = 0.0;
            for (std::size_t i = 0; i < out_h * out_w; ++i) {
                sum += g[i];
            }
            grads->bias[o] += sum;
        }
        for (std::size_t c = 0; c < in_ch; ++c) {
            const double* src = in.data() + c * in_h * in_w;
            double* gin = grad_in.data() + c * in_h * in_w;
            for (std::size_t ky = 0; ky < kh; ++ky) {
                const auto rows = valid_outputs(ky, pad, stride, in_h, out_h);
                for (std::size_t kx = 0; kx < kw; ++kx) {
                    const auto cols = valid_outputs(kx, pad, stride, in_w, out_w);
                    const std::size_t widx = ((o * in_ch + c) * kh + ky) * kw + kx;
                    const double weight = w[widx];
                    double wgrad = 0.0;
                    for (std::size_t oy = rows.first; oy < rows.last; ++oy) {
                        const std::size_t row = (oy * stride + ky - pad) * in_w;
                        const double* src_row = src + row;
                        double* gin_row = gin + row;
                        const double* g_row = g + oy * out_w;
                        for (std::size_t ox = cols.first; ox < cols.last; ++ox) {
                            const std::size_t ix = ox * stride + kx - pad;
                            gin_row[ix] += weight * g_row[ox];
                            wgrad += g_row[ox] * src_row[ix];
                        }
                    }
                    if (grads != nullptr) {
                        grads->weight[widx] += wgrad;
                    }
                }
            }
        }
    }
}

void maxpool_forward(const Tensor& in, Tensor& out, std::vector<std::size_t>& argmax)
{
    const auto ch = in.dim(0), in_h = in.dim(1), in_w = in.dim(2);
    const auto out_h = out.dim(1), out_w = out.dim(2);
    argmax.resize(out.size());
    for (std::size_t c = 0; c < ch; ++c) {
        for (std::size_t oy = 0; oy < out_h; ++oy) {
            for (std::size_t ox = 0; ox < out_w; ++ox) {
                std::size_t best = (c * in_h + 2 * oy) * in_w + 2 * ox;
                for (std::size_t dy = 0; dy < 2; ++dy) {
                    for (std::size_t dx = 0; dx < 2; ++dx) {
                        const std::size_t idx = (c * in_h + 2 * oy + dy) * in_w + 2 * ox + dx;
                        if (in[idx] > in[best]) {
                            best = idx;
                        }
                    }
                }
                const std::size_t o = (c * out_h + oy) * out_w + ox;
                out[o] = in[best];
                argmax[o] = best;
            }
        }
    }
}

void dense_forward(const LayerSpec& layer, const Tensor& in, Tensor& out)
{
    const auto out_dim = layer.weight.dim(0), in_dim = layer.weight.dim(1);
    for (std::size_t o = 0; o < out_dim; ++o) {
        const double* row = layer.weight.data() + o * in_dim;
        double sum = layer.bias[o];
        for (std::size_t i = 0; i < in_dim; ++i) {
            sum += row[i] * in[i];
        }
        out[o] = sum;
    }
}

}  // namespace

ForwardPass forward_pass(const Model& model, const Tensor& input)
{
    const auto shapes = validate_model(model);
    check_finite_parameters(model);
    if (input.shape() != model.input_shape) {
        throw ShapeError("input shape " + shape_string(input.shape()) + " does not match model input " +
                         shape_string(model.input_shape));
    }

    ForwardPass pass;
    pass.inputs.reserve(model.layers.size());
    pass.pool_argmax.resize(model.layers.size());
    Tensor current = input;
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const auto& layer = model.layers[i];
        Tensor next(shapes[i]);
        switch (layer.kind) {
        case LayerKind::conv2d:
            conv2d_forward(layer, current, next);
            break;
        case LayerKind::relu:
            for (std::size_t k = 0; k < current.size(); ++k) {
                next[k] = current[k] > 0.0 ? current[k] : 0.0;
            }
            break;
        case LayerKind::maxpool2x2:
            maxpool_forward(current, next, pass.pool_argmax[i]);
            break;
        case LayerKind::avgpool_global: {
            const auto plane = current.dim(1) * current.dim(2);
            for (std::size_t c = 0; c < current.dim(0); ++c) {
                double sum = 0.0;
                for (std::size_t k = 0; k < plane; ++k) {
                    sum += current[c * plane + k];
                }
                next[c] = sum / static_cast<double>(plane);
            }
            break;
        }
        case LayerKind::flatten:
            std::copy(current.values().begin(), current.values().end(), next.values().begin());
            break;
        case LayerKind::dense:
            dense_forward(layer, current, next);
            break;
        }
        pass.inputs.push_back(std::move(current));
        current = std::move(next);
    }
    if (!current.all_finite()) {
        throw NumericError("forward pass produced non-finite logits");
    }
    pass.output = std::move(current);
    return pass;
}

std::vector<LayerGradients> zero_gradients(const Model& model)
{
    std::vector<LayerGradients> grads(model.layers.size());
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (model.layers[i].has_parameters()) {
            grads[i].weight = Tensor(model.layers[i].weight.shape());
            grads[i].bias = Tensor(model.layers[i].bias.shape());
        }
    }
    return grads;
}

Tensor backward_pass(const Model& model, const ForwardPass& pass, const Tensor& grad_output,
                     std::vector<LayerGradients>* param_grads)
{
    if (grad_output.shape() != pass.output.shape()) {
        throw ShapeError("output gradient shape " + shape_string(grad_output.shape()) + " does not match " +
                         shape_string(pass.output.shape()));
    }
    Tensor grad = grad_output;
    for (std::size_t step = model.layers.size(); step-- > 0;) {
        const auto& layer = model.layers[step];
        const Tensor& in = pass.inputs[step];
        Tensor grad_in(in.shape());
        LayerGradients* layer_grads = param_grads != nullptr ? &(*param_grads)[step] : nullptr;
        switch (layer.kind) {
        case LayerKind::conv2d:
            conv2d_backward(layer, in, grad, grad_in, layer_grads);
            break;
        case LayerKind::relu:
            for (std::size_t k = 0; k < in.size(); ++k) {
                grad_in[k] = in[k] > 0.0 ? grad[k] : 0.0;
            }
            break;
        case LayerKind::maxpool2x2: {
            const auto& argmax = pass.pool_argmax[step];
            for (std::size_t k = 0; k < grad.size(); ++k) {
                grad_in[argmax[k]] += grad[k];
            }
            break;
        }
        case LayerKind::avgpool_global: {
            const auto plane = in.dim(1) * in.dim(2);
            for (std::size_t c = 0; c < in.dim(0); ++c) {
                const double share = grad[c] / static_cast<double>(plane);
                std::fill(grad_in.data() + c * plane, grad_in.data() + (c + 1) * plane, share);
            }
            break;
        }
        case LayerKind::flatten:
            std::copy(grad.values().begin(), grad.values().end(), grad_in.values().begin());
            break;
        case LayerKind::dense: {
            const auto out_dim = layer.weight.dim(0), in_dim = layer.weight.dim(1);
            for (std::size_t o = 0; o < out_dim; ++o) {
                const double g = grad[o];
                const double* row = layer.weight.data() + o * in_dim;
                for (std::size_t i = 0; i < in_dim; ++i) {
                    grad_in[i] += row[i] * g;
                }
                if (layer_grads != nullptr) {
                    double* wrow = layer_grads->weight.data() + o * in_dim;
                    for (std::size_t i = 0; i < in_dim; ++i) {
                        wrow[i] += g * in[i];
                    }
                    layer_grads->bias[o] += g;
                }
            }
            break;
        }
        }
        grad = std::move(grad_in);
    }
    return grad;
}

Prediction forward_normalized(const Model& model, const Tensor& input, std::size_t top_k)
{
    auto pass = forward_pass(model, input);
    Prediction prediction;
    prediction.logits.assign(pass.output.values().begin(), pass.output.values().end());
    prediction.confidences = softmax(prediction.logits);
    const auto order = rank_classes(prediction.confidences);
    const auto k = top_k == 0 ? order.size() : std::min(top_k, order.size());
    for (std::size_t i = 0; i < k; ++i) {
        prediction.top_k.push_back({order[i], model.class_names[order[i]], prediction.confidences[order[i]]});
    }
    return prediction;
}

Prediction forward(const Model& model, const ImageBuffer& image, std::size_t top_k)
{
    return forward_normalized(model, normalize_input(model, image), top_k);
}

Tensor normalized_input_gradient(const Model& model, const Tensor& input, std::size_t target_class,
                                 Objective objective)
{
    if (target_class >= model.num_classes()) {
        throw ArgumentError("class index " + std::to_string(target_class) + " out of range [0, " +
                            std::to_string(model.num_classes()) + ")");
    }
    const auto pass = forward_pass(model, input);
    Tensor seed(pass.output.shape());
    if (objective == Objective::logit) {
        seed[target_class] = 1.0;
    } else {
        // d p_t / d z_k = p_t (delta_tk - p_k)
        const auto p = softmax(pass.output.values());
        for (std::size_t k = 0; k < p.size(); ++k) {
            seed[k] = p[target_class] * ((k == target_class ? 1.0 : 0.0) - p[k]);
        }
    }
    return backward_pass(model, pass, seed);
}

Tensor input_gradient(const Model& model, const ImageBuffer& image, std::size_t target_class,
                      Objective objective)
{
    auto grad = normalized_input_gradient(model, normalize_input(model, image), target_class, objective);
    const double slope = pixel_norm_slope(model.pixel_norm);
    for (double& g : grad.values()) {
        g *= slope;
    }
    return grad;
}

}  // namespace ivis
