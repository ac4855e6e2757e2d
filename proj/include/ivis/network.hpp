#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ivis/image.hpp"
#include "ivis/model.hpp"
#include "ivis/tensor.hpp"

namespace ivis {

struct ClassScore {
    std::size_t index = 0;
    std::string name;
    double confidence = 0.0;

    friend bool operator==(const ClassScore&, const ClassScore&) = default;
};

struct Prediction {
    std::vector<double> logits;
    std::vector<double> confidences;
    std::vector<ClassScore> top_k;  // descending confidence, ties to smaller index

    friend bool operator==(const Prediction&, const Prediction&) = default;
};

enum class Objective { softmax_confidence, logit };

[[nodiscard]] std::string_view to_string(Objective objective) noexcept;
[[nodiscard]] Objective parse_objective(std::string_view text);

/// Numerically stable softmax.
[[nodiscard]] std::vector<double> softmax(std::span<const double> logits);

/// Class indices sorted by descending confidence, ties broken by smaller index.
[[nodiscard]] std::vector<std::size_t> rank_classes(std::span<const double> confidences);

/// Inference on a display-unit image. `top_k == 0` ranks every class.
[[nodiscard]] Prediction forward(const Model& model, const ImageBuffer& image, std::size_t top_k = 0);

/// Inference on an already normalized (3, H, W) input.
[[nodiscard]] Prediction forward_normalized(const Model& model, const Tensor& input,
                                            std::size_t top_k = 0);

/// d objective / d input in normalized units, shape (3, H, W).
[[nodiscard]] Tensor normalized_input_gradient(const Model& model, const Tensor& input,
                                               std::size_t target_class, Objective objective);

/// d objective / d input in display units, shape (3, H, W).
[[nodiscard]] Tensor input_gradient(const Model& model, const ImageBuffer& image,
                                    std::size_t target_class, Objective objective);

/// Cached activations of one forward pass; `inputs[i]` is what layer i consumed.
struct ForwardPass {
    std::vector<Tensor> inputs;
    std::vector<std::vector<std::size_t>> pool_argmax;  // per layer, empty unless maxpool
    Tensor output;
};

[[nodiscard]] ForwardPass forward_pass(const Model& model, const Tensor& input);

struct LayerGradients {
    Tensor weight;
    Tensor bias;
};

/// Zero-filled gradient buffers matching the model's parameters.
[[nodiscard]] std::vector<LayerGradients> zero_gradients(const Model& model);

/// Backpropagates `grad_output` (d loss / d logits) through the cached pass.
/// Parameter gradients are accumulated into `param_grads` when it is non-null.
/// Returns d loss / d input.
Tensor backward_pass(const Model& model, const ForwardPass& pass, const Tensor& grad_output,
                     std::vector<LayerGradients>* param_grads = nullptr);

}  // namespace ivis
