#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ivis/image.hpp"
#include "ivis/tensor.hpp"

namespace ivis {

/// How display values in [0, 255] are mapped onto network inputs.
enum class PixelNorm {
    unit_01,    // v / 255
    signed_11,  // v / 127.5 - 1
};

[[nodiscard]] std::string_view to_string(PixelNorm norm) noexcept;
[[nodiscard]] PixelNorm parse_pixel_norm(std::string_view text);

/// d(normalized) / d(display) for the given convention.
[[nodiscard]] double pixel_norm_slope(PixelNorm norm) noexcept;
[[nodiscard]] double normalize_pixel(PixelNorm norm, double display) noexcept;
/// Display value whose normalized value is exactly zero (0 or 127.5).
[[nodiscard]] double zero_display_value(PixelNorm norm) noexcept;

enum class LayerKind { conv2d, relu, maxpool2x2, avgpool_global, flatten, dense };

[[nodiscard]] std::string_view to_string(LayerKind kind) noexcept;

struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    std::size_t stride = 1;   // conv2d only
    std::size_t padding = 0;  // conv2d only, zero padding
    Tensor weight;            // conv2d: (out, in, kh, kw); dense: (out, in)
    Tensor bias;              // (out)

    [[nodiscard]] static LayerSpec conv2d(Tensor weight, Tensor bias, std::size_t stride = 1,
                                          std::size_t padding = 0);
    [[nodiscard]] static LayerSpec dense(Tensor weight, Tensor bias);
    [[nodiscard]] static LayerSpec relu() { return of_kind(LayerKind::relu); }
    [[nodiscard]] static LayerSpec maxpool2x2() { return of_kind(LayerKind::maxpool2x2); }
    [[nodiscard]] static LayerSpec avgpool_global() { return of_kind(LayerKind::avgpool_global); }
    [[nodiscard]] static LayerSpec flatten() { return of_kind(LayerKind::flatten); }

    [[nodiscard]] static LayerSpec of_kind(LayerKind kind)
    {
        LayerSpec layer;
        layer.kind = kind;
        return layer;
    }

    [[nodiscard]] bool has_parameters() const noexcept
    {
        return kind == LayerKind::conv2d || kind == LayerKind::dense;
    }

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct Model {
    std::vector<LayerSpec> layers;
    Shape input_shape;  // (3, H, W)
    std::vector<std::string> class_names;
    PixelNorm pixel_norm = PixelNorm::unit_01;

    [[nodiscard]] std::size_t num_classes() const noexcept { return class_names.size(); }
    [[nodiscard]] std::size_t image_height() const { return input_shape.at(1); }
    [[nodiscard]] std::size_t image_width() const { return input_shape.at(2); }

    friend bool operator==(const Model&, const Model&) = default;
};

/// Output shape of one layer; throws ShapeError naming the layer index.
[[nodiscard]] Shape layer_output_shape(const LayerSpec& layer, const Shape& input, std::size_t index);

/// Checks the shape chain and the class count; returns every layer's output shape.
[[nodiscard]] std::vector<Shape> validate_model(const Model& model);

/// Throws NumericError if any weight or bias is NaN/Inf.
void check_finite_parameters(const Model& model);

/// Model input tensor (3, H, W) for a display-unit image.
[[nodiscard]] Tensor normalize_input(const Model& model, const ImageBuffer& image);

}  // namespace ivis
