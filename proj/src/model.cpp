#include "ivis/model.hpp"

#include "ivis/error.hpp"

namespace ivis {

std::string_view to_string(PixelNorm norm) noexcept
{
    switch (norm) {
    case PixelNorm::unit_01:
        return "unit_01";
    case PixelNorm::signed_11:
        return "signed_11";
    }
    return "?";
}

PixelNorm parse_pixel_norm(std::string_view text)
{
    if (text == "unit_01") {
        return PixelNorm::unit_01;
    }
    if (text == "signed_11") {
        return PixelNorm::signed_11;
    }
    throw ArgumentError("unknown pixel_norm '" + std::string(text) + "'");
}

double pixel_norm_slope(PixelNorm norm) noexcept
{
    return norm == PixelNorm::unit_01 ? 1.0 / 255.0 : 1.0 / 127.5;
}

double normalize_pixel(PixelNorm norm, double display) noexcept
{
    return norm == PixelNorm::unit_01 ? display / 255.0 : display / 127.5 - 1.0;
}

double zero_display_value(PixelNorm norm) noexcept
{
    return norm == PixelNorm::unit_01 ? 0.0 : 127.5;
}

std::string_view to_string(LayerKind kind) noexcept
{
    switch (kind) {
    case LayerKind::conv2d:
        return "conv2d";
    case LayerKind::relu:
        return "relu";
    case LayerKind::maxpool2x2:
        return "maxpool2x2";
    case LayerKind::avgpool_global:
        return "avgpool_global";
    case LayerKind::flatten:
        return "flatten";
    case LayerKind::dense:
        return "dense";
    }
    return "?";
}

LayerSpec LayerSpec::conv2d(Tensor weight, Tensor bias, std::size_t stride, std::size_t padding)
{
    LayerSpec layer;
    layer.kind = LayerKind::conv2d;
    layer.weight = std::move(weight);
    layer.bias = std::move(bias);
    layer.stride = stride;
    layer.padding = padding;
    return layer;
}

LayerSpec LayerSpec::dense(Tensor weight, Tensor bias)
{
    LayerSpec layer;
    layer.kind = LayerKind::dense;
    layer.weight = std::move(weight);
    layer.bias = std::move(bias);
    return layer;
}

namespace {

[[noreturn]] void fail(std::size_t index, const LayerSpec& layer, const std::string& message)
{
    throw ShapeError("layer " + std::to_string(index) + " (" + std::string(to_string(layer.kind)) +
                     "): " + message);
}

}  // namespace

Shape layer_output_shape(const LayerSpec& layer, const Shape& input, std::size_t index)
{
    switch (layer.kind) {
    case LayerKind::conv2d: {
        if (input.size() != 3) {
            fail(index, layer, "expects (C, H, W) input, got " + shape_string(input));
        }
        if (layer.weight.rank() != 4) {
            fail(index, layer, "weight must be (out, in, kh, kw), got " + shape_string(layer.weight.shape()));
        }
        const auto out_ch = layer.weight.dim(0);
        const auto kh = layer.weight.dim(2);
        const auto kw = layer.weight.dim(3);
        if (layer.weight.dim(1) != input[0]) {
            fail(index, layer, "weight expects " + std::to_string(layer.weight.dim(1)) +
                                   " input channels, input has " + std::to_string(input[0]));
        }
        if (layer.bias.shape() != Shape{out_ch}) {
            fail(index, layer, "bias must be (" + std::to_string(out_ch) + "), got " +
                                   shape_string(layer.bias.shape()));
        }
        if (layer.stride < 1) {
            fail(index, layer, "stride must be >= 1");
        }
        const auto padded_h = input[1] + 2 * layer.padding;
        const auto padded_w = input[2] + 2 * layer.padding;
        if (kh == 0 || kw == 0 || kh > padded_h || kw > padded_w) {
            fail(index, layer, "kernel does not fit input " + shape_string(input));
        }
        return {out_ch, (padded_h - kh) / layer.stride + 1, (padded_w - kw) / layer.stride + 1};
    }
    case LayerKind::relu:
        return input;
    case LayerKind::maxpool2x2:
        if (input.size() != 3 || input[1] < 2 || input[2] < 2) {
            fail(index, layer, "expects (C, H>=2, W>=2) input, got " + shape_string(input));
        }
        return {input[0], input[1] / 2, input[2] / 2};
    case LayerKind::avgpool_global:
        if (input.size() != 3) {
            fail(index, layer, "expects (C, H, W) input, got " + shape_string(input));
        }
        return {input[0]};
    case LayerKind::flatten:
        return {element_count(input)};
    case LayerKind::dense: {
        if (input.size() != 1) {
            fail(index, layer, "expects a flat input, got " + shape_string(input));
        }
        if (layer.weight.rank() != 2 || layer.weight.dim(1) != input[0]) {
            fail(index, layer, "weight must be (out, " + std::to_string(input[0]) + "), got " +
                                   shape_string(layer.weight.shape()));
        }
        const auto out_dim = layer.weight.dim(0);
        if (layer.bias.shape() != Shape{out_dim}) {
            fail(index, layer, "bias must be (" + std::to_string(out_dim) + "), got " +
                                   shape_string(layer.bias.shape()));
        }
        return {out_dim};
    }
    }
    fail(index, layer, "unknown layer kind");
}

std::vector<Shape> validate_model(const Model& model)
{
    if (model.input_shape.size() != 3 || model.input_shape[0] != ImageBuffer::channels ||
        model.input_shape[1] == 0 || model.input_shape[2] == 0) {
        throw ShapeError("model input shape must be (3, H, W), got " + shape_string(model.input_shape));
    }
    if (model.class_names.empty()) {
        throw ShapeError("model has no classes");
    }
    std::vector<Shape> shapes;
    shapes.reserve(model.layers.size());
    Shape current = model.input_shape;
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        current = layer_output_shape(model.layers[i], current, i);
        shapes.push_back(current);
    }
    if (current.size() != 1 || current[0] != model.num_classes()) {
        throw ShapeError("model output " + shape_string(current) + " does not match " +
                         std::to_string(model.num_classes()) + " class names");
    }
    return shapes;
}

void check_finite_parameters(const Model& model)
{
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const auto& layer = model.layers[i];
        if (!layer.weight.all_finite() || !layer.bias.all_finite()) {
            throw NumericError("layer " + std::to_string(i) + " (" + std::string(to_string(layer.kind)) +
                               ") has non-finite parameters");
        }
    }
}

Tensor normalize_input(const Model& model, const ImageBuffer& image)
{
    if (image.height() != model.image_height() || image.width() != model.image_width()) {
        throw ShapeError("image is " + std::to_string(image.height()) + "x" + std::to_string(image.width()) +
                         " but model expects " + std::to_string(model.image_height()) + "x" +
                         std::to_string(model.image_width()));
    }
    Tensor input(model.input_shape);
    const auto src = image.values();
    auto dst = input.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = normalize_pixel(model.pixel_norm, src[i]);
    }
    return input;
}

}  // namespace ivis
