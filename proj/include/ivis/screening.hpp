#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ivis/image.hpp"
#include "ivis/model.hpp"
#include "ivis/network.hpp"

namespace ivis {

/// Per-channel 255 - v.
[[nodiscard]] ImageBuffer invert(const ImageBuffer& image);

struct ScreenRect {
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t w = 0;
    std::size_t h = 0;
};

/// Parses "x,y,w,h".
[[nodiscard]] ScreenRect parse_rect(std::string_view text);

/// Fills `rect` with the display value that normalizes to exactly 0 for the
/// model (0 for unit_01, 127.5 for signed_11). Throws ArgumentError when the
/// rectangle does not fit inside the image.
[[nodiscard]] ImageBuffer zero_square(const ImageBuffer& image, const ScreenRect& rect, const Model& model);

enum class ImageVariant { original, screened, inverted };

[[nodiscard]] std::string_view to_string(ImageVariant variant) noexcept;
[[nodiscard]] ImageVariant parse_variant(std::string_view text);

struct ClassReportRow {
    std::string image_id;
    ImageVariant variant = ImageVariant::original;
    std::vector<ClassScore> top_k;  // confidence stored as a fraction; rendered as a percentage
};

struct ClassReport {
    std::size_t k = 1;
    std::vector<ClassReportRow> rows;  // image order, then variant order as requested
};

struct NamedImage {
    std::string id;
    ImageBuffer image;
};

/// Top-k predictions for every image and requested variant. The screened
/// variant needs `screen`; it is rejected otherwise.
[[nodiscard]] ClassReport classify_report(const Model& model, const std::vector<NamedImage>& images, std::size_t k,
                                          const std::vector<ImageVariant>& variants,
                                          const ScreenRect* screen = nullptr);

}  // namespace ivis
