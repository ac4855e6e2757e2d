#include "ivis/screening.hpp"

#include <charconv>

#include "ivis/error.hpp"

namespace ivis {

ImageBuffer invert(const ImageBuffer& image)
{
    ImageBuffer out = image;
    for (double& v : out.values()) {
        v = kDisplayMax - v;
    }
    return out;
}

ScreenRect parse_rect(std::string_view text)
{
    std::size_t parts[4] = {};
    const char* cursor = text.data();
    const char* end = text.data() + text.size();
    for (int i = 0; i < 4; ++i) {
        const auto [ptr, ec] = std::from_chars(cursor, end, parts[i]);
        if (ec != std::errc{}) {
            throw ArgumentError("rectangle must be 'x,y,w,h', got '" + std::string(text) + "'");
        }
        cursor = ptr;
        if (i < 3) {
            if (cursor == end || *cursor != ',') {
                throw ArgumentError("rectangle must be 'x,y,w,h', got '" + std::string(text) + "'");
            }
            ++cursor;
        }
    }
    if (cursor != end) {
        throw ArgumentError("rectangle must be 'x,y,w,h', got '" + std::string(text) + "'");
    }
    return {parts[0], parts[1], parts[2], parts[3]};
}

ImageBuffer zero_square(const ImageBuffer& image, const ScreenRect& rect, const Model& model)
{
    if (rect.x > image.width() || rect.w > image.width() - rect.x || rect.y > image.height() ||
        rect.h > image.height() - rect.y) {
        throw ArgumentError("screen rectangle " + std::to_string(rect.x) + "," + std::to_string(rect.y) + "," +
                            std::to_string(rect.w) + "," + std::to_string(rect.h) + " exceeds the " +
                            std::to_string(image.width()) + "x" + std::to_string(image.height()) + " image");
    }
    const double zero = zero_display_value(model.pixel_norm);
    ImageBuffer out = image;
    for (std::size_t c = 0; c < ImageBuffer::channels; ++c) {
        for (std::size_t y = rect.y; y < rect.y + rect.h; ++y) {
            for (std::size_t x = rect.x; x < rect.x + rect.w; ++x) {
                out.at(c, y, x) = zero;
            }
        }
    }
    return out;
}

std::string_view to_string(ImageVariant variant) noexcept
{
    switch (variant) {
    case ImageVariant::original:
        return "original";
    case ImageVariant::screened:
        return "screened";
    case ImageVariant::inverted:
        return "inverted";
    }
    return "?";
}

ImageVariant parse_variant(std::string_view text)
{
    if (text == "original") {
        return ImageVariant::original;
    }
    if (text == "screened") {
        return ImageVariant::screened;
    }
    if (text == "inverted") {
        return ImageVariant::inverted;
    }
    throw ArgumentError("unknown image variant '" + std::string(text) + "'");
}

ClassReport classify_report(const Model& model, const std::vector<NamedImage>& images, std::size_t k,
                            const std::vector<ImageVariant>& variants, const ScreenRect* screen)
{
    if (k < 1) {
        throw ArgumentError("k must be >= 1");
    }
    ClassReport report;
    report.k = std::min(k, model.num_classes());
    for (const auto& named : images) {
        for (const auto variant : variants) {
            ImageBuffer input;
            switch (variant) {
            case ImageVariant::original:
                input = named.image;
                break;
            case ImageVariant::screened:
                if (screen == nullptr) {
                    throw ArgumentError("screened variant requested without a screen rectangle");
                }
                input = zero_square(named.image, *screen, model);
                break;
            case ImageVariant::inverted:
                input = invert(named.image);
                break;
            }
            report.rows.push_back({named.id, variant, forward(model, input, report.k).top_k});
        }
    }
    return report;
}

}  // namespace ivis
