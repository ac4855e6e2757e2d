#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ivis/image.hpp"

namespace ivis {

/// Binary P6 encoding: "P6\n<width> <height>\n255\n" followed by interleaved
/// RGB bytes, row-major. Values are clamped to [0, 255] and truncated.
[[nodiscard]] std::string encode_ppm(const ImageBuffer& image);

/// Decodes P6 with maxval 255. Header tokens may be separated by any
/// whitespace and '#' comments. Throws PpmError.
[[nodiscard]] ImageBuffer decode_ppm(std::string_view bytes);

void write_ppm(const ImageBuffer& image, const std::filesystem::path& path);
[[nodiscard]] ImageBuffer read_ppm(const std::filesystem::path& path);

}  // namespace ivis
