#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ivis/image.hpp"
#include "ivis/rng.hpp"

namespace ivis {

enum class ShapeClass : std::size_t { ring, cross, stripes, checker, disk, hex_outline };

inline constexpr std::size_t kShapeClassCount = 6;
inline constexpr std::array<std::string_view, kShapeClassCount> kShapeClassNames = {
    "ring", "cross", "stripes", "checker", "disk", "hex_outline"};
inline constexpr std::size_t kDefaultImageSize = 64;

[[nodiscard]] std::vector<std::string> shape_class_names();
[[nodiscard]] ShapeClass parse_shape_class(std::string_view name);

/// Geometry and colours of one rendered shape. Pixel (x, y) is sampled at
/// its integer coordinates; there is no anti-aliasing.
struct ShapeParams {
    ShapeClass shape = ShapeClass::disk;
    double centre_x = 0.0;
    double centre_y = 0.0;
    double radius = 0.0;       // outer extent
    double angle = 0.0;        // radians
    double thickness = 0.0;    // ring/cross/hex stroke width
    double period = 0.0;       // stripes/checker cell size
    double foreground = 255.0;
    double background = 0.0;

    friend bool operator==(const ShapeParams&, const ShapeParams&) = default;
};

[[nodiscard]] ShapeParams sample_shape_params(ShapeClass shape, Xoshiro256& rng, std::size_t image_size);

/// True when pixel (x, y) belongs to the shape's foreground.
[[nodiscard]] bool shape_covers(const ShapeParams& params, double x, double y);

[[nodiscard]] ImageBuffer render_shape(const ShapeParams& params, std::size_t image_size);

struct ShapeDataset {
    std::vector<ImageBuffer> images;
    std::vector<std::size_t> labels;
    std::vector<ShapeParams> params;
    std::uint64_t seed = 0;
    std::size_t image_size = kDefaultImageSize;

    [[nodiscard]] std::size_t size() const noexcept { return images.size(); }

    friend bool operator==(const ShapeDataset&, const ShapeDataset&) = default;
};

/// Balanced dataset: sample i has label i % 6 and is drawn from the stream
/// derive_seed(seed, i), so generation order does not matter.
[[nodiscard]] ShapeDataset generate_dataset(std::uint64_t seed, std::size_t count_per_class,
                                            std::size_t image_size = kDefaultImageSize);

/// Writes one PPM per sample plus manifest.txt (label and file per line).
void save_dataset(const ShapeDataset& dataset, const std::filesystem::path& directory);
/// Reads images and labels back; shape parameters are not persisted.
[[nodiscard]] ShapeDataset load_dataset(const std::filesystem::path& directory);

}  // namespace ivis
