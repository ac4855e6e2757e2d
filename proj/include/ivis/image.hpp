#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ivis {

inline constexpr double kDisplayMax = 255.0;

/// Three-channel image in display units ([0, 255] per channel).
///
/// Storage is planar: all red values, then green, then blue, each plane
/// row-major. This matches the (C, H, W) layout the network consumes, so
/// gradients map onto pixels without reshuffling.
class ImageBuffer {
public:
    static constexpr std::size_t channels = 3;

    ImageBuffer() = default;
    ImageBuffer(std::size_t height, std::size_t width, double fill = 0.0);

    /// Square constant (g, g, g) image.
    [[nodiscard]] static ImageBuffer gray(std::size_t size, double level);

    [[nodiscard]] std::size_t height() const noexcept { return height_; }
    [[nodiscard]] std::size_t width() const noexcept { return width_; }
    [[nodiscard]] bool is_square() const noexcept { return height_ == width_; }
    [[nodiscard]] std::size_t plane_size() const noexcept { return height_ * width_; }

    double& at(std::size_t c, std::size_t y, std::size_t x) noexcept
    {
        return values_[(c * height_ + y) * width_ + x];
    }
    [[nodiscard]] double at(std::size_t c, std::size_t y, std::size_t x) const noexcept
    {
        return values_[(c * height_ + y) * width_ + x];
    }

    [[nodiscard]] std::span<double> values() noexcept { return values_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

    /// Clamp every value into [0, 255]. Idempotent.
    void clamp() noexcept;
    [[nodiscard]] double max_value() const noexcept;
    [[nodiscard]] double min_value() const noexcept;

    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> values_;
};

}  // namespace ivis
