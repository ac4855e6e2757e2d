#include "ivis/image.hpp"

#include <algorithm>

namespace ivis {

ImageBuffer::ImageBuffer(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), values_(channels * height * width, fill)
{
}

ImageBuffer ImageBuffer::gray(std::size_t size, double level)
{
    return ImageBuffer(size, size, level);
}

void ImageBuffer::clamp() noexcept
{
    for (double& v : values_) {
        v = std::clamp(v, 0.0, kDisplayMax);
    }
}

double ImageBuffer::max_value() const noexcept
{
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double ImageBuffer::min_value() const noexcept
{
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

}  // namespace ivis
