#include "ivis/ppm.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>

#include "ivis/error.hpp"

namespace ivis {

std::string encode_ppm(const ImageBuffer& image)
{
    std::string out = "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
    out.reserve(out.size() + 3 * image.plane_size());
    for (std::size_t y = 0; y < image.height(); ++y) {
        for (std::size_t x = 0; x < image.width(); ++x) {
            for (std::size_t c = 0; c < ImageBuffer::channels; ++c) {
                const double v = std::clamp(image.at(c, y, x), 0.0, kDisplayMax);
                out.push_back(static_cast<char>(static_cast<unsigned char>(v)));
            }
        }
    }
    return out;
}

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

    std::size_t number(const char* what)
    {
        skip_space_and_comments();
        std::size_t value = 0;
        std::size_t digits = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
            if (value > 1'000'000) {
                throw PpmError(PpmErrorKind::malformed_header, std::string("PPM ") + what + " is too large");
            }
            ++pos_;
            ++digits;
        }
        if (digits == 0) {
            throw PpmError(PpmErrorKind::malformed_header, std::string("PPM header: expected ") + what);
        }
        return value;
    }

    /// Consumes the single whitespace byte that ends the header.
    void end_of_header()
    {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            throw PpmError(PpmErrorKind::malformed_header, "PPM header: missing whitespace after maxval");
        }
        ++pos_;
    }

    [[nodiscard]] std::size_t position() const noexcept { return pos_; }

private:
    void skip_space_and_comments()
    {
        while (pos_ < bytes_.size()) {
            const auto ch = static_cast<unsigned char>(bytes_[pos_]);
            if (std::isspace(ch)) {
                ++pos_;
            } else if (ch == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else {
                break;
            }
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 2;
};

}  // namespace

ImageBuffer decode_ppm(std::string_view bytes)
{
    if (bytes.size() < 2 || bytes.substr(0, 2) != "P6") {
        throw PpmError(PpmErrorKind::bad_magic, "not a binary PPM (expected 'P6')");
    }
    HeaderReader header(bytes);
    const auto width = header.number("width");
    const auto height = header.number("height");
    const auto maxval = header.number("maxval");
    if (maxval != 255) {
        throw PpmError(PpmErrorKind::unsupported_depth,
                       "unsupported PPM maxval " + std::to_string(maxval) + " (only 255 is supported)");
    }
    if (width == 0 || height == 0) {
        throw PpmError(PpmErrorKind::malformed_header, "PPM has zero width or height");
    }
    header.end_of_header();
    const auto payload = bytes.substr(header.position());
    const auto needed = 3 * width * height;
    if (payload.size() < needed) {
        throw PpmError(PpmErrorKind::short_data, "PPM pixel data has " + std::to_string(payload.size()) +
                                                     " bytes, expected " + std::to_string(needed));
    }
    ImageBuffer image(height, width);
    std::size_t k = 0;
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            for (std::size_t c = 0; c < ImageBuffer::channels; ++c) {
                image.at(c, y, x) = static_cast<double>(static_cast<unsigned char>(payload[k++]));
            }
        }
    }
    return image;
}

void write_ppm(const ImageBuffer& image, const std::filesystem::path& path)
{
    const auto bytes = encode_ppm(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw PpmError(PpmErrorKind::io, "cannot open '" + path.string() + "' for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw PpmError(PpmErrorKind::io, "failed writing '" + path.string() + "'");
    }
}

ImageBuffer read_ppm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw PpmError(PpmErrorKind::io, "cannot open '" + path.string() + "'");
    }
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_ppm(bytes);
}

}  // namespace ivis
