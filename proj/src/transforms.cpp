#include "ivis/transforms.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "ivis/error.hpp"

namespace ivis {

TransformSpec TransformSpec::rotation(double degrees)
{
    if (!(degrees > -360.0 && degrees < 360.0)) {
        throw ArgumentError("rotation angle must lie in (-360, 360), got " + std::to_string(degrees));
    }
    TransformSpec spec;
    spec.kind = Kind::rotate;
    spec.angle_degrees = degrees;
    return spec;
}

TransformSpec TransformSpec::mirror(FlipAxis axis)
{
    TransformSpec spec;
    spec.kind = Kind::flip;
    spec.axis = axis;
    return spec;
}

TransformSpec TransformSpec::zoom(double factor)
{
    if (!(factor > 0.0 && factor <= 8.0)) {
        throw ArgumentError("scale factor must lie in (0, 8], got " + std::to_string(factor));
    }
    TransformSpec spec;
    spec.kind = Kind::scale;
    spec.factor = factor;
    return spec;
}

namespace {

std::string format_number(double value)
{
    std::ostringstream out;
    out.precision(17);
    out << value;
    // Prefer the shortest text that reads back identically.
    for (int digits = 1; digits <= 17; ++digits) {
        std::ostringstream shorter;
        shorter.precision(digits);
        shorter << value;
        if (std::stod(shorter.str()) == value) {
            return shorter.str();
        }
    }
    return out.str();
}

}  // namespace

std::string TransformSpec::to_string() const
{
    switch (kind) {
    case Kind::rotate:
        return "rot:" + format_number(angle_degrees);
    case Kind::flip:
        return axis == FlipAxis::horizontal ? "flip:h" : "flip:v";
    case Kind::scale:
        return "scale:" + format_number(factor);
    }
    return "?";
}

TransformSchedule TransformSchedule::default_rotation()
{
    TransformSchedule schedule;
    schedule.steps.assign(36, TransformSpec::rotation(10.0));
    for (int k = 0; k < 36; ++k) {
        schedule.battery.push_back(TransformSpec::rotation(10.0 * k));
    }
    return schedule;
}

namespace {

void require_square(const ImageBuffer& image, const char* op)
{
    if (!image.is_square() || image.height() == 0) {
        throw ShapeError(std::string(op) + " needs a non-empty square image, got " + std::to_string(image.height()) +
                         "x" + std::to_string(image.width()));
    }
}

/// Bilinear sample of one channel; taps outside the image read as 0.
double sample(const ImageBuffer& image, std::size_t c, double xs, double ys)
{
    const double fx0 = std::floor(xs);
    const double fy0 = std::floor(ys);
    const double tx = xs - fx0;
    const double ty = ys - fy0;
    const auto w = static_cast<long long>(image.width());
    const auto h = static_cast<long long>(image.height());
    // Far outside: every tap is zero.
    if (fx0 < -1.0 || fy0 < -1.0 || fx0 >= static_cast<double>(w) || fy0 >= static_cast<double>(h)) {
        return 0.0;
    }
    const auto x0 = static_cast<long long>(fx0);
    const auto y0 = static_cast<long long>(fy0);
    auto tap = [&](long long x, long long y) {
        if (x < 0 || y < 0 || x >= w || y >= h) {
            return 0.0;
        }
        return image.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(x));
    };
    const double top = std::lerp(tap(x0, y0), tap(x0 + 1, y0), tx);
    const double bottom = std::lerp(tap(x0, y0 + 1), tap(x0 + 1, y0 + 1), tx);
    return std::lerp(top, bottom, ty);
}

/// Exact cosine/sine for multiples of 90 degrees.
void rotation_terms(double degrees, double& cos_t, double& sin_t)
{
    const double quarters = degrees / 90.0;
    if (quarters == std::floor(quarters)) {
        const auto q = ((static_cast<long long>(quarters) % 4) + 4) % 4;
        constexpr double cos_table[] = {1.0, 0.0, -1.0, 0.0};
        constexpr double sin_table[] = {0.0, 1.0, 0.0, -1.0};
        cos_t = cos_table[q];
        sin_t = sin_table[q];
        return;
    }
    const double radians = degrees * std::numbers::pi / 180.0;
    cos_t = std::cos(radians);
    sin_t = std::sin(radians);
}

}  // namespace

ImageBuffer rotate(const ImageBuffer& image, double angle_degrees)
{
    require_square(image, "rotate");
    double cos_t = 1.0, sin_t = 0.0;
    rotation_terms(angle_degrees, cos_t, sin_t);
    const double centre = (static_cast<double>(image.width()) - 1.0) / 2.0;
    ImageBuffer out(image.height(), image.width());
    for (std::size_t y = 0; y < image.height(); ++y) {
        const double dy = static_cast<double>(y) - centre;
        for (std::size_t x = 0; x < image.width(); ++x) {
            const double dx = static_cast<double>(x) - centre;
            // Inverse map: counter-clockwise on screen (y axis pointing down).
            const double xs = centre + (cos_t * dx - sin_t * dy);
            const double ys = centre + (sin_t * dx + cos_t * dy);
            for (std::size_t c = 0; c < ImageBuffer::channels; ++c) {
                out.at(c, y, x) = sample(image, c, xs, ys);
            }
        }
    }
    out.clamp();
    return out;
}

ImageBuffer flip(const ImageBuffer& image, FlipAxis axis)
{
    ImageBuffer out(image.height(), image.width());
    const auto h = image.height(), w = image.width();
    for (std::size_t c = 0; c < ImageBuffer::channels; ++c) {
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                out.at(c, y, x) = axis == FlipAxis::horizontal ? image.at(c, y, w - 1 - x)
                                                               : image.at(c, h - 1 - y, x);
            }
        }
    }
    return out;
}

ImageBuffer scale(const ImageBuffer& image, double factor)
{
    if (!(factor > 0.0 && factor <= 8.0)) {
        throw ArgumentError("scale factor must lie in (0, 8], got " + std::to_string(factor));
    }
    require_square(image, "scale");
    const double centre = (static_cast<double>(image.width()) - 1.0) / 2.0;
    ImageBuffer out(image.height(), image.width());
    for (std::size_t y = 0; y < image.height(); ++y) {
        const double ys = centre + (static_cast<double>(y) - centre) / factor;
        for (std::size_t x = 0; x < image.width(); ++x) {
            const double xs = centre + (static_cast<double>(x) - centre) / factor;
            for (std::size_t c = 0; c < ImageBuffer::channels; ++c) {
                out.at(c, y, x) = sample(image, c, xs, ys);
            }
        }
    }
    out.clamp();
    return out;
}

ImageBuffer apply_transform(const ImageBuffer& image, const TransformSpec& spec)
{
    switch (spec.kind) {
    case TransformSpec::Kind::rotate:
        return rotate(image, spec.angle_degrees);
    case TransformSpec::Kind::flip:
        return flip(image, spec.axis);
    case TransformSpec::Kind::scale:
        return scale(image, spec.factor);
    }
    throw ArgumentError("unknown transform kind");
}

namespace {

std::vector<std::string_view> split(std::string_view text, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto at = text.find(sep, start);
        parts.push_back(text.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
        if (at == std::string_view::npos) {
            return parts;
        }
        start = at + 1;
    }
}

std::string_view trim(std::string_view text)
{
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
        text.remove_prefix(1);
    }
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
        text.remove_suffix(1);
    }
    return text;
}

double parse_real(std::string_view text, std::string_view token)
{
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw ArgumentError("bad number in transform '" + std::string(token) + "'");
    }
    return value;
}

std::size_t parse_count(std::string_view text, std::string_view token)
{
    std::size_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || value == 0) {
        throw ArgumentError("bad repeat count in transform '" + std::string(token) + "'");
    }
    return value;
}

void parse_token(std::string_view token, bool allow_sweep, std::vector<TransformSpec>& out)
{
    const auto colon = token.find(':');
    if (colon == std::string_view::npos) {
        throw ArgumentError("transform '" + std::string(token) + "' is missing ':'");
    }
    const auto name = token.substr(0, colon);
    auto arg = token.substr(colon + 1);

    if (name == "rot-sweep") {
        if (!allow_sweep) {
            throw ArgumentError("rot-sweep is only valid in a battery");
        }
        const double step = parse_real(arg, token);
        if (!(step > 0.0 && step < 360.0)) {
            throw ArgumentError("rot-sweep step must lie in (0, 360)");
        }
        for (std::size_t k = 0; static_cast<double>(k) * step < 360.0; ++k) {
            out.push_back(TransformSpec::rotation(static_cast<double>(k) * step));
        }
        return;
    }

    std::size_t repeat = 1;
    const auto times = arg.find('x');
    if (times != std::string_view::npos) {
        repeat = parse_count(arg.substr(times + 1), token);
        arg = arg.substr(0, times);
    }
    TransformSpec spec;
    if (name == "rot") {
        spec = TransformSpec::rotation(parse_real(arg, token));
    } else if (name == "flip") {
        if (arg == "h") {
            spec = TransformSpec::mirror(FlipAxis::horizontal);
        } else if (arg == "v") {
            spec = TransformSpec::mirror(FlipAxis::vertical);
        } else {
            throw ArgumentError("flip axis must be 'h' or 'v' in '" + std::string(token) + "'");
        }
    } else if (name == "scale") {
        spec = TransformSpec::zoom(parse_real(arg, token));
    } else {
        throw ArgumentError("unknown transform '" + std::string(name) + "'");
    }
    out.insert(out.end(), repeat, spec);
}

std::vector<TransformSpec> parse_list(std::string_view text, bool allow_sweep)
{
    std::vector<TransformSpec> out;
    for (auto token : split(text, ',')) {
        token = trim(token);
        if (token.empty()) {
            throw ArgumentError("empty transform in '" + std::string(text) + "'");
        }
        parse_token(token, allow_sweep, out);
    }
    return out;
}

}  // namespace

std::vector<TransformSpec> parse_schedule(std::string_view text)
{
    return parse_list(text, false);
}

std::vector<TransformSpec> parse_battery(std::string_view text)
{
    return parse_list(text, true);
}

std::string format_transforms(const std::vector<TransformSpec>& specs)
{
    std::string out;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += specs[i].to_string();
    }
    return out;
}

std::vector<BatteryEntry> run_battery(const Model& model, const ImageBuffer& image, std::size_t target_class,
                                      const std::vector<TransformSpec>& battery)
{
    if (target_class >= model.num_classes()) {
        throw ArgumentError("class index " + std::to_string(target_class) + " out of range");
    }
    std::vector<BatteryEntry> entries;
    entries.reserve(battery.size());
    for (const auto& spec : battery) {
        const auto transformed = apply_transform(image, spec);
        const auto prediction = forward(model, transformed);
        entries.push_back({spec, prediction.confidences[target_class]});
    }
    return entries;
}

BatterySummary summarize(const std::vector<BatteryEntry>& entries)
{
    BatterySummary summary;
    if (entries.empty()) {
        return summary;
    }
    summary.min_confidence = entries.front().confidence;
    double total = 0.0;
    for (const auto& entry : entries) {
        summary.min_confidence = std::min(summary.min_confidence, entry.confidence);
        total += entry.confidence;
    }
    summary.mean_confidence = total / static_cast<double>(entries.size());
    return summary;
}

}  // namespace ivis
