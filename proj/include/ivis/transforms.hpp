#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ivis/image.hpp"
#include "ivis/model.hpp"
#include "ivis/network.hpp"

namespace ivis {

enum class FlipAxis {
    horizontal,  // mirror left-right
    vertical,    // mirror top-bottom
};

struct TransformSpec {
    enum class Kind { rotate, flip, scale };

    Kind kind = Kind::rotate;
    double angle_degrees = 0.0;  // rotate, in (-360, 360)
    FlipAxis axis = FlipAxis::horizontal;
    double factor = 1.0;  // scale, in (0, 8]

    [[nodiscard]] static TransformSpec rotation(double degrees);
    [[nodiscard]] static TransformSpec mirror(FlipAxis axis);
    [[nodiscard]] static TransformSpec zoom(double factor);

    /// Mini-syntax form: "rot:10", "flip:h", "scale:0.9".
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const TransformSpec&, const TransformSpec&) = default;
};

struct TransformSchedule {
    std::vector<TransformSpec> steps;
    std::vector<TransformSpec> battery;

    /// 36 steps of rotate(10) with the 0..350 degree rotation battery.
    [[nodiscard]] static TransformSchedule default_rotation();
};

/// Rotation about ((W-1)/2, (H-1)/2) by inverse-mapped bilinear resampling.
/// Taps outside the source contribute 0. Multiples of 90 degrees are exact
/// index permutations. Throws ShapeError on non-square input.
[[nodiscard]] ImageBuffer rotate(const ImageBuffer& image, double angle_degrees);

[[nodiscard]] ImageBuffer flip(const ImageBuffer& image, FlipAxis axis);

/// Bilinear zoom about the centre on a fixed canvas. factor > 1 magnifies.
[[nodiscard]] ImageBuffer scale(const ImageBuffer& image, double factor);

[[nodiscard]] ImageBuffer apply_transform(const ImageBuffer& image, const TransformSpec& spec);

/// Parses "rot:10x36,flip:h,scale:0.9" into a step list.
[[nodiscard]] std::vector<TransformSpec> parse_schedule(std::string_view text);
/// Parses battery syntax; accepts "rot-sweep:10" plus the schedule forms.
[[nodiscard]] std::vector<TransformSpec> parse_battery(std::string_view text);
[[nodiscard]] std::string format_transforms(const std::vector<TransformSpec>& specs);

struct BatteryEntry {
    TransformSpec transform;
    double confidence = 0.0;

    friend bool operator==(const BatteryEntry&, const BatteryEntry&) = default;
};

/// Target-class confidence of `image` under every battery transform, in battery order.
[[nodiscard]] std::vector<BatteryEntry> run_battery(const Model& model, const ImageBuffer& image,
                                                    std::size_t target_class,
                                                    const std::vector<TransformSpec>& battery);

struct BatterySummary {
    double min_confidence = 0.0;
    double mean_confidence = 0.0;
};

[[nodiscard]] BatterySummary summarize(const std::vector<BatteryEntry>& entries);

}  // namespace ivis
