#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ivis/image.hpp"
#include "ivis/model.hpp"
#include "ivis/network.hpp"
#include "ivis/transforms.hpp"

namespace ivis {

enum class GradientMode {
    raw,            // step along the display-unit gradient itself
    l2_normalized,  // step along g / rms(g): every step has per-value RMS == step_size
};

[[nodiscard]] std::string_view to_string(GradientMode mode) noexcept;
[[nodiscard]] GradientMode parse_gradient_mode(std::string_view text);

struct OptimConfig {
    double q_target = 0.99;
    double step_size = 1.0;  // display units
    std::size_t max_inner_steps = 500;
    GradientMode gradient_mode = GradientMode::l2_normalized;
    Objective objective = Objective::softmax_confidence;

    /// Throws ArgumentError unless q_target is in (0, 1), step_size >= 0 and finite, max_inner_steps >= 1.
    void validate() const;
};

struct StoppingCriterion {
    double q_test = 0.8;
    std::size_t max_outer_iterations = 108;  // three revolutions of rot:10x36

    void validate(const OptimConfig& config) const;
};

enum class RunStatus { converged, iteration_cap, inner_cap };

[[nodiscard]] std::string_view to_string(RunStatus status) noexcept;

struct OptimizeResult {
    ImageBuffer image;
    std::size_t steps = 0;
    bool reached_target = false;
    /// Target confidence before the first step and after every step.
    std::vector<double> confidence_history;
};

/// Gradient ascent on the input until the target confidence exceeds
/// config.q_target or config.max_inner_steps steps have been taken. The image
/// is clamped to [0, 255] after every step.
[[nodiscard]] OptimizeResult optimize_to_confidence(const Model& model, const ImageBuffer& image,
                                                    std::size_t target_class, const OptimConfig& config);

struct IterationRecord {
    std::size_t iteration = 0;
    TransformSpec transform;
    std::size_t inner_steps = 0;
    double confidence = 0.0;  // q_C of M_o
    double battery_min = 0.0;
    double battery_mean = 0.0;

    friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct RunTrace {
    std::vector<IterationRecord> iterations;
    RunStatus status = RunStatus::iteration_cap;
    std::vector<BatteryEntry> final_battery;  // battery of the returned image
};

struct VisualizationResult {
    ImageBuffer image;  // last M_o
    RunTrace trace;
};

/// Transformation-invariant visualization: optimize, transform, test the
/// battery on the optimized image, repeat. Converged when the minimum battery
/// confidence reaches stop.q_test.
[[nodiscard]] VisualizationResult visualize(const Model& model, std::size_t target_class, const ImageBuffer& init,
                                            const TransformSchedule& schedule, const OptimConfig& config,
                                            const StoppingCriterion& stop);

struct BaselineResult {
    ImageBuffer image;
    std::size_t steps = 0;
    RunStatus status = RunStatus::inner_cap;  // converged when q_target was exceeded
    std::vector<double> confidence_history;
};

/// Plain gradient ascent: a single optimization pass without transformations.
[[nodiscard]] BaselineResult baseline_visualize(const Model& model, std::size_t target_class,
                                                const ImageBuffer& init, const OptimConfig& config);

/// Constant image at `base_level` plus uniform noise in [0, amplitude), clamped.
[[nodiscard]] ImageBuffer seeded_init(std::uint64_t seed, std::size_t size, double base_level, double amplitude);

}  // namespace ivis
