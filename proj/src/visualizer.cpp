#include "ivis/visualizer.hpp"

#include <algorithm>
#include <cmath>

#include "ivis/error.hpp"
#include "ivis/rng.hpp"

namespace ivis {

std::string_view to_string(GradientMode mode) noexcept
{
    return mode == GradientMode::raw ? "raw" : "l2_normalized";
}

GradientMode parse_gradient_mode(std::string_view text)
{
    if (text == "raw") {
        return GradientMode::raw;
    }
    if (text == "l2_normalized" || text == "l2") {
        return GradientMode::l2_normalized;
    }
    throw ArgumentError("unknown gradient mode '" + std::string(text) + "'");
}

std::string_view to_string(RunStatus status) noexcept
{
    switch (status) {
    case RunStatus::converged:
        return "converged";
    case RunStatus::iteration_cap:
        return "iteration_cap";
    case RunStatus::inner_cap:
        return "inner_cap";
    }
    return "?";
}

void OptimConfig::validate() const
{
    if (!(q_target > 0.0 && q_target < 1.0)) {
        throw ArgumentError("q_target must lie in (0, 1)");
    }
    if (!(step_size >= 0.0) || !std::isfinite(step_size)) {
        throw ArgumentError("step_size must be finite and non-negative");
    }
    if (max_inner_steps < 1) {
        throw ArgumentError("max_inner_steps must be >= 1");
    }
}

void StoppingCriterion::validate(const OptimConfig& config) const
{
    if (!(q_test > 0.0 && q_test < 1.0)) {
        throw ArgumentError("q_test must lie in (0, 1)");
    }
    if (q_test > config.q_target) {
        throw ArgumentError("q_test must not exceed q_target");
    }
    if (max_outer_iterations < 1) {
        throw ArgumentError("max_outer_iterations must be >= 1");
    }
}

namespace {

void require_model_image(const Model& model, const ImageBuffer& image, std::size_t target_class)
{
    if (!image.is_square()) {
        throw ShapeError("visualization needs a square image");
    }
    if (target_class >= model.num_classes()) {
        throw ArgumentError("class index " + std::to_string(target_class) + " out of range [0, " +
                            std::to_string(model.num_classes()) + ")");
    }
    (void)normalize_input(model, image);  // shape check
}

}  // namespace

OptimizeResult optimize_to_confidence(const Model& model, const ImageBuffer& image, std::size_t target_class,
                                      const OptimConfig& config)
{
    config.validate();
    require_model_image(model, image, target_class);

    OptimizeResult result;
    result.image = image;
    result.image.clamp();
    const double slope = pixel_norm_slope(model.pixel_norm);

    while (true) {
        const auto pass = forward_pass(model, normalize_input(model, result.image));
        const auto p = softmax(pass.output.values());
        result.confidence_history.push_back(p[target_class]);
        if (p[target_class] > config.q_target) {
            result.reached_target = true;
            break;
        }
        if (result.steps == config.max_inner_steps) {
            break;
        }

        Tensor seed(pass.output.shape());
        if (config.objective == Objective::logit) {
            seed[target_class] = 1.0;
        } else {
            for (std::size_t k = 0; k < p.size(); ++k) {
                seed[k] = p[target_class] * ((k == target_class ? 1.0 : 0.0) - p[k]);
            }
        }
        auto grad = backward_pass(model, pass, seed);
        double sum_sq = 0.0;
        for (double& g : grad.values()) {
            g *= slope;
            sum_sq += g * g;
        }
        if (!grad.all_finite() || !std::isfinite(sum_sq)) {
            throw NumericError("non-finite input gradient at inner step " + std::to_string(result.steps));
        }
        double scale = config.step_size;
        if (config.gradient_mode == GradientMode::l2_normalized) {
            const double rms = std::sqrt(sum_sq / static_cast<double>(grad.size()));
            scale = rms > 0.0 ? config.step_size / rms : 0.0;
        }
        auto pixels = result.image.values();
        const auto g = grad.values();
        bool moved = false;
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            const double next = std::clamp(pixels[i] + scale * g[i], 0.0, kDisplayMax);
            moved |= next != pixels[i];
            pixels[i] = next;
        }
        ++result.steps;
        if (!moved) {
            // Fixed point: every remaining step would repeat this one.
            result.confidence_history.resize(config.max_inner_steps + 1, p[target_class]);
            result.steps = config.max_inner_steps;
            break;
        }
    }
    return result;
}

VisualizationResult visualize(const Model& model, std::size_t target_class, const ImageBuffer& init,
                              const TransformSchedule& schedule, const OptimConfig& config,
                              const StoppingCriterion& stop)
{
    config.validate();
    stop.validate(config);
    if (schedule.steps.empty() || schedule.battery.empty()) {
        throw ArgumentError("transform schedule and battery must be non-empty");
    }
    require_model_image(model, init, target_class);

    VisualizationResult result;
    ImageBuffer current = init;
    current.clamp();
    bool last_pass_capped = false;

    for (std::size_t iteration = 0; iteration < stop.max_outer_iterations; ++iteration) {
        auto optimized = optimize_to_confidence(model, current, target_class, config);
        last_pass_capped = !optimized.reached_target;
        const auto& transform = schedule.steps[iteration % schedule.steps.size()];

        auto battery = run_battery(model, optimized.image, target_class, schedule.battery);
        const auto summary = summarize(battery);
        result.trace.iterations.push_back({iteration, transform, optimized.steps,
                                           optimized.confidence_history.back(), summary.min_confidence,
                                           summary.mean_confidence});
        result.image = std::move(optimized.image);
        result.trace.final_battery = std::move(battery);

        if (summary.min_confidence >= stop.q_test) {
            result.trace.status = RunStatus::converged;
            return result;
        }
        current = apply_transform(result.image, transform);
    }
    result.trace.status = last_pass_capped ? RunStatus::inner_cap : RunStatus::iteration_cap;
    return result;
}

BaselineResult baseline_visualize(const Model& model, std::size_t target_class, const ImageBuffer& init,
                                  const OptimConfig& config)
{
    auto optimized = optimize_to_confidence(model, init, target_class, config);
    BaselineResult result;
    result.image = std::move(optimized.image);
    result.steps = optimized.steps;
    result.status = optimized.reached_target ? RunStatus::converged : RunStatus::inner_cap;
    result.confidence_history = std::move(optimized.confidence_history);
    return result;
}

ImageBuffer seeded_init(std::uint64_t seed, std::size_t size, double base_level, double amplitude)
{
    Xoshiro256 rng(seed);
    ImageBuffer image = ImageBuffer::gray(size, base_level);
    for (double& v : image.values()) {
        v += amplitude * rng.uniform();
    }
    image.clamp();
    return image;
}

}  // namespace ivis
