#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "ivis/entropy.hpp"
#include "ivis/screening.hpp"
#include "ivis/transforms.hpp"
#include "ivis/visualizer.hpp"

namespace ivis {

// Reports are line-oriented text. The first line is "schema <name>/<version>",
// followed by "key value" lines and tab-separated tables introduced by a
// "[section]" line. Reals are printed with 17 significant digits so equal
// runs produce byte-identical reports.

struct RunContext {
    std::string model_path;
    std::size_t target_class = 0;
    std::string target_name;
    std::string init_description;
};

void write_run_report(std::ostream& out, const RunContext& context, const VisualizationResult& result,
                      const TransformSchedule& schedule, const OptimConfig& config, const StoppingCriterion& stop);

void write_baseline_report(std::ostream& out, const RunContext& context, const BaselineResult& result,
                           const OptimConfig& config, const std::vector<BatteryEntry>& battery);

void write_sweep_report(std::ostream& out, const RunContext& context, const SweepReport& report,
                        const TransformSchedule& schedule, const OptimConfig& config, const StoppingCriterion& stop);

void write_class_report(std::ostream& out, const ClassReport& report);

void write_entropy_report(std::ostream& out, const std::string& image_id, const GrayImage& gray,
                          const EntropyMap& map);

/// Renders an entropy map as a gray image using the [0, 16] -> [0, 255] quantization.
[[nodiscard]] ImageBuffer render_entropy_map(const EntropyMap& map);

/// Formats a real with 17 significant digits.
[[nodiscard]] std::string format_real(double value);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ivis
