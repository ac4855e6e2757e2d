#include "ivis/report.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "ivis/error.hpp"

namespace ivis {

std::string format_real(double value)
{
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

namespace {

void write_config(std::ostream& out, const OptimConfig& config)
{
    out << "config.q_target " << format_real(config.q_target) << '\n';
    out << "config.step_size " << format_real(config.step_size) << '\n';
    out << "config.max_inner_steps " << config.max_inner_steps << '\n';
    out << "config.gradient_mode " << to_string(config.gradient_mode) << '\n';
    out << "config.objective " << to_string(config.objective) << '\n';
}

void write_context(std::ostream& out, const RunContext& context)
{
    out << "model " << context.model_path << '\n';
    out << "target_class " << context.target_class << ' ' << context.target_name << '\n';
    if (!context.init_description.empty()) {
        out << "init " << context.init_description << '\n';
    }
}

void write_battery(std::ostream& out, const std::vector<BatteryEntry>& battery)
{
    out << "[battery]\n";
    out << "transform\tconfidence\n";
    for (const auto& entry : battery) {
        out << entry.transform.to_string() << '\t' << format_real(entry.confidence) << '\n';
    }
}

}  // namespace

void write_run_report(std::ostream& out, const RunContext& context, const VisualizationResult& result,
                      const TransformSchedule& schedule, const OptimConfig& config, const StoppingCriterion& stop)
{
    out << "schema ivis.run-report/1\n";
    out << "method transformation_invariant\n";
    write_context(out, context);
    write_config(out, config);
    out << "stop.q_test " << format_real(stop.q_test) << '\n';
    out << "stop.max_outer_iterations " << stop.max_outer_iterations << '\n';
    out << "schedule " << format_transforms(schedule.steps) << '\n';
    out << "battery " << format_transforms(schedule.battery) << '\n';
    out << "status " << to_string(result.trace.status) << '\n';
    out << "iterations " << result.trace.iterations.size() << '\n';
    out << "[trace]\n";
    out << "iteration\ttransform\tinner_steps\tconfidence\tbattery_min\tbattery_mean\n";
    for (const auto& record : result.trace.iterations) {
        out << record.iteration << '\t' << record.transform.to_string() << '\t' << record.inner_steps << '\t'
            << format_real(record.confidence) << '\t' << format_real(record.battery_min) << '\t'
            << format_real(record.battery_mean) << '\n';
    }
    write_battery(out, result.trace.final_battery);
}

void write_baseline_report(std::ostream& out, const RunContext& context, const BaselineResult& result,
                           const OptimConfig& config, const std::vector<BatteryEntry>& battery)
{
    out << "schema ivis.run-report/1\n";
    out << "method baseline\n";
    write_context(out, context);
    write_config(out, config);
    out << "status " << to_string(result.status) << '\n';
    out << "inner_steps " << result.steps << '\n';
    out << "final_confidence " << format_real(result.confidence_history.back()) << '\n';
    out << "[trace]\n";
    out << "step\tconfidence\n";
    for (std::size_t i = 0; i < result.confidence_history.size(); ++i) {
        out << i << '\t' << format_real(result.confidence_history[i]) << '\n';
    }
    if (!battery.empty()) {
        write_battery(out, battery);
    }
}

void write_sweep_report(std::ostream& out, const RunContext& context, const SweepReport& report,
                        const TransformSchedule& schedule, const OptimConfig& config, const StoppingCriterion& stop)
{
    out << "schema ivis.sweep-report/1\n";
    write_context(out, context);
    write_config(out, config);
    out << "stop.q_test " << format_real(stop.q_test) << '\n';
    out << "stop.max_outer_iterations " << stop.max_outer_iterations << '\n';
    out << "schedule " << format_transforms(schedule.steps) << '\n';
    out << "battery " << format_transforms(schedule.battery) << '\n';
    out << "entropy.window " << report.options.window << '\n';
    out << "entropy.stride " << report.options.stride << '\n';
    out << "best_init " << (report.best_init ? std::to_string(*report.best_init) : std::string("none")) << '\n';
    out << "[records]\n";
    out << "gray_level\timage\tstatus\touter_iterations\tbattery_min\tavg_gray_change\tsecond_order_total\t"
           "fallback\tfailure\n";
    for (const auto& record : report.records) {
        char image_id[32];
        std::snprintf(image_id, sizeof image_id, "init_%03d", record.gray_level);
        out << record.gray_level << '\t' << image_id << '\t'
            << (record.succeeded ? "ok" : "failed") << '\t' << record.outer_iterations << '\t'
            << format_real(record.battery_min) << '\t' << format_real(record.avg_gray_change) << '\t'
            << format_real(record.second_order_total) << '\t' << (record.scalar_fallback ? "yes" : "no") << '\t'
            << (record.failure.empty() ? "-" : record.failure) << '\n';
    }
}

void write_class_report(std::ostream& out, const ClassReport& report)
{
    out << "schema ivis.class-report/1\n";
    out << "k " << report.k << '\n';
    out << "[predictions]\n";
    out << "image\tvariant\trank\tclass\tpercentage\n";
    for (const auto& row : report.rows) {
        for (std::size_t rank = 0; rank < row.top_k.size(); ++rank) {
            const auto& score = row.top_k[rank];
            char percent[40];
            std::snprintf(percent, sizeof percent, "%.4f%%", 100.0 * score.confidence);
            out << row.image_id << '\t' << to_string(row.variant) << '\t' << rank + 1 << '\t' << score.name << '\t'
                << percent << '\n';
        }
    }
}

void write_entropy_report(std::ostream& out, const std::string& image_id, const GrayImage& gray,
                          const EntropyMap& map)
{
    out << "schema ivis.entropy-report/1\n";
    out << "image " << image_id << '\n';
    out << "size " << gray.width << 'x' << gray.height << '\n';
    out << "entropy2d " << format_real(entropy2d(cooccurrence(gray))) << '\n';
    out << "map.window " << map.window << '\n';
    out << "map.stride " << map.stride << '\n';
    out << "map.rows " << map.rows << '\n';
    out << "map.cols " << map.cols << '\n';
    if (map.rows >= 3 && map.cols >= 3) {
        out << "second_order_total " << format_real(second_order_entropy(map).total) << '\n';
    } else {
        out << "second_order_total unavailable\n";
    }
    out << "[map]\n";
    for (std::size_t r = 0; r < map.rows; ++r) {
        for (std::size_t c = 0; c < map.cols; ++c) {
            out << (c > 0 ? "\t" : "") << format_real(map.at(r, c));
        }
        out << '\n';
    }
}

ImageBuffer render_entropy_map(const EntropyMap& map)
{
    ImageBuffer image(map.rows, map.cols);
    for (std::size_t r = 0; r < map.rows; ++r) {
        for (std::size_t c = 0; c < map.cols; ++c) {
            const double level = quantize_entropy(map.at(r, c));
            for (std::size_t ch = 0; ch < ImageBuffer::channels; ++ch) {
                image.at(ch, r, c) = level;
            }
        }
    }
    return image;
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    out << text;
    if (!out) {
        throw Error("failed writing '" + path.string() + "'");
    }
}

}  // namespace ivis
