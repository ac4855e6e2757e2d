// Command-line front end: one subcommand per process.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ivis/dataset.hpp"
#include "ivis/entropy.hpp"
#include "ivis/error.hpp"
#include "ivis/model_io.hpp"
#include "ivis/ppm.hpp"
#include "ivis/report.hpp"
#include "ivis/screening.hpp"
#include "ivis/trainer.hpp"
#include "ivis/visualizer.hpp"

namespace fs = std::filesystem;
using namespace ivis;

namespace {

struct Globals {
    std::uint64_t seed = kReferenceSeed;
    std::string model;
    std::string out;
    std::string report;
};

struct VisualizeOptions {
    std::string target;
    std::string init = "noise:0:8";
    std::string schedule = "rot:10x36";
    std::string battery = "rot-sweep:10";
    OptimConfig config;
    StoppingCriterion stop;
    std::string gradient_mode = "l2_normalized";
    std::string objective = "softmax_confidence";
};

std::string_view kind_name(ModelFormatErrorKind kind)
{
    switch (kind) {
    case ModelFormatErrorKind::io: return "io";
    case ModelFormatErrorKind::bad_magic: return "bad_magic";
    case ModelFormatErrorKind::unsupported_version: return "unsupported_version";
    case ModelFormatErrorKind::manifest: return "manifest";
    case ModelFormatErrorKind::length_mismatch: return "length_mismatch";
    case ModelFormatErrorKind::shape: return "shape";
    }
    return "unknown";
}

std::string_view kind_name(PpmErrorKind kind)
{
    switch (kind) {
    case PpmErrorKind::io: return "io";
    case PpmErrorKind::bad_magic: return "bad_magic";
    case PpmErrorKind::malformed_header: return "malformed_header";
    case PpmErrorKind::unsupported_depth: return "unsupported_depth";
    case PpmErrorKind::short_data: return "short_data";
    }
    return "unknown";
}

int fail(std::string_view category, std::string_view message)
{
    std::string flat(message);
    for (char& c : flat) {
        if (c == '\n' || c == '\t') c = ' ';
    }
    std::cerr << "error\t" << category << '\t' << flat << '\n';
    return 1;
}

const std::string& require(const std::string& value, const char* flag)
{
    if (value.empty()) {
        throw ArgumentError(std::string(flag) + " is required");
    }
    return value;
}

/// Writes `text` to --report when given, else to stdout.
void emit_report(const Globals& globals, const std::string& text)
{
    if (globals.report.empty()) {
        std::cout << text;
    } else {
        write_text_file(globals.report, text);
    }
}

std::size_t resolve_class(const Model& model, const std::string& name)
{
    for (std::size_t i = 0; i < model.class_names.size(); ++i) {
        if (model.class_names[i] == name) return i;
    }
    char* end = nullptr;
    const auto index = std::strtoull(name.c_str(), &end, 10);
    if (!name.empty() && *end == '\0' && index < model.num_classes()) {
        return static_cast<std::size_t>(index);
    }
    throw ArgumentError("unknown class '" + name + "'");
}

/// "black", "gray:G", "noise:BASE:AMP" (seeded) or a PPM path.
ImageBuffer make_init(const std::string& spec, std::size_t size, std::uint64_t seed)
{
    if (spec == "black") {
        return ImageBuffer::gray(size, 0.0);
    }
    if (spec.rfind("gray:", 0) == 0) {
        return ImageBuffer::gray(size, std::stod(spec.substr(5)));
    }
    if (spec.rfind("noise:", 0) == 0) {
        const auto colon = spec.find(':', 6);
        if (colon == std::string::npos) {
            throw ArgumentError("noise init needs noise:BASE:AMP");
        }
        return seeded_init(seed, size, std::stod(spec.substr(6, colon - 6)), std::stod(spec.substr(colon + 1)));
    }
    return read_ppm(spec);
}

TransformSchedule make_schedule(const VisualizeOptions& options)
{
    return {parse_schedule(options.schedule), parse_battery(options.battery)};
}

void add_visualize_options(CLI::App* cmd, VisualizeOptions& options, bool with_schedule)
{
    cmd->add_option("--class", options.target, "target class name or index")->required();
    cmd->add_option("--init", options.init, "black | gray:G | noise:BASE:AMP | image.ppm")->capture_default_str();
    if (with_schedule) {
        cmd->add_option("--schedule", options.schedule, "transform schedule")->capture_default_str();
        cmd->add_option("--q-test", options.stop.q_test, "battery threshold")->capture_default_str();
        cmd->add_option("--max-outer", options.stop.max_outer_iterations, "outer iteration cap")
            ->capture_default_str();
    }
    cmd->add_option("--battery", options.battery, "evaluation battery")->capture_default_str();
    cmd->add_option("--q-target", options.config.q_target, "inner confidence target")->capture_default_str();
    cmd->add_option("--step", options.config.step_size, "step size in display units")->capture_default_str();
    cmd->add_option("--max-inner", options.config.max_inner_steps, "inner step cap")->capture_default_str();
    cmd->add_option("--gradient-mode", options.gradient_mode, "raw | l2_normalized")->capture_default_str();
    cmd->add_option("--objective", options.objective, "softmax_confidence | logit")->capture_default_str();
}

void finalize_config(VisualizeOptions& options)
{
    options.config.gradient_mode = parse_gradient_mode(options.gradient_mode);
    options.config.objective = parse_objective(options.objective);
}

std::vector<NamedImage> collect_images(const std::vector<std::string>& inputs)
{
    std::vector<fs::path> files;
    for (const auto& input : inputs) {
        if (fs::is_directory(input)) {
            std::vector<fs::path> found;
            for (const auto& entry : fs::directory_iterator(input)) {
                if (entry.path().extension() == ".ppm") found.push_back(entry.path());
            }
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.emplace_back(input);
        }
    }
    std::vector<NamedImage> images;
    for (const auto& file : files) {
        images.push_back({file.filename().string(), read_ppm(file)});
    }
    return images;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Transformation-invariant class visualization for small CNNs"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals globals;
    app.add_option("--seed", globals.seed, "seed for every random stream")->capture_default_str();
    app.add_option("--model", globals.model, "model file (GBXM)");
    app.add_option("--out", globals.out, "primary output path");
    app.add_option("--report", globals.report, "report file (stdout when omitted)");

    std::size_t count_per_class = 100;
    std::size_t image_size = kDefaultImageSize;
    auto* make_dataset = app.add_subcommand("make-dataset", "render the synthetic shapes dataset");
    make_dataset->add_option("--count-per-class", count_per_class)->capture_default_str();
    make_dataset->add_option("--size", image_size)->capture_default_str();

    TrainConfig train_config;
    std::string data_dir;
    auto* train_cmd = app.add_subcommand("train", "train the reference classifier");
    train_cmd->add_option("--data", data_dir, "dataset directory (generated from --seed when omitted)");
    train_cmd->add_option("--count-per-class", count_per_class)->capture_default_str();
    train_cmd->add_option("--epochs", train_config.epochs)->capture_default_str();
    train_cmd->add_option("--lr", train_config.learning_rate)->capture_default_str();
    train_cmd->add_option("--batch", train_config.batch_size)->capture_default_str();
    train_cmd->add_option("--val-fraction", train_config.val_fraction)->capture_default_str();

    std::size_t top_k = 3;
    std::string variants_text = "original";
    std::string rect_text;
    std::vector<std::string> inputs;
    auto* classify = app.add_subcommand("classify", "top-k predictions for PPM images");
    classify->add_option("inputs", inputs, "PPM files or directories")->required();
    classify->add_option("--k", top_k)->capture_default_str();
    classify->add_option("--variants", variants_text, "comma list of original,screened,inverted")
        ->capture_default_str();
    classify->add_option("--rect", rect_text, "screen rectangle x,y,w,h");

    VisualizeOptions vis_options;
    auto* visualize_cmd = app.add_subcommand("visualize", "transformation-invariant visualization");
    add_visualize_options(visualize_cmd, vis_options, true);

    VisualizeOptions base_options;
    auto* baseline = app.add_subcommand("baseline", "plain gradient ascent without transforms");
    add_visualize_options(baseline, base_options, false);

    VisualizeOptions sweep_options;
    std::vector<int> levels;
    SweepOptions sweep_entropy;
    auto* sweep = app.add_subcommand("sweep-init", "visualize from constant gray levels and rank by entropy");
    add_visualize_options(sweep, sweep_options, true);
    sweep->add_option("--levels", levels, "gray levels (default 0,10,...,250,255)")->delimiter(',');
    sweep->add_option("--window", sweep_entropy.window)->capture_default_str();
    sweep->add_option("--stride", sweep_entropy.stride)->capture_default_str();

    std::string image_path;
    std::size_t window = kDefaultEntropyWindow;
    std::size_t stride = kDefaultEntropyStride;
    auto* entropy = app.add_subcommand("entropy", "2D entropy and entropy map of an image");
    entropy->add_option("image", image_path)->required();
    entropy->add_option("--window", window)->capture_default_str();
    entropy->add_option("--stride", stride)->capture_default_str();

    auto* invert_cmd = app.add_subcommand("invert", "colour inversion of a PPM image");
    invert_cmd->add_option("image", image_path)->required();

    auto* screen = app.add_subcommand("screen", "fill a rectangle with the model's zero value");
    screen->add_option("image", image_path)->required();
    screen->add_option("--rect", rect_text, "x,y,w,h")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return fail("usage", e.what());
    }

    try {
        if (make_dataset->parsed()) {
            const auto data = generate_dataset(globals.seed, count_per_class, image_size);
            save_dataset(data, require(globals.out, "--out"));
        } else if (train_cmd->parsed()) {
            const auto data = data_dir.empty() ? generate_dataset(globals.seed, count_per_class)
                                               : load_dataset(data_dir);
            train_config.seed = globals.seed;
            const auto result = train(data, reference_architecture(data.image_size), train_config);
            save_model(result.model, require(globals.out, "--out"));
            if (!globals.report.empty()) {
                write_training_log(result.log, train_config, globals.report);
            }
            std::cout << "val_accuracy " << format_real(result.log.back().val_accuracy) << '\n';
        } else if (classify->parsed()) {
            const auto model = load_model(require(globals.model, "--model"));
            std::vector<ImageVariant> variants;
            std::stringstream list(variants_text);
            for (std::string item; std::getline(list, item, ',');) {
                variants.push_back(parse_variant(item));
            }
            std::optional<ScreenRect> rect;
            if (!rect_text.empty()) rect = parse_rect(rect_text);
            const auto report =
                classify_report(model, collect_images(inputs), top_k, variants, rect ? &*rect : nullptr);
            std::ostringstream text;
            write_class_report(text, report);
            emit_report(globals, text.str());
        } else if (visualize_cmd->parsed() || baseline->parsed() || sweep->parsed()) {
            auto& options = visualize_cmd->parsed() ? vis_options : baseline->parsed() ? base_options : sweep_options;
            finalize_config(options);
            const auto model = load_model(require(globals.model, "--model"));
            const auto target = resolve_class(model, options.target);
            RunContext context{globals.model, target, model.class_names[target], options.init};
            std::ostringstream text;
            if (visualize_cmd->parsed()) {
                const auto init = make_init(options.init, model.image_width(), globals.seed);
                const auto schedule = make_schedule(options);
                const auto result = visualize(model, target, init, schedule, options.config, options.stop);
                if (!globals.out.empty()) write_ppm(result.image, globals.out);
                write_run_report(text, context, result, schedule, options.config, options.stop);
            } else if (baseline->parsed()) {
                const auto init = make_init(options.init, model.image_width(), globals.seed);
                const auto result = baseline_visualize(model, target, init, options.config);
                if (!globals.out.empty()) write_ppm(result.image, globals.out);
                const auto battery = run_battery(model, result.image, target, parse_battery(options.battery));
                write_baseline_report(text, context, result, options.config, battery);
            } else {
                context.init_description = "constant gray levels";
                const auto schedule = make_schedule(options);
                const auto report = init_sweep(model, target, schedule, options.config, options.stop,
                                               levels.empty() ? default_gray_levels() : levels, sweep_entropy);
                if (!globals.out.empty()) {
                    fs::create_directories(globals.out);
                    for (const auto& record : report.records) {
                        if (record.image.values().empty()) continue;
                        char name[32];
                        std::snprintf(name, sizeof name, "init_%03d.ppm", record.gray_level);
                        write_ppm(record.image, fs::path(globals.out) / name);
                    }
                }
                write_sweep_report(text, context, report, schedule, options.config, options.stop);
            }
            emit_report(globals, text.str());
        } else if (entropy->parsed()) {
            const auto gray = to_grayscale(read_ppm(image_path));
            const auto map = entropy_map(gray, window, stride);
            if (!globals.out.empty()) write_ppm(render_entropy_map(map), globals.out);
            std::ostringstream text;
            write_entropy_report(text, fs::path(image_path).filename().string(), gray, map);
            emit_report(globals, text.str());
        } else if (invert_cmd->parsed()) {
            write_ppm(invert(read_ppm(image_path)), require(globals.out, "--out"));
        } else if (screen->parsed()) {
            const auto model = load_model(require(globals.model, "--model"));
            write_ppm(zero_square(read_ppm(image_path), parse_rect(rect_text), model), require(globals.out, "--out"));
        }
    } catch (const ModelFormatError& e) {
        return fail("model_format." + std::string(kind_name(e.kind())), e.what());
    } catch (const PpmError& e) {
        return fail("ppm." + std::string(kind_name(e.kind())), e.what());
    } catch (const ShapeError& e) {
        return fail("shape", e.what());
    } catch (const NumericError& e) {
        return fail("numeric", e.what());
    } catch (const ArgumentError& e) {
        return fail("argument", e.what());
    } catch (const std::invalid_argument& e) {
        return fail("argument", e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return 0;
}
