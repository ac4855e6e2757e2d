#include "ivis/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "ivis/error.hpp"

namespace ivis {

std::uint8_t bt601_gray(double r, double g, double b) noexcept
{
    const double weighted = (30.0 * r + 59.0 * g + 11.0 * b) / 100.0;
    return static_cast<std::uint8_t>(std::clamp(std::trunc(weighted), 0.0, 255.0));
}

GrayImage to_grayscale(const ImageBuffer& image)
{
    GrayImage gray(image.height(), image.width());
    for (std::size_t y = 0; y < image.height(); ++y) {
        for (std::size_t x = 0; x < image.width(); ++x) {
            gray.at(y, x) = bt601_gray(image.at(0, y, x), image.at(1, y, x), image.at(2, y, x));
        }
    }
    return gray;
}

CoMatrix cooccurrence(const GrayImage& gray)
{
    if (gray.height < 3 || gray.width < 3) {
        throw ShapeError("co-occurrence needs at least a 3x3 image, got " + std::to_string(gray.height) + "x" +
                         std::to_string(gray.width));
    }
    CoMatrix co;
    const auto h = static_cast<long long>(gray.height);
    const auto w = static_cast<long long>(gray.width);
    for (long long y = 0; y < h; ++y) {
        for (long long x = 0; x < w; ++x) {
            unsigned sum = 0;
            for (long long dy = -1; dy <= 1; ++dy) {
                for (long long dx = -1; dx <= 1; ++dx) {
                    if (dy == 0 && dx == 0) {
                        continue;
                    }
                    const auto ny = std::clamp(y + dy, 0LL, h - 1);
                    const auto nx = std::clamp(x + dx, 0LL, w - 1);
                    sum += gray.at(static_cast<std::size_t>(ny), static_cast<std::size_t>(nx));
                }
            }
            // Mean of 8 values, rounded half away from zero.
            const unsigned j = (sum + 4) / 8;
            const unsigned i = gray.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x));
            ++co.counts[i * CoMatrix::levels + j];
        }
    }
    co.total = static_cast<std::uint64_t>(h * w);
    return co;
}

double entropy2d(const CoMatrix& co)
{
    if (co.total == 0) {
        throw ArgumentError("entropy of an empty co-occurrence matrix");
    }
    const double total = static_cast<double>(co.total);
    double entropy = 0.0;
    for (const auto count : co.counts) {
        if (count != 0) {
            const double p = static_cast<double>(count) / total;
            entropy -= p * std::log2(p);
        }
    }
    return entropy <= 0.0 ? 0.0 : std::min(entropy, 16.0);
}

EntropyMap entropy_map(const GrayImage& gray, std::size_t window, std::size_t stride)
{
    if (stride < 1) {
        throw ArgumentError("entropy map stride must be >= 1");
    }
    if (window < 3 || window > std::min(gray.height, gray.width)) {
        throw ShapeError("entropy window " + std::to_string(window) + " does not fit a " +
                         std::to_string(gray.height) + "x" + std::to_string(gray.width) +
                         " image (needs 3 <= window <= min(H, W))");
    }
    EntropyMap map;
    map.window = window;
    map.stride = stride;
    map.rows = (gray.height - window) / stride + 1;
    map.cols = (gray.width - window) / stride + 1;
    map.values.reserve(map.rows * map.cols);
    GrayImage tile(window, window);
    for (std::size_t r = 0; r < map.rows; ++r) {
        for (std::size_t c = 0; c < map.cols; ++c) {
            for (std::size_t y = 0; y < window; ++y) {
                for (std::size_t x = 0; x < window; ++x) {
                    tile.at(y, x) = gray.at(r * stride + y, c * stride + x);
                }
            }
            map.values.push_back(entropy2d(cooccurrence(tile)));
        }
    }
    return map;
}

std::uint8_t quantize_entropy(double bits) noexcept
{
    return static_cast<std::uint8_t>(std::clamp(std::trunc(bits / 16.0 * 255.0), 0.0, 255.0));
}

SecondOrderEntropy second_order_entropy(const EntropyMap& map)
{
    if (map.rows < 3 || map.cols < 3) {
        throw ShapeError("second-order entropy needs at least 3x3 map cells, got " + std::to_string(map.rows) +
                         "x" + std::to_string(map.cols));
    }
    SecondOrderEntropy result;
    result.quantized = GrayImage(map.rows, map.cols);
    for (std::size_t i = 0; i < map.values.size(); ++i) {
        result.quantized.values[i] = quantize_entropy(map.values[i]);
    }
    result.total = entropy2d(cooccurrence(result.quantized));
    return result;
}

double avg_gray_change(const ImageBuffer& init, const ImageBuffer& final_image)
{
    if (init.height() != final_image.height() || init.width() != final_image.width()) {
        throw ShapeError("avg_gray_change needs images of equal size");
    }
    const auto a = to_grayscale(init);
    const auto b = to_grayscale(final_image);
    if (a.values.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        total += std::abs(static_cast<double>(b.values[i]) - static_cast<double>(a.values[i]));
    }
    return total / static_cast<double>(a.values.size());
}

std::vector<int> default_gray_levels()
{
    std::vector<int> levels;
    for (int g = 0; g <= 250; g += 10) {
        levels.push_back(g);
    }
    levels.push_back(255);
    return levels;
}

std::optional<int> select_best_init(const std::vector<SweepRecord>& records)
{
    std::optional<int> best;
    double best_total = 0.0;
    for (const auto& record : records) {
        if (!record.succeeded) {
            continue;
        }
        if (!best || record.second_order_total > best_total ||
            (record.second_order_total == best_total && record.gray_level < *best)) {
            best = record.gray_level;
            best_total = record.second_order_total;
        }
    }
    return best;
}

SweepReport init_sweep(const Model& model, std::size_t target_class, const TransformSchedule& schedule,
                       const OptimConfig& config, const StoppingCriterion& stop, std::vector<int> gray_levels,
                       const SweepOptions& options)
{
    if (gray_levels.empty()) {
        throw ArgumentError("init sweep needs at least one gray level");
    }
    for (const int level : gray_levels) {
        if (level < 0 || level > 255) {
            throw ArgumentError("gray level " + std::to_string(level) + " outside [0, 255]");
        }
    }
    std::sort(gray_levels.begin(), gray_levels.end());
    gray_levels.erase(std::unique(gray_levels.begin(), gray_levels.end()), gray_levels.end());

    SweepReport report;
    report.options = options;
    const auto size = model.image_width();
    for (const int level : gray_levels) {
        SweepRecord record;
        record.gray_level = level;
        const auto init = ImageBuffer::gray(size, static_cast<double>(level));
        try {
            auto run = visualize(model, target_class, init, schedule, config, stop);
            record.status = run.trace.status;
            record.outer_iterations = run.trace.iterations.size();
            record.battery_min = run.trace.iterations.back().battery_min;
            record.avg_gray_change = avg_gray_change(init, run.image);
            const auto gray = to_grayscale(run.image);
            try {
                record.second_order_total =
                    second_order_entropy(entropy_map(gray, options.window, options.stride)).total;
            } catch (const ShapeError&) {
                record.second_order_total = entropy2d(cooccurrence(gray));
                record.scalar_fallback = true;
            }
            record.image = std::move(run.image);
            record.succeeded = record.status == RunStatus::converged;
            if (!record.succeeded) {
                record.failure = "visualization did not converge (" + std::string(to_string(record.status)) + ")";
            }
        } catch (const Error& e) {
            record.succeeded = false;
            record.failure = e.what();
        }
        report.records.push_back(std::move(record));
    }
    report.best_init = select_best_init(report.records);
    return report;
}

}  // namespace ivis
