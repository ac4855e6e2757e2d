#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ivis/image.hpp"
#include "ivis/model.hpp"
#include "ivis/transforms.hpp"
#include "ivis/visualizer.hpp"

namespace ivis {

/// 8-bit single-channel image.
struct GrayImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> values;  // row-major

    GrayImage() = default;
    GrayImage(std::size_t h, std::size_t w, std::uint8_t fill = 0) : height(h), width(w), values(h * w, fill) {}

    std::uint8_t& at(std::size_t y, std::size_t x) noexcept { return values[y * width + x]; }
    [[nodiscard]] std::uint8_t at(std::size_t y, std::size_t x) const noexcept { return values[y * width + x]; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// BT.601 luma, int(0.3 R + 0.59 G + 0.11 B), truncated toward zero.
/// Evaluated as (30 R + 59 G + 11 B) / 100 so integer inputs are exact.
[[nodiscard]] std::uint8_t bt601_gray(double r, double g, double b) noexcept;

[[nodiscard]] GrayImage to_grayscale(const ImageBuffer& image);

/// Joint histogram of (pixel value, rounded mean of its 8 neighbours).
struct CoMatrix {
    static constexpr std::size_t levels = 256;

    std::vector<std::uint64_t> counts = std::vector<std::uint64_t>(levels * levels, 0);
    std::uint64_t total = 0;

    [[nodiscard]] std::uint64_t count(std::size_t i, std::size_t j) const noexcept { return counts[i * levels + j]; }

    friend bool operator==(const CoMatrix&, const CoMatrix&) = default;
};

/// Neighbourhood mean uses replicate padding at the border, so total == H * W.
/// Requires at least 3x3.
[[nodiscard]] CoMatrix cooccurrence(const GrayImage& gray);

/// Shannon entropy in bits of counts / total; in [0, 16].
[[nodiscard]] double entropy2d(const CoMatrix& co);

struct EntropyMap {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t window = 0;
    std::size_t stride = 0;
    std::vector<double> values;  // row-major, each in [0, 16]

    [[nodiscard]] double at(std::size_t r, std::size_t c) const noexcept { return values[r * cols + c]; }
};

inline constexpr std::size_t kDefaultEntropyWindow = 32;
inline constexpr std::size_t kDefaultEntropyStride = 16;

/// 2D entropy of every window x window tile at the given stride.
[[nodiscard]] EntropyMap entropy_map(const GrayImage& gray, std::size_t window = kDefaultEntropyWindow,
                                     std::size_t stride = kDefaultEntropyStride);

/// Linear quantization [0, 16] bits -> [0, 255], truncated.
[[nodiscard]] std::uint8_t quantize_entropy(double bits) noexcept;

struct SecondOrderEntropy {
    double total = 0.0;
    GrayImage quantized;
};

/// 2D entropy of the quantized entropy map. Throws ShapeError below 3x3 cells.
[[nodiscard]] SecondOrderEntropy second_order_entropy(const EntropyMap& map);

/// Mean absolute difference of the BT.601 gray images.
[[nodiscard]] double avg_gray_change(const ImageBuffer& init, const ImageBuffer& final_image);

/// 0, 10, ..., 250, 255.
[[nodiscard]] std::vector<int> default_gray_levels();

struct SweepOptions {
    std::size_t window = kDefaultEntropyWindow;
    std::size_t stride = kDefaultEntropyStride;
};

struct SweepRecord {
    int gray_level = 0;
    bool succeeded = false;      // visualization converged
    std::string failure;         // empty on success
    RunStatus status = RunStatus::iteration_cap;
    std::size_t outer_iterations = 0;
    double battery_min = 0.0;
    double avg_gray_change = 0.0;
    double second_order_total = 0.0;
    bool scalar_fallback = false;  // entropy map too small; total is the plain 2D entropy
    ImageBuffer image;
};

struct SweepReport {
    std::vector<SweepRecord> records;  // ascending gray level
    std::optional<int> best_init;      // argmax second-order total over successes, ties to smaller level
    SweepOptions options;
};

/// Runs visualize from every constant (g, g, g) initialization.
[[nodiscard]] SweepReport init_sweep(const Model& model, std::size_t target_class,
                                     const TransformSchedule& schedule, const OptimConfig& config,
                                     const StoppingCriterion& stop, std::vector<int> gray_levels,
                                     const SweepOptions& options = {});

/// Best level among successful records; ties go to the smaller level.
[[nodiscard]] std::optional<int> select_best_init(const std::vector<SweepRecord>& records);

}  // namespace ivis
