#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ivis/dataset.hpp"
#include "ivis/error.hpp"
#include "ivis/model.hpp"

namespace ivis {

/// Seed of the reference training run (dataset and weights).
inline constexpr std::uint64_t kReferenceSeed = 20211019;

struct TrainConfig {
    std::size_t epochs = 30;
    double learning_rate = 0.1;
    std::size_t batch_size = 16;
    std::uint64_t seed = kReferenceSeed;
    double val_fraction = 0.2;  // held-out share, in (0, 1)
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;  // mean cross-entropy over the epoch's minibatches
    double val_accuracy = 0.0;

    friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct DatasetSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

struct TrainResult {
    Model model;
    std::vector<EpochRecord> log;
    DatasetSplit split;
};

/// Raised when the loss turns non-finite; carries the 1-based epoch.
class TrainingDivergedError : public NumericError {
public:
    TrainingDivergedError(std::size_t epoch, const std::string& what) : NumericError(what), epoch_(epoch) {}

    [[nodiscard]] std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

/// Untrained reference classifier for square power-of-two inputs:
/// conv5x5/2(3->16) relu pool conv5x5(16->32) relu, then 2x2 max pools down to
/// 1x1, flatten, dense(32->6). Parameters are zero until initialized.
[[nodiscard]] Model reference_architecture(std::size_t image_size = kDefaultImageSize);

/// Uniform(-a, a) weights with a = sqrt(1 / fan_in), zero biases.
void initialize_weights(Model& model, std::uint64_t seed);

/// Seeded shuffle split; both parts are non-empty when the dataset has >= 2 samples.
[[nodiscard]] DatasetSplit split_dataset(std::size_t count, double val_fraction, std::uint64_t seed);

/// Initializes `architecture` from config.seed and runs plain minibatch SGD on
/// softmax cross-entropy. Single-threaded and bit-deterministic.
[[nodiscard]] TrainResult train(const ShapeDataset& dataset, Model architecture, const TrainConfig& config);

/// Top-1 accuracy over `indices` (every sample when empty).
[[nodiscard]] double evaluate(const Model& model, const ShapeDataset& dataset,
                              std::span<const std::size_t> indices = {});

/// Mean softmax cross-entropy over `indices` (every sample when empty).
[[nodiscard]] double mean_cross_entropy(const Model& model, const ShapeDataset& dataset,
                                        std::span<const std::size_t> indices = {});

void write_training_log(const std::vector<EpochRecord>& log, const TrainConfig& config,
                        const std::filesystem::path& path);

}  // namespace ivis
