#include "ivis/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "ivis/network.hpp"
#include "ivis/rng.hpp"

namespace ivis {

Model reference_architecture(std::size_t image_size)
{
    Model model;
    model.input_shape = {3, image_size, image_size};
    model.class_names = shape_class_names();
    model.pixel_norm = PixelNorm::unit_01;
    model.layers = {
        LayerSpec::conv2d(Tensor({16, 3, 5, 5}), Tensor({16}), 2, 2),
        LayerSpec::relu(),
        LayerSpec::maxpool2x2(),
        LayerSpec::conv2d(Tensor({32, 16, 5, 5}), Tensor({32}), 1, 2),
        LayerSpec::relu(),
    };
    // Halve until one cell remains: a global max over each channel.
    for (std::size_t side = (image_size / 2) / 2; side > 1; side /= 2) {
        model.layers.push_back(LayerSpec::maxpool2x2());
    }
    model.layers.push_back(LayerSpec::flatten());
    model.layers.push_back(LayerSpec::dense(Tensor({kShapeClassCount, 32}), Tensor({kShapeClassCount})));
    return model;
}

void initialize_weights(Model& model, std::uint64_t seed)
{
    Xoshiro256 rng(seed);
    for (auto& layer : model.layers) {
        if (!layer.has_parameters()) {
            continue;
        }
        const auto fan_in = element_count(layer.weight.shape()) / layer.weight.dim(0);
        const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
        for (double& w : layer.weight.values()) {
            w = rng.uniform(-bound, bound);
        }
        layer.bias.fill(0.0);
    }
}

namespace {

void shuffle(std::vector<std::size_t>& items, Xoshiro256& rng)
{
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(items[i - 1], items[j]);
    }
}

std::vector<std::size_t> all_indices(std::size_t count)
{
    std::vector<std::size_t> indices(count);
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    return indices;
}

}  // namespace

DatasetSplit split_dataset(std::size_t count, double val_fraction, std::uint64_t seed)
{
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
        throw ArgumentError("validation fraction must lie in (0, 1)");
    }
    auto order = all_indices(count);
    Xoshiro256 rng(derive_seed(seed, 0x5b1170));
    shuffle(order, rng);
    auto val_count = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(count)));
    if (count >= 2) {
        val_count = std::clamp<std::size_t>(val_count, 1, count - 1);
    }
    DatasetSplit split;
    split.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(val_count));
    split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(val_count), order.end());
    std::sort(split.validation.begin(), split.validation.end());
    std::sort(split.train.begin(), split.train.end());
    return split;
}

TrainResult train(const ShapeDataset& dataset, Model architecture, const TrainConfig& config)
{
    if (dataset.size() == 0) {
        throw ArgumentError("cannot train on an empty dataset");
    }
    if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
        throw ArgumentError("learning rate must be finite and non-negative");
    }
    if (config.batch_size == 0) {
        throw ArgumentError("batch size must be >= 1");
    }
    if (architecture.input_shape != Shape{3, dataset.image_size, dataset.image_size}) {
        throw ShapeError("architecture input " + shape_string(architecture.input_shape) +
                         " does not match dataset images " + std::to_string(dataset.image_size) + "x" +
                         std::to_string(dataset.image_size));
    }
    (void)validate_model(architecture);

    TrainResult result;
    result.model = std::move(architecture);
    Model& model = result.model;
    initialize_weights(model, derive_seed(config.seed, 0x1417));
    result.split = split_dataset(dataset.size(), config.val_fraction, config.seed);

    // Normalized inputs are reused every epoch.
    std::vector<Tensor> inputs;
    inputs.reserve(dataset.size());
    for (const auto& image : dataset.images) {
        inputs.push_back(normalize_input(model, image));
    }

    auto order = result.split.train;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        Xoshiro256 rng(derive_seed(config.seed, epoch));
        shuffle(order, rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const auto stop = std::min(order.size(), start + config.batch_size);
            auto grads = zero_gradients(model);
            for (std::size_t k = start; k < stop; ++k) {
                const auto sample = order[k];
                const auto label = dataset.labels[sample];
                ForwardPass pass;
                try {
                    pass = forward_pass(model, inputs[sample]);
                } catch (const NumericError& e) {
                    throw TrainingDivergedError(epoch, "training diverged in epoch " + std::to_string(epoch) +
                                                           ": " + e.what());
                }
                const auto p = softmax(pass.output.values());
                loss_sum -= std::log(std::max(p[label], 1e-300));
                Tensor seed(pass.output.shape());
                for (std::size_t c = 0; c < p.size(); ++c) {
                    seed[c] = p[c] - (c == label ? 1.0 : 0.0);
                }
                (void)backward_pass(model, pass, seed, &grads);
            }
            const double step = config.learning_rate / static_cast<double>(stop - start);
            for (std::size_t i = 0; i < model.layers.size(); ++i) {
                auto& layer = model.layers[i];
                if (!layer.has_parameters()) {
                    continue;
                }
                auto w = layer.weight.values();
                const auto gw = grads[i].weight.values();
                for (std::size_t j = 0; j < w.size(); ++j) {
                    w[j] -= step * gw[j];
                }
                auto b = layer.bias.values();
                const auto gb = grads[i].bias.values();
                for (std::size_t j = 0; j < b.size(); ++j) {
                    b[j] -= step * gb[j];
                }
            }
        }
        const double train_loss = loss_sum / static_cast<double>(order.size());
        if (!std::isfinite(train_loss)) {
            throw TrainingDivergedError(epoch, "training loss became non-finite in epoch " + std::to_string(epoch));
        }
        const double val_accuracy =
            result.split.validation.empty() ? 0.0 : evaluate(model, dataset, result.split.validation);
        result.log.push_back({epoch, train_loss, val_accuracy});
    }
    return result;
}

double evaluate(const Model& model, const ShapeDataset& dataset, std::span<const std::size_t> indices)
{
    const auto chosen = indices.empty() ? all_indices(dataset.size())
                                        : std::vector<std::size_t>(indices.begin(), indices.end());
    if (chosen.empty()) {
        return 0.0;
    }
    std::size_t correct = 0;
    for (const auto i : chosen) {
        const auto prediction = forward(model, dataset.images.at(i), 1);
        if (prediction.top_k.front().index == dataset.labels.at(i)) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(chosen.size());
}

double mean_cross_entropy(const Model& model, const ShapeDataset& dataset, std::span<const std::size_t> indices)
{
    const auto chosen = indices.empty() ? all_indices(dataset.size())
                                        : std::vector<std::size_t>(indices.begin(), indices.end());
    double total = 0.0;
    for (const auto i : chosen) {
        const auto prediction = forward(model, dataset.images.at(i), 1);
        total -= std::log(std::max(prediction.confidences[dataset.labels.at(i)], 1e-300));
    }
    return chosen.empty() ? 0.0 : total / static_cast<double>(chosen.size());
}

void write_training_log(const std::vector<EpochRecord>& log, const TrainConfig& config,
                        const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write training log '" + path.string() + "'");
    }
    out.precision(17);
    out << "schema ivis.training-log/1\n";
    out << "seed " << config.seed << "\n";
    out << "epochs " << config.epochs << "\n";
    out << "learning_rate " << config.learning_rate << "\n";
    out << "batch_size " << config.batch_size << "\n";
    out << "val_fraction " << config.val_fraction << "\n";
    out << "epoch\ttrain_loss\tval_accuracy\n";
    for (const auto& record : log) {
        out << record.epoch << '\t' << record.train_loss << '\t' << record.val_accuracy << '\n';
    }
}

}  // namespace ivis
