#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "ivis/dataset.hpp"
#include "ivis/error.hpp"
#include "ivis/network.hpp"
#include "ivis/trainer.hpp"
#include "support.hpp"

using namespace ivis;

namespace {

Model tiny_architecture(std::size_t size)
{
    Model model;
    model.input_shape = {3, size, size};
    model.class_names = shape_class_names();
    model.layers = {LayerSpec::conv2d(Tensor({4, 3, 3, 3}), Tensor({4}), 2, 1), LayerSpec::relu(),
                    LayerSpec::maxpool2x2(), LayerSpec::flatten(),
                    LayerSpec::dense(Tensor({6, 4 * (size / 4) * (size / 4)}), Tensor({6}))};
    return model;
}

double oracle_cross_entropy(const Model& model, const Tensor& input, std::size_t label)
{
    return static_cast<double>(-std::log(test::oracle_objective(model, input, label, false)));
}

}  // namespace

TEST_CASE("dataset generation is deterministic and balanced")
{
    const auto a = generate_dataset(3, 4, 32);
    const auto b = generate_dataset(3, 4, 32);
    CHECK(a == b);
    REQUIRE(a.size() == 24);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.labels[i] == i % 6);
        CHECK(a.params[i].shape == static_cast<ShapeClass>(i % 6));
        CHECK(a.images[i].height() == 32);
    }
    CHECK(!(generate_dataset(4, 4, 32) == a));
    // Per-sample streams: a larger dataset extends a smaller one.
    const auto c = generate_dataset(3, 5, 32);
    CHECK(std::equal(a.images.begin(), a.images.end(), c.images.begin()));
}

TEST_CASE("rendered shapes are gray, two-toned and brighter than the background")
{
    const auto data = generate_dataset(11, 6);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& p = data.params[i];
        CHECK(p.foreground > p.background);
        CHECK(p.foreground <= 255.0);
        CHECK(p.background >= 0.0);
        std::size_t covered = 0;
        const auto& image = data.images[i];
        for (std::size_t y = 0; y < image.height(); ++y)
            for (std::size_t x = 0; x < image.width(); ++x) {
                const double v = image.at(0, y, x);
                CHECK(image.at(1, y, x) == v);
                CHECK(image.at(2, y, x) == v);
                const bool inside = shape_covers(p, static_cast<double>(x), static_cast<double>(y));
                CHECK(v == (inside ? p.foreground : p.background));
                covered += inside;
            }
        CHECK(covered > 0);
        CHECK(covered < image.plane_size());
    }
}

TEST_CASE("disk coverage follows the geometric definition")
{
    ShapeParams p;
    p.shape = ShapeClass::disk;
    p.centre_x = 20;
    p.centre_y = 30;
    p.radius = 10;
    CHECK(shape_covers(p, 20, 30));
    CHECK(shape_covers(p, 29.9, 30));
    CHECK(!shape_covers(p, 30.1, 30));
    CHECK(!shape_covers(p, 28, 38));
}

TEST_CASE("shape class names parse back")
{
    for (std::size_t i = 0; i < kShapeClassCount; ++i) {
        CHECK(parse_shape_class(kShapeClassNames[i]) == static_cast<ShapeClass>(i));
    }
    CHECK_THROWS_AS((void)parse_shape_class("triangle"), ArgumentError);
}

TEST_CASE("datasets round trip through a directory")
{
    const auto dir = std::filesystem::temp_directory_path() / "ivis_test_dataset";
    std::filesystem::remove_all(dir);
    const auto data = generate_dataset(8, 2, 16);
    save_dataset(data, dir);
    const auto loaded = load_dataset(dir);
    CHECK(loaded.images == data.images);
    CHECK(loaded.labels == data.labels);
    CHECK(loaded.image_size == 16);
    std::filesystem::remove_all(dir);
}

TEST_CASE("split is a seeded partition")
{
    for (std::size_t n : {2u, 10u, 101u}) {
        const auto split = split_dataset(n, 0.2, 7);
        CHECK(!split.train.empty());
        CHECK(!split.validation.empty());
        std::set<std::size_t> all(split.train.begin(), split.train.end());
        all.insert(split.validation.begin(), split.validation.end());
        CHECK(all.size() == n);
        CHECK(split.train.size() + split.validation.size() == n);
        const auto again = split_dataset(n, 0.2, 7);
        CHECK(again.train == split.train);
        CHECK(again.validation == split.validation);
    }
}

TEST_CASE("parameter gradients match finite differences of the cross-entropy")
{
    constexpr double h = 1e-5;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto model = test::random_model(seed);
        const auto input = normalize_input(model, test::random_image(8, seed + 50));
        const std::size_t label = seed % model.num_classes();
        const auto pass = forward_pass(model, input);
        auto grad_out = Tensor({model.num_classes()}, softmax(pass.output.values()));
        grad_out[label] -= 1.0;
        auto grads = zero_gradients(model);
        (void)backward_pass(model, pass, grad_out, &grads);
        std::vector<std::size_t> base_pattern;
        (void)test::oracle_logits(model, input, &base_pattern);
        double worst = 0.0;
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            if (!model.layers[l].has_parameters()) continue;
            for (Tensor* param : {&model.layers[l].weight, &model.layers[l].bias}) {
                const Tensor& analytic = param == &model.layers[l].weight ? grads[l].weight : grads[l].bias;
                for (std::size_t i = 0; i < param->size(); ++i) {
                    const double saved = (*param)[i];
                    std::vector<std::size_t> up_pattern, down_pattern;
                    (*param)[i] = saved + h;
                    const double up = oracle_cross_entropy(model, input, label);
                    (void)test::oracle_logits(model, input, &up_pattern);
                    (*param)[i] = saved - h;
                    const double down = oracle_cross_entropy(model, input, label);
                    (void)test::oracle_logits(model, input, &down_pattern);
                    (*param)[i] = saved;
                    if (up_pattern != base_pattern || down_pattern != base_pattern) {
                        continue;  // stencil crosses a kink
                    }
                    const double fd = (up - down) / (2 * h);
                    const double scale = std::max(std::abs(fd), std::abs(analytic[i]));
                    worst = std::max(worst, std::abs(fd - analytic[i]) / std::max(scale, 1e-3));
                }
            }
        }
        CHECK(worst <= 1e-5);
    }
}

TEST_CASE("weight initialization is seeded and bounded by the fan-in")
{
    auto a = reference_architecture();
    auto b = reference_architecture();
    initialize_weights(a, 1);
    initialize_weights(b, 1);
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        CHECK(a.layers[l].weight == b.layers[l].weight);
        if (!a.layers[l].has_parameters()) continue;
        const double bound = std::sqrt(static_cast<double>(a.layers[l].weight.dim(0)) /
                                       static_cast<double>(a.layers[l].weight.size()));
        for (double w : a.layers[l].weight.values()) CHECK(std::abs(w) <= bound);
        for (double v : a.layers[l].bias.values()) CHECK(v == 0.0);
    }
    CHECK(validate_model(reference_architecture()).back() == Shape{6});
}

TEST_CASE("training is deterministic and reduces the loss")
{
    const auto data = generate_dataset(5, 8, 16);
    TrainConfig config;
    config.epochs = 6;
    config.seed = 9;
    const auto first = train(data, tiny_architecture(16), config);
    const auto second = train(data, tiny_architecture(16), config);
    CHECK(first.log == second.log);
    CHECK(first.model.layers.back().weight == second.model.layers.back().weight);
    REQUIRE(first.log.size() == 6);
    CHECK(first.log.back().train_loss < first.log.front().train_loss);
    for (const auto& record : first.log) {
        CHECK(record.val_accuracy >= 0.0);
        CHECK(record.val_accuracy <= 1.0);
    }
}

TEST_CASE("training reports divergence with its epoch")
{
    const auto data = generate_dataset(5, 4, 16);
    TrainConfig config;
    config.epochs = 3;
    config.learning_rate = 1e300;
    try {
        (void)train(data, tiny_architecture(16), config);
        FAIL("expected divergence");
    } catch (const TrainingDivergedError& e) {
        CHECK(e.epoch() >= 1);
        CHECK(e.epoch() <= 3);
    }
}

TEST_CASE("training rejects an architecture that does not match the images")
{
    const auto data = generate_dataset(5, 1, 16);
    CHECK_THROWS_AS((void)train(data, tiny_architecture(32), TrainConfig{}), ShapeError);
}

TEST_CASE("zero learning rate leaves the initialized weights unchanged")
{
    const auto data = generate_dataset(6, 3, 16);
    TrainConfig config;
    config.epochs = 2;
    config.learning_rate = 0.0;
    config.seed = 4;
    const auto result = train(data, tiny_architecture(16), config);
    auto untrained = tiny_architecture(16);
    initialize_weights(untrained, derive_seed(config.seed, 0x1417));
    for (std::size_t l = 0; l < untrained.layers.size(); ++l) {
        CHECK(result.model.layers[l].weight == untrained.layers[l].weight);
        CHECK(result.model.layers[l].bias == untrained.layers[l].bias);
    }
    CHECK(result.log.back().val_accuracy == evaluate(untrained, data, result.split.validation));
}

TEST_CASE("a single-class dataset is classified perfectly after training")
{
    const auto full = generate_dataset(2, 6, 16);
    ShapeDataset data;
    data.image_size = 16;
    for (std::size_t i = 0; i < full.size(); ++i) {
        if (full.labels[i] == 0) {
            data.images.push_back(full.images[i]);
            data.labels.push_back(0);
            data.params.push_back(full.params[i]);
        }
    }
    TrainConfig config;
    config.epochs = 3;
    const auto result = train(data, tiny_architecture(16), config);
    CHECK(evaluate(result.model, data) == 1.0);
}
