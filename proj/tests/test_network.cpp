#include <cmath>
#include <numeric>

#include "doctest.h"
#include "ivis/error.hpp"
#include "ivis/network.hpp"
#include "support.hpp"

using namespace ivis;

namespace {

Model zero_dense_model(std::size_t size, std::size_t classes)
{
    Model model;
    model.input_shape = {3, size, size};
    for (std::size_t i = 0; i < classes; ++i) {
        model.class_names.push_back("c" + std::to_string(i));
    }
    model.layers = {LayerSpec::flatten(),
                    LayerSpec::dense(Tensor({classes, 3 * size * size}), Tensor({classes}))};
    return model;
}

}  // namespace

TEST_CASE("softmax of equal logits is uniform and top-k ties go to the smaller index")
{
    const auto model = zero_dense_model(4, 5);
    const auto prediction = forward(model, test::random_image(4, 1));
    for (double p : prediction.confidences) {
        CHECK(p == doctest::Approx(0.2).epsilon(1e-15));
    }
    REQUIRE(prediction.top_k.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(prediction.top_k[i].index == i);
    }
}

TEST_CASE("softmax is normalized and shift invariant")
{
    Xoshiro256 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> logits(1 + rng.below(10));
        for (double& z : logits) {
            z = rng.uniform(-50.0, 50.0);
        }
        const auto p = softmax(logits);
        CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) <= 1e-9);
        auto shifted = logits;
        const double shift = rng.uniform(-100.0, 100.0);
        for (double& z : shifted) {
            z += shift;
        }
        const auto q = softmax(shifted);
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK(std::abs(p[i] - q[i]) <= 1e-12);
        }
    }
}

TEST_CASE("identity 1x1 convolution preserves the input")
{
    Tensor weight({3, 3, 1, 1});
    for (std::size_t c = 0; c < 3; ++c) {
        weight[c * 3 + c] = 1.0;
    }
    Model model;
    model.input_shape = {3, 5, 5};
    model.class_names = {"a"};
    model.layers = {LayerSpec::conv2d(weight, Tensor({3})), LayerSpec::flatten(),
                    LayerSpec::dense(Tensor({1, 75}), Tensor({1}))};
    const auto input = normalize_input(model, test::random_image(5, 3));
    const auto pass = forward_pass(model, input);
    CHECK(pass.inputs[1] == input);
}

TEST_CASE("forward matches the direct-summation oracle")
{
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto model = test::random_model(seed);
        const auto input = normalize_input(model, test::random_image(8, 1000 + seed));
        const auto prediction = forward_normalized(model, input);
        const auto expected = test::oracle_logits(model, input);
        REQUIRE(prediction.logits.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            CHECK(std::abs(prediction.logits[i] - expected[i]) <= 1e-10);
        }
    }
}

TEST_CASE("forward is deterministic")
{
    const auto model = test::random_model(11);
    const auto image = test::random_image(8, 12);
    CHECK(forward(model, image) == forward(model, image));
}

TEST_CASE("forward rejects bad shapes and non-finite weights")
{
    auto model = test::random_model(3);
    CHECK_THROWS_AS((void)forward(model, test::random_image(9, 1)), ShapeError);

    model.layers.back().weight[0] = std::nan("");
    CHECK_THROWS_AS((void)forward(model, test::random_image(8, 1)), NumericError);

    auto broken = test::random_model(4);
    broken.class_names.push_back("extra");
    CHECK_THROWS_AS((void)forward(broken, test::random_image(8, 1)), ShapeError);
}

TEST_CASE("input gradient of a constant model is zero")
{
    const auto model = zero_dense_model(6, 3);
    const auto grad = input_gradient(model, test::random_image(6, 2), 1, Objective::softmax_confidence);
    for (double g : grad.values()) {
        CHECK(g == 0.0);
    }
}

TEST_CASE("logit gradient of a dense model is the target weight row times the pixel-norm slope")
{
    Xoshiro256 rng(5);
    for (const auto norm : {PixelNorm::unit_01, PixelNorm::signed_11}) {
        auto model = zero_dense_model(4, 3);
        model.pixel_norm = norm;
        model.layers[1].weight = test::random_tensor({3, 48}, rng, 1.0);
        const auto grad = input_gradient(model, test::random_image(4, 9), 2, Objective::logit);
        REQUIRE(grad.shape() == Shape{3, 4, 4});
        for (std::size_t i = 0; i < 48; ++i) {
            CHECK(grad[i] == doctest::Approx(model.layers[1].weight[2 * 48 + i] * pixel_norm_slope(norm)));
        }
    }
}

TEST_CASE("input gradient rejects an invalid class index")
{
    const auto model = test::random_model(2);
    CHECK_THROWS_AS((void)input_gradient(model, test::random_image(8, 1), 4, Objective::logit), ArgumentError);
}

TEST_CASE("analytic input gradients match central finite differences")
{
    constexpr double h = 1e-4;
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        const auto model = test::random_model(seed);
        // Redraw inputs whose stencil crosses a relu or pool kink.
        std::uint64_t image_seed = seed * 7;
        auto input = normalize_input(model, test::random_image(8, image_seed));
        while (!test::stencil_is_smooth(model, input, h)) {
            input = normalize_input(model, test::random_image(8, ++image_seed));
        }
        for (const auto objective : {Objective::softmax_confidence, Objective::logit}) {
            const std::size_t target = seed % model.num_classes();
            const auto grad = normalized_input_gradient(model, input, target, objective);
            double worst = 0.0;
            for (std::size_t i = 0; i < input.size(); ++i) {
                if (std::abs(grad[i]) <= 1e-8) {
                    continue;
                }
                Tensor plus = input, minus = input;
                plus[i] += h;
                minus[i] -= h;
                const bool logit = objective == Objective::logit;
                const double fd = static_cast<double>((test::oracle_objective(model, plus, target, logit) -
                                   test::oracle_objective(model, minus, target, logit)) /
                                  (2 * h));
                worst = std::max(worst, std::abs(fd - grad[i]) / std::max(std::abs(fd), std::abs(grad[i])));
            }
            CHECK(worst <= 1e-5);
        }
    }
}

TEST_CASE("display-unit gradient is the normalized gradient times the slope")
{
    const auto model = test::random_model(21);
    const auto image = test::random_image(8, 22);
    const auto normalized = normalized_input_gradient(model, normalize_input(model, image), 1, Objective::logit);
    const auto display = input_gradient(model, image, 1, Objective::logit);
    for (std::size_t i = 0; i < display.size(); ++i) {
        CHECK(display[i] == normalized[i] * pixel_norm_slope(model.pixel_norm));
    }
}

TEST_CASE("zero display value normalizes to exactly zero")
{
    CHECK(normalize_pixel(PixelNorm::unit_01, zero_display_value(PixelNorm::unit_01)) == 0.0);
    CHECK(normalize_pixel(PixelNorm::signed_11, zero_display_value(PixelNorm::signed_11)) == 0.0);
    CHECK(normalize_pixel(PixelNorm::signed_11, 0.0) == -1.0);
    CHECK(normalize_pixel(PixelNorm::signed_11, 255.0) == 1.0);
}

TEST_CASE("layer shape errors name the offending layer")
{
    Model model;
    model.input_shape = {3, 8, 8};
    model.class_names = {"a", "b"};
    model.layers = {LayerSpec::conv2d(Tensor({4, 2, 3, 3}), Tensor({4})), LayerSpec::flatten(),
                    LayerSpec::dense(Tensor({2, 10}), Tensor({2}))};
    try {
        (void)validate_model(model);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        CHECK(std::string(e.what()).find("layer 0") != std::string::npos);
    }
}
