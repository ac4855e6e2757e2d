#include "doctest.h"
#include "ivis/error.hpp"
#include "ivis/network.hpp"
#include "ivis/screening.hpp"
#include "support.hpp"

using namespace ivis;

namespace {

std::size_t changed_pixels(const ImageBuffer& a, const ImageBuffer& b)
{
    std::size_t changed = 0;
    for (std::size_t y = 0; y < a.height(); ++y)
        for (std::size_t x = 0; x < a.width(); ++x) {
            bool differs = false;
            for (std::size_t c = 0; c < 3; ++c) differs |= a.at(c, y, x) != b.at(c, y, x);
            changed += differs;
        }
    return changed;
}

Model model_with_norm(PixelNorm norm)
{
    auto model = test::random_model(3, 16);
    model.pixel_norm = norm;
    return model;
}

}  // namespace

TEST_CASE("zero square changes exactly the rectangle's pixels")
{
    Xoshiro256 rng(12);
    for (int trial = 0; trial < 40; ++trial) {
        const auto norm = trial % 2 == 0 ? PixelNorm::unit_01 : PixelNorm::signed_11;
        const auto model = model_with_norm(norm);
        // Half-integer offsets keep every original value away from both fill values.
        auto image = test::random_image(16, 100 + trial, true);
        for (double& v : image.values()) v = std::min(v, 254.0) + 0.25;
        ScreenRect rect;
        rect.w = 1 + rng.below(16);
        rect.h = 1 + rng.below(16);
        rect.x = rng.below(16 - rect.w + 1);
        rect.y = rng.below(16 - rect.h + 1);
        const auto screened = zero_square(image, rect, model);
        CHECK(changed_pixels(image, screened) == rect.w * rect.h);
        const auto input = normalize_input(model, screened);
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = rect.y; y < rect.y + rect.h; ++y)
                for (std::size_t x = rect.x; x < rect.x + rect.w; ++x)
                    CHECK(input[(c * 16 + y) * 16 + x] == 0.0);
    }
}

TEST_CASE("screening the full image under unit_01 gives an all-zero input")
{
    const auto model = model_with_norm(PixelNorm::unit_01);
    const auto screened = zero_square(test::random_image(16, 5), ScreenRect{0, 0, 16, 16}, model);
    const auto input = normalize_input(model, screened);
    for (double v : input.values()) CHECK(v == 0.0);
}

TEST_CASE("zero square rejects rectangles outside the image")
{
    const auto model = model_with_norm(PixelNorm::unit_01);
    const auto image = test::random_image(16, 5);
    CHECK_THROWS_AS((void)zero_square(image, ScreenRect{10, 0, 7, 2}, model), ArgumentError);
    CHECK_THROWS_AS((void)zero_square(image, ScreenRect{0, 16, 1, 1}, model), ArgumentError);
    CHECK(zero_square(image, ScreenRect{3, 3, 0, 0}, model) == image);
}

TEST_CASE("rectangles parse from x,y,w,h")
{
    const auto rect = parse_rect("1,2,3,4");
    CHECK(rect.x == 1);
    CHECK(rect.y == 2);
    CHECK(rect.w == 3);
    CHECK(rect.h == 4);
    CHECK_THROWS_AS((void)parse_rect("1,2,3"), ArgumentError);
    CHECK_THROWS_AS((void)parse_rect("1,2,3,-4"), ArgumentError);
}

TEST_CASE("inversion is an involution on display values")
{
    const auto image = test::random_image(9, 2, true);
    const auto inverted = invert(image);
    CHECK(inverted.at(1, 3, 4) == 255.0 - image.at(1, 3, 4));
    CHECK(invert(inverted) == image);
}

TEST_CASE("class reports list top-k per image and variant")
{
    const auto model = test::random_model(8, 16, 4);
    const std::vector<NamedImage> images = {{"a", test::random_image(16, 1)}, {"b", test::random_image(16, 2)}};
    const ScreenRect rect{2, 2, 4, 4};
    const auto report = classify_report(
        model, images, 2, {ImageVariant::original, ImageVariant::screened, ImageVariant::inverted}, &rect);
    REQUIRE(report.rows.size() == 6);
    CHECK(report.rows[0].image_id == "a");
    CHECK(report.rows[2].variant == ImageVariant::inverted);
    CHECK(report.rows[4].image_id == "b");
    CHECK(report.rows[1].top_k == forward(model, zero_square(images[0].image, rect, model), 2).top_k);
    CHECK(report.rows[5].top_k == forward(model, invert(images[1].image), 2).top_k);
    CHECK(report.rows[0].top_k.size() == 2);
    CHECK_THROWS_AS((void)classify_report(model, images, 1, {ImageVariant::screened}), ArgumentError);
    CHECK(classify_report(model, images, 10, {ImageVariant::original}).k == 4);
}
