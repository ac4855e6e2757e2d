#include <cmath>
#include <fstream>

#include "doctest.h"
#include "ivis/entropy.hpp"
#include "ivis/error.hpp"
#include "support.hpp"

using namespace ivis;

namespace {

struct GrayCase {
    int r, g, b, expected;
};

constexpr GrayCase kGrayTable[] = {
#include "data/bt601_table.inc"
};

GrayImage random_gray(std::size_t h, std::size_t w, std::uint64_t seed, int levels = 256)
{
    Xoshiro256 rng(seed);
    GrayImage g(h, w);
    for (auto& v : g.values) {
        v = static_cast<std::uint8_t>(rng.below(static_cast<std::uint64_t>(levels)));
    }
    return g;
}

}  // namespace

TEST_CASE("BT.601 gray matches the exact rational table")
{
    std::size_t mismatches = 0;
    for (const auto& row : kGrayTable) {
        mismatches += bt601_gray(row.r, row.g, row.b) != row.expected;
    }
    CHECK(std::size(kGrayTable) == 1000);
    CHECK(mismatches == 0);
    CHECK(bt601_gray(0, 0, 0) == 0);
    CHECK(bt601_gray(255, 255, 255) == 255);
    CHECK(bt601_gray(100, 200, 50) == 153);
}

TEST_CASE("to_grayscale applies the luma per pixel")
{
    const auto image = test::random_image(6, 3, true);
    const auto gray = to_grayscale(image);
    for (std::size_t y = 0; y < 6; ++y)
        for (std::size_t x = 0; x < 6; ++x)
            CHECK(gray.at(y, x) == bt601_gray(image.at(0, y, x), image.at(1, y, x), image.at(2, y, x)));
}

TEST_CASE("co-occurrence and entropy match the brute-force oracle")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto gray = random_gray(32, 32, seed, seed % 2 == 0 ? 256 : 4);
        const auto co = cooccurrence(gray);
        const auto expected = test::oracle_cooccurrence(gray);
        CHECK(co.counts == expected);
        CHECK(co.total == 32 * 32);
        CHECK(std::abs(entropy2d(co) - test::oracle_entropy(expected)) <= 1e-12);
    }
}

TEST_CASE("constant images have exactly zero entropy")
{
    for (int level : {0, 1, 127, 255}) {
        const GrayImage gray(9, 7, static_cast<std::uint8_t>(level));
        const auto co = cooccurrence(gray);
        CHECK(co.count(level, level) == 63);
        CHECK(entropy2d(co) == 0.0);
        CHECK(!std::signbit(entropy2d(co)));
    }
}

TEST_CASE("uniform distribution over 2^k cells has exactly k bits")
{
    for (std::size_t k = 0; k <= 16; ++k) {
        CoMatrix co;
        const std::size_t cells = std::size_t{1} << k;
        for (std::size_t i = 0; i < cells; ++i) {
            co.counts[i] = 3;
        }
        co.total = 3 * cells;
        CHECK(entropy2d(co) == static_cast<double>(k));
    }
}

TEST_CASE("entropy stays within [0, 16] bits")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const double h = entropy2d(cooccurrence(random_gray(20, 20, seed)));
        CHECK(h >= 0.0);
        CHECK(h <= 16.0);
    }
}

TEST_CASE("cooccurrence rejects images smaller than 3x3")
{
    CHECK_THROWS_AS((void)cooccurrence(GrayImage(2, 5)), ShapeError);
}

TEST_CASE("entropy map tiles windows at the stride")
{
    const auto gray = random_gray(64, 64, 5);
    const auto map = entropy_map(gray);
    CHECK(map.rows == 3);
    CHECK(map.cols == 3);
    GrayImage tile(32, 32);
    for (std::size_t y = 0; y < 32; ++y)
        for (std::size_t x = 0; x < 32; ++x)
            tile.at(y, x) = gray.at(16 + y, 32 + x);
    CHECK(map.at(1, 2) == entropy2d(cooccurrence(tile)));
    CHECK_THROWS_AS((void)entropy_map(gray, 65, 16), ShapeError);
}

TEST_CASE("entropy quantization is linear and truncated")
{
    CHECK(quantize_entropy(0.0) == 0);
    CHECK(quantize_entropy(16.0) == 255);
    CHECK(quantize_entropy(8.0) == 127);
    CHECK(quantize_entropy(1.0) == 15);
}

TEST_CASE("second-order entropy needs a 3x3 map")
{
    const auto small = entropy_map(random_gray(40, 40, 1));
    CHECK(small.rows == 1);
    CHECK_THROWS_AS((void)second_order_entropy(small), ShapeError);
    const auto flat = second_order_entropy(entropy_map(GrayImage(64, 64, 9)));
    CHECK(flat.total == 0.0);
}

TEST_CASE("average gray change is the mean absolute luma difference")
{
    const auto a = ImageBuffer::gray(4, 10.0);
    const auto b = ImageBuffer::gray(4, 30.0);
    CHECK(avg_gray_change(a, b) == 20.0);
    CHECK(avg_gray_change(a, a) == 0.0);
}

TEST_CASE("best init is the argmax over successes with ties to the smaller level")
{
    std::vector<SweepRecord> records(4);
    const int levels[] = {0, 10, 20, 30};
    const double totals[] = {5.0, 7.0, 7.0, 9.0};
    const bool ok[] = {true, true, true, false};
    for (int i = 0; i < 4; ++i) {
        records[i].gray_level = levels[i];
        records[i].second_order_total = totals[i];
        records[i].succeeded = ok[i];
    }
    CHECK(select_best_init(records) == 10);
    for (auto& r : records) r.succeeded = false;
    CHECK(!select_best_init(records).has_value());
}

TEST_CASE("default gray levels are 0, 10, ..., 250, 255")
{
    const auto levels = default_gray_levels();
    REQUIRE(levels.size() == 27);
    CHECK(levels.front() == 0);
    CHECK(levels[25] == 250);
    CHECK(levels.back() == 255);
}
