#include "ivis/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ivis/error.hpp"
#include "ivis/ppm.hpp"

namespace ivis {

std::vector<std::string> shape_class_names()
{
    return {kShapeClassNames.begin(), kShapeClassNames.end()};
}

ShapeClass parse_shape_class(std::string_view name)
{
    for (std::size_t i = 0; i < kShapeClassCount; ++i) {
        if (kShapeClassNames[i] == name) {
            return static_cast<ShapeClass>(i);
        }
    }
    throw ArgumentError("unknown shape class '" + std::string(name) + "'");
}

ShapeParams sample_shape_params(ShapeClass shape, Xoshiro256& rng, std::size_t image_size)
{
    const double size = static_cast<double>(image_size);
    ShapeParams p;
    p.shape = shape;
    p.radius = size * rng.uniform(0.19, 0.4);
    const double margin = p.radius + 2.0;
    p.centre_x = rng.uniform(margin, size - 1.0 - margin);
    p.centre_y = rng.uniform(margin, size - 1.0 - margin);
    p.angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    p.thickness = p.radius * rng.uniform(0.18, 0.28);
    p.period = p.radius * rng.uniform(0.35, 0.5);
    // Bright shape on a darker background with at least 80 levels of contrast.
    p.background = std::floor(rng.uniform(0.0, 120.0));
    p.foreground = std::floor(rng.uniform(p.background + 80.0, 256.0));
    return p;
}

namespace {

bool inside_hexagon(double u, double v, double circumradius)
{
    // Vertices at angles 0, 60, ..., so edge normals sit at 30, 90, 150 degrees.
    const double apothem = circumradius * std::sqrt(3.0) / 2.0;
    for (int k = 0; k < 3; ++k) {
        const double theta = std::numbers::pi / 6.0 + k * std::numbers::pi / 3.0;
        if (std::abs(u * std::cos(theta) + v * std::sin(theta)) > apothem) {
            return false;
        }
    }
    return true;
}

}  // namespace

bool shape_covers(const ShapeParams& p, double x, double y)
{
    const double dx = x - p.centre_x;
    const double dy = y - p.centre_y;
    const double c = std::cos(p.angle), s = std::sin(p.angle);
    const double u = c * dx + s * dy;
    const double v = -s * dx + c * dy;
    const double r2 = dx * dx + dy * dy;

    switch (p.shape) {
    case ShapeClass::disk:
        return r2 <= p.radius * p.radius;
    case ShapeClass::ring: {
        const double inner = p.radius - p.thickness;
        return r2 <= p.radius * p.radius && r2 >= inner * inner;
    }
    case ShapeClass::cross: {
        const double half = p.thickness / 2.0;
        return (std::abs(u) <= half && std::abs(v) <= p.radius) || (std::abs(v) <= half && std::abs(u) <= p.radius);
    }
    case ShapeClass::stripes: {
        if (r2 > p.radius * p.radius) {
            return false;
        }
        const auto band = static_cast<long long>(std::floor(u / (p.period / 2.0)));
        return band % 2 == 0;
    }
    case ShapeClass::checker: {
        const double half = p.radius * 0.75;
        if (std::abs(u) > half || std::abs(v) > half) {
            return false;
        }
        const auto cu = static_cast<long long>(std::floor(u / p.period));
        const auto cv = static_cast<long long>(std::floor(v / p.period));
        return (cu + cv) % 2 == 0;
    }
    case ShapeClass::hex_outline:
        return inside_hexagon(u, v, p.radius) && !inside_hexagon(u, v, p.radius - p.thickness);
    }
    return false;
}

ImageBuffer render_shape(const ShapeParams& params, std::size_t image_size)
{
    ImageBuffer image(image_size, image_size, params.background);
    for (std::size_t y = 0; y < image_size; ++y) {
        for (std::size_t x = 0; x < image_size; ++x) {
            if (shape_covers(params, static_cast<double>(x), static_cast<double>(y))) {
                for (std::size_t c = 0; c < ImageBuffer::channels; ++c) {
                    image.at(c, y, x) = params.foreground;
                }
            }
        }
    }
    return image;
}

ShapeDataset generate_dataset(std::uint64_t seed, std::size_t count_per_class, std::size_t image_size)
{
    if (count_per_class < 1) {
        throw ArgumentError("count_per_class must be >= 1");
    }
    if (image_size < 16) {
        throw ArgumentError("image size must be >= 16");
    }
    ShapeDataset dataset;
    dataset.seed = seed;
    dataset.image_size = image_size;
    const auto total = count_per_class * kShapeClassCount;
    dataset.images.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        Xoshiro256 rng(derive_seed(seed, i));
        const auto label = i % kShapeClassCount;
        auto params = sample_shape_params(static_cast<ShapeClass>(label), rng, image_size);
        dataset.images.push_back(render_shape(params, image_size));
        dataset.labels.push_back(label);
        dataset.params.push_back(params);
    }
    return dataset;
}

void save_dataset(const ShapeDataset& dataset, const std::filesystem::path& directory)
{
    std::filesystem::create_directories(directory);
    std::ofstream manifest(directory / "manifest.txt");
    if (!manifest) {
        throw Error("cannot write dataset manifest in '" + directory.string() + "'");
    }
    manifest << "ivis-dataset 1\n";
    manifest << "seed " << dataset.seed << "\n";
    manifest << "image_size " << dataset.image_size << "\n";
    manifest << "count " << dataset.size() << "\n";
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%06zu.ppm", i);
        write_ppm(dataset.images[i], directory / name);
        manifest << name << ' ' << kShapeClassNames[dataset.labels[i]] << '\n';
    }
}

ShapeDataset load_dataset(const std::filesystem::path& directory)
{
    std::ifstream manifest(directory / "manifest.txt");
    if (!manifest) {
        throw Error("cannot read dataset manifest in '" + directory.string() + "'");
    }
    std::string header;
    std::getline(manifest, header);
    if (header != "ivis-dataset 1") {
        throw Error("unrecognized dataset manifest header '" + header + "'");
    }
    ShapeDataset dataset;
    std::string key;
    std::size_t count = 0;
    if (!(manifest >> key >> dataset.seed) || key != "seed" || !(manifest >> key >> dataset.image_size) ||
        key != "image_size" || !(manifest >> key >> count) || key != "count") {
        throw Error("malformed dataset manifest");
    }
    for (std::size_t i = 0; i < count; ++i) {
        std::string file, label;
        if (!(manifest >> file >> label)) {
            throw Error("dataset manifest ends after " + std::to_string(i) + " of " + std::to_string(count) +
                        " entries");
        }
        dataset.images.push_back(read_ppm(directory / file));
        dataset.labels.push_back(static_cast<std::size_t>(parse_shape_class(label)));
    }
    return dataset;
}

}  // namespace ivis
