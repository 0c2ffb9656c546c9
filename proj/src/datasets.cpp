#include "afi/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "afi/error.hpp"

namespace afi::cli {

namespace {

double radius_or(const DatasetSpec& spec, std::size_t i, double fallback) {
    return spec.radii.size() > i ? spec.radii[i] : fallback;
}

void sample_ellipsoid(const DatasetSpec& spec, rnd::Rng& rng, std::span<double> out) {
    const double a = spec.radii[0];
    const double b = spec.radii[1];
    const double c = spec.radii[2];
    // Surface element of the map u -> (a u1, b u2, c u3) relative to the sphere.
    const double g_max = std::max({b * c, a * c, a * b});
    for (;;) {
        const auto u = rnd::unit_vector(3, rng);
        const double g = std::sqrt((b * c * u[0]) * (b * c * u[0]) + (a * c * u[1]) * (a * c * u[1]) +
                                   (a * b * u[2]) * (a * b * u[2]));
        if (rng.uniform() * g_max <= g) {
            out[0] = a * u[0];
            out[1] = b * u[1];
            out[2] = c * u[2];
            return;
        }
    }
}

}  // namespace

std::string to_string(Shape s) {
    switch (s) {
        case Shape::Ellipsoid: return "ellipsoid";
        case Shape::Disc: return "disc";
        case Shape::Ring: return "ring";
        case Shape::GaussianMixture: return "gaussian-mixture";
    }
    return "ring";
}

Shape shape_from_string(const std::string& tag) {
    if (tag == "ellipsoid") return Shape::Ellipsoid;
    if (tag == "disc") return Shape::Disc;
    if (tag == "ring") return Shape::Ring;
    if (tag == "gaussian-mixture") return Shape::GaussianMixture;
    throw ConfigError("unknown dataset shape '" + tag + "' (expected ellipsoid|disc|ring|gaussian-mixture)");
}

void DatasetSpec::validate() const {
    if (n_points < 1) throw ConfigError("dataset: n_points must be >= 1");
    if (!(noise_sigma >= 0.0)) throw ConfigError("dataset: noise_sigma must be >= 0");
    const std::size_t intrinsic_ambient = shape == Shape::Ellipsoid ? 3 : 2;
    if (ambient_dim < intrinsic_ambient)
        throw ConfigError("dataset: ambient_dim too small for shape " + to_string(shape));
    if (shape == Shape::Ellipsoid && radii.size() < 3) throw ConfigError("dataset: ellipsoid needs three semi-axes");
    if (shape != Shape::Ellipsoid && radii.empty()) throw ConfigError("dataset: radius required");
    for (double r : radii)
        if (!(r > 0.0)) throw ConfigError("dataset: radii must be positive");
    if (shape == Shape::GaussianMixture && components < 1) throw ConfigError("dataset: components must be >= 1");
}

Matrix generate_dataset(const DatasetSpec& spec, rnd::Rng& rng) {
    spec.validate();
    Matrix data(spec.n_points, spec.ambient_dim);
    for (std::size_t i = 0; i < spec.n_points; ++i) {
        auto row = data.row(i);
        switch (spec.shape) {
            case Shape::Ellipsoid:
                sample_ellipsoid(spec, rng, row);
                break;
            case Shape::Disc: {
                const double r = spec.radii[0] * std::sqrt(rng.uniform());
                const double theta = 2.0 * std::numbers::pi * rng.uniform();
                row[0] = r * std::cos(theta);
                row[1] = r * std::sin(theta);
                break;
            }
            case Shape::Ring: {
                const double theta = 2.0 * std::numbers::pi * rng.uniform();
                row[0] = spec.radii[0] * std::cos(theta);
                row[1] = spec.radii[0] * std::sin(theta);
                break;
            }
            case Shape::GaussianMixture: {
                const std::size_t comp = rng.uniform_index(spec.components);
                const double theta = 2.0 * std::numbers::pi * static_cast<double>(comp) /
                                     static_cast<double>(spec.components);
                const double sigma = radius_or(spec, 1, 0.05);
                row[0] = spec.radii[0] * std::cos(theta) + sigma * rng.normal();
                row[1] = spec.radii[0] * std::sin(theta) + sigma * rng.normal();
                break;
            }
        }
        if (spec.noise_sigma > 0.0)
            for (double& v : row) v += spec.noise_sigma * rng.normal();
    }
    return data;
}

Matrix generate_dataset(const DatasetSpec& spec) {
    rnd::Rng rng(spec.seed);
    return generate_dataset(spec, rng);
}

}  // namespace afi::cli
