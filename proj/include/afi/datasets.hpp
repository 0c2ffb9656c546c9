#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "afi/matrix.hpp"
#include "afi/random.hpp"

namespace afi::cli {

enum class Shape { Ellipsoid, Disc, Ring, GaussianMixture };

std::string to_string(Shape s);
/// Throws ConfigError on an unknown tag.
Shape shape_from_string(const std::string& tag);

struct DatasetSpec {
    Shape shape = Shape::Ring;
    std::size_t n_points = 64;
    std::size_t ambient_dim = 2;
    /// ellipsoid: semi-axes (a, b, c); disc/ring: radius; gaussian-mixture: (circle radius, component sigma)
    std::vector<double> radii{0.8};
    double noise_sigma = 0.0;
    std::size_t components = 8;  ///< gaussian-mixture only
    std::uint64_t seed = 0;

    void validate() const;
    friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

/// N x ambient_dim points drawn uniformly on the named manifold, plus isotropic
/// Gaussian noise. Ellipsoid points are area-uniform (rejection on the surface element).
Matrix generate_dataset(const DatasetSpec& spec, rnd::Rng& rng);

/// Same, seeded from spec.seed.
Matrix generate_dataset(const DatasetSpec& spec);

}  // namespace afi::cli
