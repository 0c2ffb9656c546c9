#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace afi::rnd {

/// SplitMix64: a 64-bit counter advanced by a golden-ratio increment and
/// passed through an avalanche permutation. Output is identical on every
/// platform for a given seed.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) noexcept : seed_(seed), state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return next_u64(); }
    std::uint64_t next_u64() noexcept;

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform in (0, 1), safe for log().
    double uniform_open() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n); n must be positive.
    std::size_t uniform_index(std::size_t n) noexcept;
    double normal() noexcept;
    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Derives an independent stream (for per-purpose sub-generators).
    Rng fork(std::uint64_t stream) const noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t state() const noexcept { return state_; }
    void set_state(std::uint64_t state) noexcept { state_ = state; }

    friend bool operator==(const Rng&, const Rng&) = default;

private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

/// Point on the simplex: every weight in [0,1], weights sum to 1.
struct SimplexWeights {
    std::vector<double> weights;

    std::size_t size() const noexcept { return weights.size(); }
    double operator[](std::size_t i) const { return weights[i]; }
};

/// One draw from Gamma(shape, 1) (Marsaglia-Tsang; shape < 1 via the U^(1/shape) boost).
double gamma_sample(double shape, Rng& rng);

/// Natural log of a Gamma(shape, 1) draw. Stays finite for shapes where the
/// draw itself would underflow to zero.
double log_gamma_sample(double shape, Rng& rng);

/// One draw from Dir(alphas), normalized in log space.
SimplexWeights dirichlet_sample(std::span<const double> alphas, Rng& rng);

/// `count` distinct indices from [0, n) in draw order (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count, Rng& rng);

/// Uniformly distributed unit vector in R^dim.
std::vector<double> unit_vector(std::size_t dim, Rng& rng);

}  // namespace afi::rnd
