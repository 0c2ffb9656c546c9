#include "afi/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "afi/error.hpp"

namespace afi::rnd {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr int kDirichletRetries = 16;

std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Marsaglia-Tsang squeeze/rejection for shape >= 1, returned in log space.
double log_gamma_ge1(double shape, Rng& rng) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform_open();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d) + std::log(v);
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d) + std::log(v);
    }
}

}  // namespace

std::uint64_t Rng::next_u64() noexcept {
    state_ += kGolden;
    return mix64(state_);
}

double Rng::uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::size_t Rng::uniform_index(std::size_t n) noexcept {
    // Rejection keeps the result unbiased for any n.
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t r = 0;
    do {
        r = next_u64();
    } while (r >= limit);
    return static_cast<std::size_t>(r % bound);
}

double Rng::normal() noexcept {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::fork(std::uint64_t stream) const noexcept {
    return Rng(mix64(seed_ ^ mix64(stream + kGolden)));
}

double log_gamma_sample(double shape, Rng& rng) {
    if (!(shape > 0.0) || !std::isfinite(shape))
        throw InvalidParameter("gamma shape must be positive and finite");
    if (shape >= 1.0) return log_gamma_ge1(shape, rng);
    // G(a) = G(a+1) * U^(1/a)
    const double boosted = log_gamma_ge1(shape + 1.0, rng);
    return boosted + std::log(rng.uniform_open()) / shape;
}

double gamma_sample(double shape, Rng& rng) {
    return std::exp(log_gamma_sample(shape, rng));
}

SimplexWeights dirichlet_sample(std::span<const double> alphas, Rng& rng) {
    if (alphas.empty()) throw InvalidParameter("dirichlet_sample: empty concentration vector");
    for (double a : alphas)
        if (!(a > 0.0) || !std::isfinite(a))
            throw InvalidParameter("dirichlet_sample: concentrations must be positive and finite");

    SimplexWeights out;
    out.weights.resize(alphas.size());
    if (alphas.size() == 1) {
        out.weights[0] = 1.0;
        return out;
    }
    std::vector<double> logs(alphas.size());
    for (int attempt = 0; attempt < kDirichletRetries; ++attempt) {
        for (std::size_t j = 0; j < alphas.size(); ++j) logs[j] = log_gamma_sample(alphas[j], rng);
        const double top = *std::max_element(logs.begin(), logs.end());
        if (!std::isfinite(top)) continue;
        double sum = 0.0;
        for (std::size_t j = 0; j < logs.size(); ++j) {
            out.weights[j] = std::exp(logs[j] - top);
            sum += out.weights[j];
        }
        if (!(sum > 0.0) || !std::isfinite(sum)) continue;
        for (double& w : out.weights) w /= sum;
        return out;
    }
    throw InvalidParameter("dirichlet_sample: gamma draws degenerate after repeated retries");
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count, Rng& rng) {
    if (count > n) throw InvalidParameter("sample_without_replacement: count exceeds population");
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + rng.uniform_index(n - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

std::vector<double> unit_vector(std::size_t dim, Rng& rng) {
    std::vector<double> v(dim);
    double norm = 0.0;
    do {
        norm = 0.0;
        for (double& x : v) {
            x = rng.normal();
            norm += x * x;
        }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

}  // namespace afi::rnd
