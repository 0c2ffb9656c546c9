#include "afi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "afi/error.hpp"

namespace afi::gan {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        const double d = a[c] - b[c];
        s += d * d;
    }
    return s;
}

}  // namespace

double median_bandwidth(const Matrix& x, const Matrix& y) {
    std::vector<std::span<const double>> pooled;
    for (std::size_t i = 0; i < x.rows(); ++i) pooled.push_back(x.row(i));
    for (std::size_t i = 0; i < y.rows(); ++i) pooled.push_back(y.row(i));
    std::vector<double> d;
    d.reserve(pooled.size() * (pooled.size() - 1) / 2);
    for (std::size_t i = 0; i < pooled.size(); ++i)
        for (std::size_t j = i + 1; j < pooled.size(); ++j) d.push_back(std::sqrt(sq_dist(pooled[i], pooled[j])));
    if (d.empty()) return 1.0;
    const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    double med = *mid;
    if (d.size() % 2 == 0) {
        const double lower = *std::max_element(d.begin(), mid);
        med = 0.5 * (med + lower);
    }
    return med > 0.0 ? med : 1.0;
}

double mmd_rbf(const Matrix& generated, const Matrix& real, std::optional<double> bandwidth,
               MmdEstimator estimator) {
    const std::size_t m = generated.rows();
    const std::size_t n = real.rows();
    if (m == 0 || n == 0) throw InvalidInput("mmd_rbf: empty sample set");
    if (generated.cols() != real.cols()) throw InvalidInput("mmd_rbf: dimension mismatch");
    if (estimator == MmdEstimator::Unbiased && (m < 2 || n < 2))
        throw InvalidInput("mmd_rbf: unbiased estimator needs at least two points per set");
    const double sigma = bandwidth ? *bandwidth : median_bandwidth(generated, real);
    if (!(sigma > 0.0)) throw InvalidParameter("mmd_rbf: bandwidth must be positive");
    const double gamma = 1.0 / (2.0 * sigma * sigma);
    const auto kern = [&](std::span<const double> a, std::span<const double> b) {
        return std::exp(-gamma * sq_dist(a, b));
    };

    const bool unbiased = estimator == MmdEstimator::Unbiased;
    double kxx = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (!unbiased || i != j) kxx += kern(generated.row(i), generated.row(j));
    double kyy = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (!unbiased || i != j) kyy += kern(real.row(i), real.row(j));
    double kxy = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) kxy += kern(generated.row(i), real.row(j));

    const double dm = static_cast<double>(m);
    const double dn = static_cast<double>(n);
    if (unbiased) return kxx / (dm * (dm - 1.0)) + kyy / (dn * (dn - 1.0)) - 2.0 * kxy / (dm * dn);
    return kxx / (dm * dm) + kyy / (dn * dn) - 2.0 * kxy / (dm * dn);
}

}  // namespace afi::gan
