#pragma once

#include <optional>

#include "afi/matrix.hpp"

namespace afi::gan {

enum class MmdEstimator { Unbiased, Biased };

/// Median of all pairwise Euclidean distances in the pooled sample; 1.0 if that median is 0.
double median_bandwidth(const Matrix& x, const Matrix& y);

/// Squared MMD with kernel exp(-|a-b|^2 / (2 sigma^2)). Without a bandwidth the
/// median heuristic is used.
double mmd_rbf(const Matrix& generated, const Matrix& real, std::optional<double> bandwidth = std::nullopt,
               MmdEstimator estimator = MmdEstimator::Unbiased);

}  // namespace afi::gan
