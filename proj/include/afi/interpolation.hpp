#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "afi/linalg.hpp"
#include "afi/matrix.hpp"
#include "afi/random.hpp"
#include "json.hpp"

namespace afi::interp {

/// b x n batch of feature vectors, one per row.
using FeatureBatch = Matrix;

/// Monotone decreasing map T from distance to concentration base.
enum class Concentration {
    ReciprocalOnePlus,  ///< T(x) = 1 / (1 + x)
};

struct AfiConfig {
    double t = 1.0;                  ///< skewness exponent; 0 gives uniform Dirichlet weights
    double threshold_ratio = 0.1;    ///< eigenvalues below ratio * lambda_max count toward k
    std::optional<std::size_t> fixed_k;  ///< unset: adaptive k
    std::optional<double> fixed_p;       ///< unset: adaptive p = (k-1)/b
    double p_max = 1.0;              ///< upper cap on the replacement probability
    Concentration concentration = Concentration::ReciprocalOnePlus;

    /// Throws InvalidParameter if a field is outside its domain for batch size b.
    void validate(std::size_t b) const;

    friend bool operator==(const AfiConfig&, const AfiConfig&) = default;
};

struct AfiParams {
    std::size_t k = 1;
    double p = 0.0;
};

/// Every stochastic choice made while augmenting one batch.
struct AfiDecision {
    std::size_t k = 1;
    double p = 0.0;
    std::vector<std::vector<std::size_t>> neighbors;  ///< b rows of k indices, self first
    std::vector<rnd::SimplexWeights> weights;         ///< b rows of k weights
    std::vector<bool> replaced;                       ///< b flags
    linalg::MdsSpectrum spectrum;                     ///< spectrum the parameters were read from

    std::size_t batch_size() const noexcept { return replaced.size(); }
    std::size_t replaced_count() const noexcept;
};

struct AfiResult {
    FeatureBatch features;
    AfiDecision decision;
};

/// Indices of the k nearest rows to row i: i itself first, then by distance, ties to the smaller index.
std::vector<std::size_t> knn_indices(const linalg::DistanceMatrix& d, std::size_t i, std::size_t k);

/// alpha_j = T(d_j)^t.
std::vector<double> alpha_weights(std::span<const double> distances, const AfiConfig& cfg);

/// Number of eigenvalues strictly below threshold_ratio * lambda_max, clamped to [1, b].
/// A spectrum with lambda_max <= 1e-12 is maximally flat and yields b.
std::size_t effective_k(const linalg::MdsSpectrum& spectrum, double threshold_ratio = 0.1);

/// (k - 1) / b
double augmentation_probability(std::size_t k, std::size_t b);

/// Convex combination of the rows of `neighbors`.
std::vector<double> interpolate_feature(const Matrix& neighbors, const rnd::SimplexWeights& weights);

/// k and p for a batch of size b given its spectrum and the configured modes.
AfiParams resolve_params(const linalg::MdsSpectrum& spectrum, std::size_t b, const AfiConfig& cfg);

/// Interpolates `batch` with externally supplied k and p. Neighbors and
/// Dirichlet concentrations still come from the batch's own normalized distances.
AfiResult augment_with(const FeatureBatch& batch, AfiParams params, const AfiConfig& cfg, rnd::Rng& rng);

/// Full adaptive feature interpolation of one batch: distances, MDS spectrum,
/// (alpha, k, p), neighbor interpolation, then per-row replacement with probability p.
AfiResult afi_augment(const FeatureBatch& batch, const AfiConfig& cfg, rnd::Rng& rng);

/// Re-applies a recorded decision to (possibly different) features of the same shape.
FeatureBatch apply_decision(const FeatureBatch& batch, const AfiDecision& decision);

/// Gradient w.r.t. the input batch given the gradient w.r.t. apply_decision's output.
Matrix backprop_decision(const Matrix& grad_out, const AfiDecision& decision);

nlohmann::json to_json(const AfiDecision& decision);

}  // namespace afi::interp
