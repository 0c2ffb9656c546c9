#include "afi/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "afi/error.hpp"

namespace afi::interp {

namespace {

constexpr double kDegenerateEigenvalue = 1e-12;

double concentration_base(Concentration fn, double distance) {
    switch (fn) {
        case Concentration::ReciprocalOnePlus:
            return 1.0 / (1.0 + distance);
    }
    return 1.0;
}

void interpolate_row(const FeatureBatch& batch, std::span<const std::size_t> idx,
                     const rnd::SimplexWeights& w, std::span<double> out) {
    const auto first = batch.row(idx[0]);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = w[0] * first[c];
    for (std::size_t j = 1; j < idx.size(); ++j) {
        const auto src = batch.row(idx[j]);
        for (std::size_t c = 0; c < out.size(); ++c) out[c] += w[j] * src[c];
    }
}

AfiResult unchanged(const FeatureBatch& batch, linalg::MdsSpectrum spectrum) {
    AfiResult r;
    r.features = batch;
    const std::size_t b = batch.rows();
    r.decision.k = 1;
    r.decision.p = 0.0;
    r.decision.neighbors.resize(b);
    r.decision.weights.resize(b);
    r.decision.replaced.assign(b, false);
    for (std::size_t i = 0; i < b; ++i) {
        r.decision.neighbors[i] = {i};
        r.decision.weights[i].weights = {1.0};
    }
    r.decision.spectrum = std::move(spectrum);
    return r;
}

void check_batch(const FeatureBatch& batch) {
    if (batch.rows() == 0) throw InvalidInput("feature batch is empty");
    if (!batch.all_finite()) throw InvalidInput("feature batch has non-finite entries");
}

}  // namespace

void AfiConfig::validate(std::size_t b) const {
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidParameter("afi: t must be finite and >= 0");
    if (!(threshold_ratio > 0.0 && threshold_ratio < 1.0))
        throw InvalidParameter("afi: threshold_ratio must lie in (0, 1)");
    if (fixed_k && (*fixed_k < 1 || *fixed_k > b))
        throw InvalidParameter("afi: fixed k must lie in [1, batch size]");
    if (fixed_p && !(*fixed_p >= 0.0 && *fixed_p <= 1.0))
        throw InvalidParameter("afi: fixed p must lie in [0, 1]");
    if (!(p_max >= 0.0 && p_max <= 1.0)) throw InvalidParameter("afi: p_max must lie in [0, 1]");
}

std::size_t AfiDecision::replaced_count() const noexcept {
    return static_cast<std::size_t>(std::count(replaced.begin(), replaced.end(), true));
}

std::vector<std::size_t> knn_indices(const linalg::DistanceMatrix& d, std::size_t i, std::size_t k) {
    const std::size_t b = d.size();
    if (i >= b) throw InvalidParameter("knn_indices: row index out of range");
    if (k < 1 || k > b) throw InvalidParameter("knn_indices: k must lie in [1, b]");
    std::vector<std::size_t> others;
    others.reserve(b - 1);
    for (std::size_t j = 0; j < b; ++j)
        if (j != i) others.push_back(j);
    const auto closer = [&](std::size_t l, std::size_t r) {
        return d(i, l) < d(i, r) || (d(i, l) == d(i, r) && l < r);
    };
    std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k - 1), others.end(), closer);
    std::vector<std::size_t> out;
    out.reserve(k);
    out.push_back(i);
    out.insert(out.end(), others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k - 1));
    return out;
}

std::vector<double> alpha_weights(std::span<const double> distances, const AfiConfig& cfg) {
    std::vector<double> alphas(distances.size());
    for (std::size_t j = 0; j < distances.size(); ++j) {
        const double dist = distances[j];
        if (!(dist >= 0.0) || !std::isfinite(dist))
            throw InvalidInput("alpha_weights: distances must be finite and >= 0");
        alphas[j] = cfg.t == 0.0 ? 1.0 : std::pow(concentration_base(cfg.concentration, dist), cfg.t);
    }
    return alphas;
}

std::size_t effective_k(const linalg::MdsSpectrum& spectrum, double threshold_ratio) {
    const std::size_t b = spectrum.size();
    if (b == 0) return 1;
    const double lmax = *std::max_element(spectrum.eigenvalues.begin(), spectrum.eigenvalues.end());
    if (lmax <= kDegenerateEigenvalue) return b;
    const double threshold = threshold_ratio * lmax;
    const auto below = static_cast<std::size_t>(std::count_if(
        spectrum.eigenvalues.begin(), spectrum.eigenvalues.end(), [&](double l) { return l < threshold; }));
    return std::clamp<std::size_t>(below, 1, b);
}

double augmentation_probability(std::size_t k, std::size_t b) {
    if (b == 0 || k < 1 || k > b) throw InvalidParameter("augmentation_probability: need 1 <= k <= b");
    return static_cast<double>(k - 1) / static_cast<double>(b);
}

std::vector<double> interpolate_feature(const Matrix& neighbors, const rnd::SimplexWeights& weights) {
    if (neighbors.rows() != weights.size() || neighbors.rows() == 0)
        throw InvalidInput("interpolate_feature: neighbor count does not match weight count");
    std::vector<double> out(neighbors.cols());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = weights[0] * neighbors(0, c);
    for (std::size_t j = 1; j < neighbors.rows(); ++j) {
        const auto src = neighbors.row(j);
        for (std::size_t c = 0; c < out.size(); ++c) out[c] += weights[j] * src[c];
    }
    return out;
}

AfiParams resolve_params(const linalg::MdsSpectrum& spectrum, std::size_t b, const AfiConfig& cfg) {
    cfg.validate(b);
    AfiParams params;
    params.k = cfg.fixed_k ? *cfg.fixed_k : std::min(effective_k(spectrum, cfg.threshold_ratio), b);
    params.p = cfg.fixed_p ? *cfg.fixed_p : augmentation_probability(params.k, b);
    params.p = std::min(params.p, cfg.p_max);
    return params;
}

AfiResult augment_with(const FeatureBatch& batch, AfiParams params, const AfiConfig& cfg, rnd::Rng& rng) {
    check_batch(batch);
    const std::size_t b = batch.rows();
    const auto dist = linalg::normalize_distance_matrix(linalg::pairwise_distance_matrix(batch));
    if (b == 1 || dist.max_entry() == 0.0) return unchanged(batch, linalg::MdsSpectrum{std::vector<double>(b, 0.0), 0});
    if (params.k < 1 || params.k > b) throw InvalidParameter("augment_with: k must lie in [1, b]");
    if (!(params.p >= 0.0 && params.p <= 1.0)) throw InvalidParameter("augment_with: p must lie in [0, 1]");

    AfiResult r;
    r.features = batch;
    AfiDecision& dec = r.decision;
    dec.k = params.k;
    dec.p = params.p;
    dec.neighbors.resize(b);
    dec.weights.resize(b);
    dec.replaced.assign(b, false);

    std::vector<double> near(params.k);
    for (std::size_t i = 0; i < b; ++i) {
        dec.neighbors[i] = knn_indices(dist, i, params.k);
        for (std::size_t j = 0; j < params.k; ++j) near[j] = dist(i, dec.neighbors[i][j]);
        dec.weights[i] = rnd::dirichlet_sample(alpha_weights(near, cfg), rng);
        dec.replaced[i] = rng.bernoulli(params.p);
        if (dec.replaced[i]) interpolate_row(batch, dec.neighbors[i], dec.weights[i], r.features.row(i));
    }
    return r;
}

AfiResult afi_augment(const FeatureBatch& batch, const AfiConfig& cfg, rnd::Rng& rng) {
    check_batch(batch);
    const std::size_t b = batch.rows();
    cfg.validate(b);
    const auto dist = linalg::normalize_distance_matrix(linalg::pairwise_distance_matrix(batch));
    auto spectrum = linalg::mds_spectrum(dist);
    if (b == 1 || dist.max_entry() == 0.0) return unchanged(batch, std::move(spectrum));
    auto r = augment_with(batch, resolve_params(spectrum, b, cfg), cfg, rng);
    r.decision.spectrum = std::move(spectrum);
    return r;
}

FeatureBatch apply_decision(const FeatureBatch& batch, const AfiDecision& decision) {
    const std::size_t b = batch.rows();
    if (decision.batch_size() != b || decision.neighbors.size() != b || decision.weights.size() != b)
        throw InvalidInput("apply_decision: decision does not match batch size");
    FeatureBatch out = batch;
    for (std::size_t i = 0; i < b; ++i)
        if (decision.replaced[i]) interpolate_row(batch, decision.neighbors[i], decision.weights[i], out.row(i));
    return out;
}

Matrix backprop_decision(const Matrix& grad_out, const AfiDecision& decision) {
    const std::size_t b = grad_out.rows();
    if (decision.batch_size() != b) throw InvalidInput("backprop_decision: decision does not match batch size");
    if (decision.replaced_count() == 0) return grad_out;
    Matrix grad_in(b, grad_out.cols());
    for (std::size_t i = 0; i < b; ++i) {
        const auto g = grad_out.row(i);
        if (!decision.replaced[i]) {
            auto dst = grad_in.row(i);
            for (std::size_t c = 0; c < g.size(); ++c) dst[c] += g[c];
            continue;
        }
        const auto& idx = decision.neighbors[i];
        for (std::size_t j = 0; j < idx.size(); ++j) {
            auto dst = grad_in.row(idx[j]);
            const double w = decision.weights[i][j];
            for (std::size_t c = 0; c < g.size(); ++c) dst[c] += w * g[c];
        }
    }
    return grad_in;
}

nlohmann::json to_json(const AfiDecision& decision) {
    nlohmann::json j;
    j["k"] = decision.k;
    j["p"] = decision.p;
    j["neighbors"] = decision.neighbors;
    auto& w = j["weights"] = nlohmann::json::array();
    for (const auto& row : decision.weights) w.push_back(row.weights);
    auto& flags = j["replaced"] = nlohmann::json::array();
    for (bool f : decision.replaced) flags.push_back(f);
    j["eigenvalues"] = decision.spectrum.eigenvalues;
    j["negatives_clamped"] = decision.spectrum.negatives_clamped;
    return j;
}

}  // namespace afi::interp
