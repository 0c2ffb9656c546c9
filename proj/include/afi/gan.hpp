#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "afi/interpolation.hpp"
#include "afi/linalg.hpp"
#include "afi/matrix.hpp"
#include "afi/mlp.hpp"
#include "afi/random.hpp"

namespace afi::gan {

/// Which discriminator feature batches are interpolated.
enum class AfiTarget { Off, Real, Fake, Both };

std::string to_string(AfiTarget t);
AfiTarget afi_target_from_string(const std::string& s);

struct TrainConfig {
    std::size_t batch_size = 16;   ///< b
    std::size_t latent_dim = 4;
    std::size_t feature_dim = 8;   ///< n, discriminator output width
    std::size_t data_dim = 2;      ///< m
    std::size_t hidden = 64;
    std::size_t iterations = 1000;
    double lr = 1e-3;
    double beta1 = 0.5;
    double beta2 = 0.999;
    interp::AfiConfig afi;
    AfiTarget afi_on = AfiTarget::Both;
    std::size_t trace_every = 100;
    std::uint64_t seed = 0;
    std::size_t flatten_sample = 64;  ///< points per flattening trace (capped at N)
    std::size_t mmd_samples = 256;    ///< generated points per MMD estimate; 0 disables MMD

    void validate() const;
    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct HingeLoss {
    double loss = 0.0;
    Matrix grad_real;  ///< dL/d(real features)
    Matrix grad_fake;  ///< dL/d(fake features)
};

/// Mean over rows and coordinates of max(0, 1 - real) plus the same mean of max(0, 1 + fake).
double hinge_d_loss(const Matrix& real_feats, const Matrix& fake_feats);
HingeLoss hinge_d_loss_with_grad(const Matrix& real_feats, const Matrix& fake_feats);

/// Negative mean of the fake features.
double hinge_g_loss(const Matrix& fake_feats);

/// Classical MDS spectrum of `sample_size` seeded real points pushed through `discriminator`.
linalg::MdsSpectrum flattening_trace(const nn::MlpNet& discriminator, const Matrix& data,
                                     std::size_t sample_size, rnd::Rng& rng);

/// sum_{i > head} lambda_i / sum lambda_i; 0 for an all-zero spectrum.
double trailing_mass(const linalg::MdsSpectrum& spectrum, std::size_t head = 3);

struct StepStats {
    std::size_t iteration = 0;  ///< 1-based count of completed steps
    std::size_t k = 1;
    double p = 0.0;
    double d_loss = 0.0;
    double g_loss = 0.0;
    std::size_t real_replaced = 0;
    std::size_t fake_replaced = 0;
};

struct TraceRecord {
    std::size_t iteration = 0;
    linalg::MdsSpectrum eigenvalues;
    std::size_t k = 1;
    double p = 0.0;
    double d_loss = 0.0;
    double g_loss = 0.0;
    std::optional<double> mmd;
};

/// Header + one row per record; the spectrum contributes `spectrum_size` columns.
std::string trace_csv_header(std::size_t spectrum_size);
std::string trace_csv_row(const TraceRecord& r);

/// Hinge GAN with feature interpolation on the discriminator outputs.
class GanTrainer {
public:
    GanTrainer(TrainConfig cfg, Matrix data);

    /// One discriminator update followed by one generator update.
    /// Throws DivergenceError on a non-finite loss or parameter.
    StepStats step();

    /// Flattening spectrum (and MMD if enabled) at the current parameters.
    TraceRecord trace(const StepStats& stats) const;

    std::size_t iteration() const noexcept { return iteration_; }
    const TrainConfig& config() const noexcept { return cfg_; }
    const Matrix& data() const noexcept { return data_; }
    const nn::MlpNet& generator() const noexcept { return gen_; }
    const nn::MlpNet& discriminator() const noexcept { return disc_; }
    const interp::AfiDecision& last_real_decision() const noexcept { return last_real_; }

    /// Generator samples from a dedicated seeded stream.
    Matrix sample(std::size_t count, std::uint64_t stream) const;

    /// Whole training state: "AFIT" header, iteration, RNG states, both nets, both optimizers.
    void save_checkpoint(std::ostream& os) const;
    void load_checkpoint(std::istream& is);

private:
    Matrix real_batch();
    Matrix latent_batch();

    TrainConfig cfg_;
    Matrix data_;
    nn::MlpNet gen_;
    nn::MlpNet disc_;
    nn::Adam gen_opt_;
    nn::Adam disc_opt_;
    rnd::Rng rng_;
    rnd::Rng afi_rng_;
    std::size_t iteration_ = 0;
    interp::AfiDecision last_real_;
};

}  // namespace afi::gan
