#include "afi/gan.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "afi/binary_io.hpp"
#include "afi/error.hpp"
#include "afi/metrics.hpp"

namespace afi::gan {

namespace {

constexpr std::string_view kTrainMagic = "AFIT";
constexpr std::uint32_t kTrainVersion = 1;

// Independent streams carved out of the run seed.
constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamTrain = 2;
constexpr std::uint64_t kStreamAfi = 3;
constexpr std::uint64_t kStreamFlatten = 4;
constexpr std::uint64_t kStreamMmd = 5;

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.cols() != b.cols()) throw InvalidInput(std::string(what) + ": feature dimension mismatch");
}

std::vector<nn::Activation> hidden_acts(nn::Activation last) {
    return {nn::Activation::LeakyRelu, nn::Activation::LeakyRelu, last};
}

// k and p a batch of real features would be augmented with.
interp::AfiParams real_params(const Matrix& real_feats, const interp::AfiConfig& cfg,
                              linalg::MdsSpectrum& spectrum) {
    const auto dist = linalg::normalize_distance_matrix(linalg::pairwise_distance_matrix(real_feats));
    spectrum = linalg::mds_spectrum(dist);
    if (real_feats.rows() == 1 || dist.max_entry() == 0.0) return {1, 0.0};
    return interp::resolve_params(spectrum, real_feats.rows(), cfg);
}

}  // namespace

std::string to_string(AfiTarget t) {
    switch (t) {
        case AfiTarget::Off: return "off";
        case AfiTarget::Real: return "real";
        case AfiTarget::Fake: return "fake";
        case AfiTarget::Both: return "both";
    }
    return "off";
}

AfiTarget afi_target_from_string(const std::string& s) {
    if (s == "off") return AfiTarget::Off;
    if (s == "real") return AfiTarget::Real;
    if (s == "fake") return AfiTarget::Fake;
    if (s == "both") return AfiTarget::Both;
    throw ConfigError("unknown afi_on value '" + s + "' (expected off|real|fake|both)");
}

void TrainConfig::validate() const {
    if (batch_size < 2) throw InvalidParameter("train: batch_size must be >= 2");
    if (feature_dim < 1) throw InvalidParameter("train: feature_dim must be >= 1");
    if (latent_dim < 1 || data_dim < 1 || hidden < 1) throw InvalidParameter("train: dimensions must be >= 1");
    if (iterations < 1) throw InvalidParameter("train: iterations must be >= 1");
    if (trace_every < 1) throw InvalidParameter("train: trace_every must be >= 1");
    if (!(lr > 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw InvalidParameter("train: optimizer parameters out of range");
    if (flatten_sample < 1) throw InvalidParameter("train: flatten_sample must be >= 1");
    afi.validate(batch_size);
}

double hinge_d_loss(const Matrix& real_feats, const Matrix& fake_feats) {
    return hinge_d_loss_with_grad(real_feats, fake_feats).loss;
}

HingeLoss hinge_d_loss_with_grad(const Matrix& real_feats, const Matrix& fake_feats) {
    check_same_shape(real_feats, fake_feats, "hinge_d_loss");
    if (real_feats.empty() || fake_feats.empty()) throw InvalidInput("hinge_d_loss: empty batch");
    HingeLoss out;
    out.grad_real = Matrix(real_feats.rows(), real_feats.cols());
    out.grad_fake = Matrix(fake_feats.rows(), fake_feats.cols());
    const double wr = 1.0 / static_cast<double>(real_feats.size());
    const double wf = 1.0 / static_cast<double>(fake_feats.size());
    double real_sum = 0.0;
    for (std::size_t i = 0; i < real_feats.size(); ++i) {
        const double v = real_feats.data()[i];
        if (1.0 - v > 0.0) {
            real_sum += 1.0 - v;
            out.grad_real.data()[i] = -wr;
        }
    }
    double fake_sum = 0.0;
    for (std::size_t i = 0; i < fake_feats.size(); ++i) {
        const double v = fake_feats.data()[i];
        if (1.0 + v > 0.0) {
            fake_sum += 1.0 + v;
            out.grad_fake.data()[i] = wf;
        }
    }
    out.loss = real_sum * wr + fake_sum * wf;
    return out;
}

double hinge_g_loss(const Matrix& fake_feats) {
    if (fake_feats.empty()) throw InvalidInput("hinge_g_loss: empty batch");
    const auto d = fake_feats.data();
    return -std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

linalg::MdsSpectrum flattening_trace(const nn::MlpNet& discriminator, const Matrix& data,
                                     std::size_t sample_size, rnd::Rng& rng) {
    if (sample_size < 1 || sample_size > data.rows())
        throw InvalidParameter("flattening_trace: sample size must lie in [1, data rows]");
    const auto idx = rnd::sample_without_replacement(data.rows(), sample_size, rng);
    Matrix sample(sample_size, data.cols());
    for (std::size_t i = 0; i < sample_size; ++i) std::ranges::copy(data.row(idx[i]), sample.row(i).begin());
    const Matrix feats = discriminator.predict(sample);
    return linalg::mds_spectrum(linalg::normalize_distance_matrix(linalg::pairwise_distance_matrix(feats)));
}

double trailing_mass(const linalg::MdsSpectrum& spectrum, std::size_t head) {
    const double total = spectrum.total();
    if (total <= 0.0) return 0.0;
    double tail = 0.0;
    for (std::size_t i = head; i < spectrum.size(); ++i) tail += spectrum.eigenvalues[i];
    return tail / total;
}

std::string trace_csv_header(std::size_t spectrum_size) {
    std::ostringstream os;
    os << "iteration";
    for (std::size_t i = 1; i <= spectrum_size; ++i) os << ",lambda_" << i;
    os << ",k,p,d_loss,g_loss,mmd";
    return os.str();
}

std::string trace_csv_row(const TraceRecord& r) {
    std::ostringstream os;
    os.precision(std::numeric_limits<double>::max_digits10);
    os << r.iteration;
    for (double l : r.eigenvalues.eigenvalues) os << ',' << l;
    os << ',' << r.k << ',' << r.p << ',' << r.d_loss << ',' << r.g_loss << ',';
    if (r.mmd) os << *r.mmd;
    return os.str();
}

GanTrainer::GanTrainer(TrainConfig cfg, Matrix data)
    : cfg_(std::move(cfg)), data_(std::move(data)), rng_(0), afi_rng_(0) {
    cfg_.validate();
    if (data_.rows() == 0) throw InvalidInput("GanTrainer: empty dataset");
    if (data_.cols() != cfg_.data_dim) throw InvalidInput("GanTrainer: data dimension does not match data_dim");
    if (!data_.all_finite()) throw InvalidInput("GanTrainer: non-finite data");

    const rnd::Rng root(cfg_.seed);
    rnd::Rng init = root.fork(kStreamInit);
    gen_ = nn::MlpNet({cfg_.latent_dim, cfg_.hidden, cfg_.hidden, cfg_.data_dim}, hidden_acts(nn::Activation::Tanh), init);
    disc_ = nn::MlpNet({cfg_.data_dim, cfg_.hidden, cfg_.hidden, cfg_.feature_dim},
                       hidden_acts(nn::Activation::Identity), init);
    const nn::AdamConfig opt{cfg_.lr, cfg_.beta1, cfg_.beta2, 1e-8};
    gen_opt_ = nn::Adam(gen_, opt);
    disc_opt_ = nn::Adam(disc_, opt);
    rng_ = root.fork(kStreamTrain);
    afi_rng_ = root.fork(kStreamAfi);
}

Matrix GanTrainer::real_batch() {
    const std::size_t b = cfg_.batch_size;
    std::vector<std::size_t> idx;
    if (data_.rows() >= b) {
        idx = rnd::sample_without_replacement(data_.rows(), b, rng_);
    } else {
        idx.resize(b);
        for (auto& i : idx) i = rng_.uniform_index(data_.rows());
    }
    Matrix batch(b, data_.cols());
    for (std::size_t i = 0; i < b; ++i) std::ranges::copy(data_.row(idx[i]), batch.row(i).begin());
    return batch;
}

Matrix GanTrainer::latent_batch() {
    Matrix z(cfg_.batch_size, cfg_.latent_dim);
    for (double& v : z.data()) v = rng_.normal();
    return z;
}

StepStats GanTrainer::step() {
    const std::size_t it = iteration_ + 1;
    StepStats stats;
    stats.iteration = it;

    // Discriminator update.
    const Matrix real = real_batch();
    const Matrix fake = gen_.predict(latent_batch());
    nn::GradTape real_tape;
    nn::GradTape fake_tape;
    const Matrix real_feats = disc_.forward(real, real_tape);
    const Matrix fake_feats = disc_.forward(fake, fake_tape);

    linalg::MdsSpectrum spectrum;
    const interp::AfiParams params = real_params(real_feats, cfg_.afi, spectrum);
    const bool aug_real = cfg_.afi_on == AfiTarget::Real || cfg_.afi_on == AfiTarget::Both;
    const bool aug_fake = cfg_.afi_on == AfiTarget::Fake || cfg_.afi_on == AfiTarget::Both;

    Matrix real_in = real_feats;
    Matrix fake_in = fake_feats;
    interp::AfiDecision real_dec;
    interp::AfiDecision fake_dec;
    if (aug_real) {
        auto r = interp::augment_with(real_feats, params, cfg_.afi, afi_rng_);
        real_in = std::move(r.features);
        real_dec = std::move(r.decision);
        real_dec.spectrum = spectrum;
        stats.real_replaced = real_dec.replaced_count();
    }
    if (aug_fake) {
        auto r = interp::augment_with(fake_feats, params, cfg_.afi, afi_rng_);
        fake_in = std::move(r.features);
        fake_dec = std::move(r.decision);
        stats.fake_replaced = fake_dec.replaced_count();
    }
    if (aug_real) {
        last_real_ = real_dec;
        stats.k = real_dec.k;
        stats.p = real_dec.p;
    } else {
        last_real_ = {};
        last_real_.spectrum = spectrum;
        stats.k = params.k;
        stats.p = aug_fake ? params.p : 0.0;
    }

    HingeLoss d = hinge_d_loss_with_grad(real_in, fake_in);
    stats.d_loss = d.loss;
    if (!std::isfinite(d.loss))
        throw DivergenceError(it, "discriminator loss is non-finite at iteration " + std::to_string(it));
    const Matrix g_real = aug_real ? interp::backprop_decision(d.grad_real, real_dec) : d.grad_real;
    const Matrix g_fake = aug_fake ? interp::backprop_decision(d.grad_fake, fake_dec) : d.grad_fake;
    nn::Gradients dg = disc_.backward(real_tape, g_real);
    dg.add(disc_.backward(fake_tape, g_fake));
    disc_opt_.step(disc_, dg);

    // Generator update.
    nn::GradTape gen_tape;
    nn::GradTape disc_tape;
    const Matrix gen_out = gen_.forward(latent_batch(), gen_tape);
    const Matrix gen_feats = disc_.forward(gen_out, disc_tape);
    stats.g_loss = hinge_g_loss(gen_feats);
    if (!std::isfinite(stats.g_loss))
        throw DivergenceError(it, "generator loss is non-finite at iteration " + std::to_string(it));
    const Matrix g_feats(gen_feats.rows(), gen_feats.cols(), -1.0 / static_cast<double>(gen_feats.size()));
    const nn::Gradients through_disc = disc_.backward(disc_tape, g_feats);
    gen_opt_.step(gen_, gen_.backward(gen_tape, through_disc.input));

    if (!disc_.all_finite() || !gen_.all_finite())
        throw DivergenceError(it, "non-finite network parameter at iteration " + std::to_string(it));
    iteration_ = it;
    return stats;
}

TraceRecord GanTrainer::trace(const StepStats& stats) const {
    TraceRecord r;
    r.iteration = stats.iteration;
    r.k = stats.k;
    r.p = stats.p;
    r.d_loss = stats.d_loss;
    r.g_loss = stats.g_loss;
    rnd::Rng flatten_rng = rnd::Rng(cfg_.seed).fork(kStreamFlatten);
    r.eigenvalues = flattening_trace(disc_, data_, std::min(cfg_.flatten_sample, data_.rows()), flatten_rng);
    if (cfg_.mmd_samples > 1 && data_.rows() > 1)
        r.mmd = mmd_rbf(sample(cfg_.mmd_samples, kStreamMmd), data_);
    return r;
}

Matrix GanTrainer::sample(std::size_t count, std::uint64_t stream) const {
    rnd::Rng rng = rnd::Rng(cfg_.seed).fork(stream);
    Matrix z(count, cfg_.latent_dim);
    for (double& v : z.data()) v = rng.normal();
    return gen_.predict(z);
}

void GanTrainer::save_checkpoint(std::ostream& os) const {
    io::write_magic(os, kTrainMagic);
    io::write_u32(os, kTrainVersion);
    io::write_u64(os, iteration_);
    io::write_u64(os, rng_.seed());
    io::write_u64(os, rng_.state());
    io::write_u64(os, afi_rng_.seed());
    io::write_u64(os, afi_rng_.state());
    gen_.save(os);
    disc_.save(os);
    gen_opt_.save(os);
    disc_opt_.save(os);
    if (!os) throw std::runtime_error("checkpoint: write failed");
}

void GanTrainer::load_checkpoint(std::istream& is) {
    io::expect_magic(is, kTrainMagic);
    if (io::read_u32(is) != kTrainVersion) throw InvalidInput("training checkpoint: unsupported version");
    const auto iteration = static_cast<std::size_t>(io::read_u64(is));
    rnd::Rng rng(io::read_u64(is));
    rng.set_state(io::read_u64(is));
    rnd::Rng afi_rng(io::read_u64(is));
    afi_rng.set_state(io::read_u64(is));
    nn::MlpNet gen = nn::MlpNet::load(is);
    nn::MlpNet disc = nn::MlpNet::load(is);
    if (gen.dims() != gen_.dims() || disc.dims() != disc_.dims())
        throw InvalidInput("training checkpoint: network shapes do not match the configuration");
    const nn::AdamConfig opt = gen_opt_.config();
    nn::Adam gen_opt = nn::Adam::load(is, opt);
    nn::Adam disc_opt = nn::Adam::load(is, opt);

    iteration_ = iteration;
    rng_ = rng;
    afi_rng_ = afi_rng;
    gen_ = std::move(gen);
    disc_ = std::move(disc);
    gen_opt_ = std::move(gen_opt);
    disc_opt_ = std::move(disc_opt);
}

}  // namespace afi::gan
