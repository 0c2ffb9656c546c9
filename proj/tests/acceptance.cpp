// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "afi/datasets.hpp"
#include "afi/gan.hpp"
#include "afi/interpolation.hpp"
#include "afi/lemma.hpp"
#include "afi/linalg.hpp"
#include "afi/mlp.hpp"
#include "afi/random.hpp"
#include "oracles.hpp"

using namespace afi;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Matrix normal_matrix(std::size_t r, std::size_t c, rnd::Rng& rng) {
    Matrix m(r, c);
    for (double& v : m.data()) v = rng.normal();
    return m;
}

// 1. MDS spectra agree with an independent eigensolver on random batches.
Outcome mds_oracle() {
    rnd::Rng rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t b = 1 + rng.uniform_index(8);
        Matrix dist;
        if (trial % 2 == 0) {
            dist = linalg::pairwise_distance_matrix(normal_matrix(b, 1 + rng.uniform_index(6), rng)).matrix();
        } else {
            // Arbitrary symmetric dissimilarities, usually not Euclidean.
            dist = Matrix(b, b);
            for (std::size_t i = 0; i < b; ++i)
                for (std::size_t j = i + 1; j < b; ++j) dist(i, j) = dist(j, i) = rng.uniform(0.0, 2.0);
        }
        const auto norm = linalg::normalize_distance_matrix(linalg::DistanceMatrix(dist));
        const auto got = linalg::mds_spectrum(norm).eigenvalues;
        const auto want = oracle::mds_eigenvalues_from_definition(norm.matrix());
        const double scale = std::max(1e-300, std::abs(want.front()));
        for (std::size_t i = 0; i < b; ++i) worst = std::max(worst, std::abs(got[i] - want[i]) / scale);
    }
    return {worst <= 1e-8, fmt("200 batches, worst relative deviation %.2e (limit 1e-8)", worst)};
}

std::size_t above_threshold(const Matrix& points) {
    const auto s = linalg::mds_spectrum(linalg::normalize_distance_matrix(linalg::pairwise_distance_matrix(points)));
    return static_cast<std::size_t>(std::ranges::count_if(s.eigenvalues, [&](double l) {
        return l >= 0.1 * s.largest();
    }));
}

// 2. A flat disc has two significant MDS eigenvalues, a triaxial ellipsoid three.
Outcome shape_rank() {
    bool ok = true;
    std::string counts;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        cli::DatasetSpec disc;
        disc.shape = cli::Shape::Disc;
        disc.n_points = 64;
        disc.ambient_dim = 3;
        disc.radii = {1.0};
        disc.seed = seed;
        cli::DatasetSpec ell = disc;
        ell.shape = cli::Shape::Ellipsoid;
        ell.radii = {2.0, 1.5, 1.0};
        const auto nd = above_threshold(cli::generate_dataset(disc));
        const auto ne = above_threshold(cli::generate_dataset(ell));
        ok = ok && nd == 2 && ne == 3;
        counts += fmt(" %zu/%zu", nd, ne);
    }
    return {ok, "disc/ellipsoid counts over 5 seeds:" + counts + " (want 2/3)"};
}

// 3. Gradient-averaging error shrinks at least linearly with neighbor deviation.
Outcome gradient_averaging() {
    const std::vector<double> radii = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
    bool ok = true;
    double min_slope = 1e300;
    double max_ratio = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        rnd::Rng init(1000 + seed);
        const nn::MlpNet net({16, 32, 8}, {nn::Activation::Tanh, nn::Activation::Tanh}, init);
        std::vector<double> x(16), target(8);
        for (double& v : x) v = init.normal();
        for (double& v : target) v = init.normal();
        const auto loss = gan::quadratic_loss(target);
        std::vector<double> devs, errs;
        for (double r : radii) {
            rnd::Rng dirs(2000 + seed);
            const auto res = gan::gradient_averaging_error(net, loss, x, r, 8, dirs);
            devs.push_back(res.max_dev);
            errs.push_back(res.error);
        }
        const double slope = gan::loglog_slope(devs, errs);
        const double ratio = errs.back() / errs.front();
        min_slope = std::min(min_slope, slope);
        max_ratio = std::max(max_ratio, ratio);
        ok = ok && slope >= 0.9 && ratio < 1e-2;
    }
    return {ok, fmt("5 nets, min slope %.3f (>= 0.9), max error ratio r=1e-3 vs 1e-1 %.2e (< 1e-2)", min_slope,
                    max_ratio)};
}

double half_sq(const Matrix& out, const Matrix& target, Matrix* grad) {
    double l = 0.0;
    if (grad) *grad = Matrix(out.rows(), out.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double d = out.data()[i] - target.data()[i];
        l += 0.5 * d * d;
        if (grad) grad->data()[i] = d;
    }
    return l;
}

// 4. Reverse-mode gradients agree with central differences on random architectures.
Outcome finite_differences() {
    rnd::Rng rng(303);
    const nn::Activation acts[] = {nn::Activation::Identity, nn::Activation::LeakyRelu, nn::Activation::Tanh};
    double worst = 0.0;
    const int configs = 24;
    for (int cfg = 0; cfg < configs; ++cfg) {
        const std::size_t depth = 1 + rng.uniform_index(4);
        std::vector<std::size_t> dims{1 + rng.uniform_index(6)};
        std::vector<nn::Activation> act;
        for (std::size_t l = 0; l < depth; ++l) {
            dims.push_back(1 + rng.uniform_index(8));
            act.push_back(acts[rng.uniform_index(3)]);
        }
        nn::MlpNet net(dims, act, rng);
        const std::size_t batch = 1 + rng.uniform_index(4);
        const Matrix x = normal_matrix(batch, dims.front(), rng);
        const Matrix target = normal_matrix(batch, dims.back(), rng);
        nn::GradTape tape;
        Matrix grad;
        half_sq(net.forward(x, tape), target, &grad);
        const auto analytic = net.backward(tape, grad).flatten();
        auto params = net.parameters();
        for (std::size_t p = 0; p < params.size(); ++p) {
            const double keep = params[p];
            params[p] = keep + 1e-5;
            net.set_parameters(params);
            const double up = half_sq(net.predict(x), target, nullptr);
            params[p] = keep - 1e-5;
            net.set_parameters(params);
            const double down = half_sq(net.predict(x), target, nullptr);
            params[p] = keep;
            net.set_parameters(params);
            const double fd = (up - down) / 2e-5;
            const double denom = std::max({std::abs(fd), std::abs(analytic[p]), 1e-6});
            worst = std::max(worst, std::abs(fd - analytic[p]) / denom);
        }
    }
    return {worst <= 1e-4, fmt("%d architectures, worst relative error %.2e (limit 1e-4)", configs, worst)};
}

// 5. Dirichlet draws have the right means and lie on the simplex.
Outcome dirichlet_means() {
    const std::vector<std::vector<double>> alphas = {{1.0, 1.0}, {2.0, 1.0, 1.0}, {0.5, 0.5, 3.0}};
    const std::size_t draws = 100000;
    rnd::Rng rng(505);
    bool ok = true;
    double worst_z = 0.0;
    double worst_sum = 0.0;
    for (const auto& a : alphas) {
        const double a0 = std::accumulate(a.begin(), a.end(), 0.0);
        std::vector<double> mean(a.size(), 0.0);
        for (std::size_t d = 0; d < draws; ++d) {
            const auto w = rnd::dirichlet_sample(a, rng);
            double s = 0.0;
            for (std::size_t j = 0; j < a.size(); ++j) {
                mean[j] += w[j];
                s += w[j];
                ok = ok && w[j] >= 0.0;
            }
            worst_sum = std::max(worst_sum, std::abs(s - 1.0));
        }
        for (std::size_t j = 0; j < a.size(); ++j) {
            mean[j] /= static_cast<double>(draws);
            const double expect = a[j] / a0;
            const double var = a[j] * (a0 - a[j]) / (a0 * a0 * (a0 + 1.0));
            worst_z = std::max(worst_z, std::abs(mean[j] - expect) / std::sqrt(var / static_cast<double>(draws)));
        }
    }
    ok = ok && worst_z <= 3.0 && worst_sum <= 1e-12;
    return {ok, fmt("3 alpha vectors x 1e5 draws, worst |z| %.2f (<= 3), worst |sum-1| %.1e (<= 1e-12)", worst_z,
                    worst_sum)};
}

// 6. Every interpolation decision respects its invariants.
Outcome interpolation_invariants() {
    rnd::Rng rng(606);
    std::size_t violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t b = 2 + rng.uniform_index(31);
        const std::size_t n = 1 + rng.uniform_index(12);
        Matrix batch = normal_matrix(b, n, rng);
        const double squash = rng.uniform(0.0, 1.0);
        for (std::size_t i = 0; i < b; ++i)
            for (std::size_t c = 1; c < n; ++c) batch(i, c) *= squash;
        interp::AfiConfig cfg;
        cfg.t = rng.uniform(0.0, 4.0);
        const std::uint64_t seed = rng.next_u64();

        rnd::Rng r1(seed), r2(seed);
        const auto res = interp::afi_augment(batch, cfg, r1);
        const auto again = interp::afi_augment(batch, cfg, r2);
        if (!(res.features == again.features) || interp::to_json(res.decision) != interp::to_json(again.decision))
            ++violations;
        const auto& dec = res.decision;
        if (dec.p != static_cast<double>(dec.k - 1) / static_cast<double>(b)) ++violations;
        for (std::size_t i = 0; i < b; ++i) {
            if (!dec.replaced[i]) {
                if (!std::ranges::equal(res.features.row(i), batch.row(i))) ++violations;
                continue;
            }
            for (std::size_t c = 0; c < n; ++c) {
                double lo = batch(i, c), hi = batch(i, c);
                for (auto j : dec.neighbors[i]) {
                    lo = std::min(lo, batch(j, c));
                    hi = std::max(hi, batch(j, c));
                }
                if (res.features(i, c) < lo - 1e-12 || res.features(i, c) > hi + 1e-12) ++violations;
            }
        }

        interp::AfiConfig k1 = cfg;
        k1.fixed_k = 1;
        k1.fixed_p = 1.0;
        rnd::Rng r3(seed);
        if (!(interp::afi_augment(batch, k1, r3).features == batch)) ++violations;
        interp::AfiConfig p0 = cfg;
        p0.fixed_p = 0.0;
        rnd::Rng r4(seed);
        if (!(interp::afi_augment(batch, p0, r4).features == batch)) ++violations;
    }
    return {violations == 0, fmt("1000 fuzzed batches, %zu violations", violations)};
}

gan::TrainConfig toy_config(std::uint64_t seed) {
    gan::TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.feature_dim = 8;
    cfg.data_dim = 2;
    cfg.afi_on = gan::AfiTarget::Both;
    cfg.mmd_samples = 0;
    cfg.seed = seed;
    return cfg;
}

Matrix toy_ring(std::size_t n, std::uint64_t seed) {
    cli::DatasetSpec spec;
    spec.shape = cli::Shape::Ring;
    spec.n_points = n;
    spec.seed = seed;
    return cli::generate_dataset(spec);
}

struct ToyRun {
    double mass_100 = 0.0;
    double mass_5000 = 0.0;
    std::size_t nonfinite = 0;
    std::string error;
};

ToyRun run_toy_gan() {
    ToyRun run;
    try {
        gan::GanTrainer trainer(toy_config(0), toy_ring(64, 0));
        for (std::size_t it = 1; it <= 5000; ++it) {
            const auto s = trainer.step();
            if (!std::isfinite(s.d_loss) || !std::isfinite(s.g_loss) || !trainer.generator().all_finite() ||
                !trainer.discriminator().all_finite())
                ++run.nonfinite;
            if (it == 100) run.mass_100 = gan::trailing_mass(trainer.trace(s).eigenvalues);
            if (it == 5000) run.mass_5000 = gan::trailing_mass(trainer.trace(s).eigenvalues);
        }
    } catch (const std::exception& e) {
        run.error = e.what();
    }
    return run;
}

double mean_k(std::size_t n_points, std::uint64_t seed) {
    gan::GanTrainer trainer(toy_config(seed), toy_ring(n_points, seed));
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t it = 1; it <= 2500; ++it) {
        const auto s = trainer.step();
        if (it >= 500) {
            sum += static_cast<double>(s.k);
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

// 8. Fewer training points lead to a larger average neighbor count.
Outcome k_versus_dataset_size() {
    int wins = 0;
    std::string detail;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const double small = mean_k(16, seed);
        const double large = mean_k(512, seed);
        wins += small > large ? 1 : 0;
        detail += fmt(" seed %llu: %.3f vs %.3f;", static_cast<unsigned long long>(seed), small, large);
    }
    return {wins >= 2, fmt("mean k N=16 vs N=512 over iterations 500-2500,%s %d/3 seeds agree", detail.c_str(),
                           wins)};
}

struct Criterion {
    int id;
    const char* name;
    double time_limit_s;  // <= 0: no limit
    std::function<Outcome()> check;
};

}  // namespace

int main() {
    ToyRun toy;
    bool toy_done = false;
    const auto toy_run = [&]() -> const ToyRun& {
        if (!toy_done) {
            toy = run_toy_gan();
            toy_done = true;
        }
        return toy;
    };

    const std::vector<Criterion> criteria = {
        {1, "mds spectrum matches independent eigensolver", 5.0, mds_oracle},
        {2, "disc and ellipsoid spectral rank", 1.0, shape_rank},
        {3, "gradient-averaging error scaling", 10.0, gradient_averaging},
        {4, "reverse-mode gradients vs finite differences", 30.0, finite_differences},
        {5, "dirichlet sampler means and simplex", 0.0, dirichlet_means},
        {6, "interpolation decision invariants", 0.0, interpolation_invariants},
        {7, "discriminator feature flattening trend", 300.0,
         [&] {
             const auto& r = toy_run();
             if (!r.error.empty()) return Outcome{false, "training failed: " + r.error};
             return Outcome{r.mass_5000 < r.mass_100,
                            fmt("trailing mass at 100: %.5f, at 5000: %.5f", r.mass_100, r.mass_5000)};
         }},
        {8, "average k falls as the dataset grows", 600.0, k_versus_dataset_size},
        {9, "no non-finite values during toy training", 0.0,
         [&] {
             const auto& r = toy_run();
             if (!r.error.empty()) return Outcome{false, "training failed: " + r.error};
             return Outcome{r.nonfinite == 0, fmt("5000 iterations, %zu non-finite steps", r.nonfinite)};
         }},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.check();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool pass = out.pass;
        std::string timing = fmt("%.2fs", secs);
        if (c.time_limit_s > 0.0) {
            timing += fmt(" / limit %.0fs", c.time_limit_s);
            if (secs >= c.time_limit_s) pass = false;
        }
        if (!pass) ++failed;
        std::printf("criterion %d: %s - %s: %s [%s]\n", c.id, pass ? "PASS" : "FAIL", c.name, out.detail.c_str(),
                    timing.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
