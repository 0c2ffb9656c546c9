#include "afi/commands.hpp"

#include <chrono>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>

#include "afi/error.hpp"
#include "afi/lemma.hpp"

namespace afi::cli {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream os(path, mode);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os.precision(std::numeric_limits<double>::max_digits10);
    return os;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_checkpoint(const gan::GanTrainer& trainer, const fs::path& path) {
    auto os = open_out(path, std::ios::out | std::ios::binary);
    trainer.save_checkpoint(os);
}

}  // namespace

ShapeReport analyze_shape(const ExperimentConfig& cfg, const fs::path& out_dir) {
    ensure_dir(out_dir);
    const Matrix data = generate_dataset(cfg.dataset);
    const auto dist = linalg::normalize_distance_matrix(linalg::pairwise_distance_matrix(data));

    ShapeReport rep;
    rep.spectrum = linalg::mds_spectrum(dist);
    const double ratio = cfg.train.afi.threshold_ratio;
    rep.threshold = ratio * rep.spectrum.largest();
    if (rep.spectrum.largest() > 1e-12)
        for (double l : rep.spectrum.eigenvalues)
            if (l >= rep.threshold) ++rep.above_threshold;
    rep.k = interp::effective_k(rep.spectrum, ratio);

    auto csv = open_out(out_dir / "eigencurve.csv");
    csv << "index,eigenvalue\n";
    for (std::size_t i = 0; i < rep.spectrum.size(); ++i) csv << i + 1 << ',' << rep.spectrum.eigenvalues[i] << '\n';

    nlohmann::json j;
    j["shape"] = to_string(cfg.dataset.shape);
    j["n_points"] = cfg.dataset.n_points;
    j["lambda_max"] = rep.spectrum.largest();
    j["threshold_ratio"] = ratio;
    j["threshold"] = rep.threshold;
    j["above_threshold"] = rep.above_threshold;
    j["k"] = rep.k;
    j["negatives_clamped"] = rep.spectrum.negatives_clamped;
    open_out(out_dir / "shape_report.json") << j.dump(2) << '\n';
    return rep;
}

LemmaReport verify_lemma(const ExperimentConfig& cfg, const fs::path& out_dir) {
    ensure_dir(out_dir);
    const auto& spec = cfg.lemma;
    rnd::Rng root(spec.seed);
    rnd::Rng init = root.fork(1);
    const nn::MlpNet net({spec.input_dim, spec.hidden, spec.output_dim}, {spec.activation, spec.activation}, init);
    rnd::Rng point_rng = root.fork(2);
    std::vector<double> x(spec.input_dim);
    for (double& v : x) v = point_rng.normal();
    std::vector<double> target(spec.output_dim);
    for (double& v : target) v = point_rng.normal();
    const auto loss = gan::quadratic_loss(target);

    gan::LemmaOptions opts;
    opts.scheme = spec.scheme;
    LemmaReport rep;
    std::vector<double> devs;
    std::vector<double> errs;
    for (double r : spec.radii) {
        // Same directions at every radius so the sweep isolates the scale.
        rnd::Rng dir_rng = root.fork(3);
        const auto res = gan::gradient_averaging_error(net, loss, x, r, spec.neighbors, dir_rng, opts);
        rep.rows.push_back({r, res.max_dev, res.error});
        if (r > 0.0 && res.max_dev > 0.0 && res.error > 0.0) {
            devs.push_back(res.max_dev);
            errs.push_back(res.error);
        }
    }
    rep.slope = devs.size() >= 2 ? gan::loglog_slope(devs, errs) : std::numeric_limits<double>::quiet_NaN();

    auto csv = open_out(out_dir / "lemma_scaling.csv");
    csv << "radius,max_dev,error\n";
    for (const auto& row : rep.rows) csv << row.radius << ',' << row.max_dev << ',' << row.error << '\n';

    nlohmann::json j;
    j["slope"] = rep.slope;
    j["points_in_fit"] = devs.size();
    j["neighbors"] = spec.neighbors;
    open_out(out_dir / "lemma_report.json") << j.dump(2) << '\n';
    return rep;
}

TrainReport train(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    ensure_dir(out_dir);
    gan::GanTrainer trainer(cfg.train, generate_dataset(cfg.dataset));
    if (!cfg.resume_from.empty()) {
        std::ifstream in(cfg.resume_from, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open checkpoint " + cfg.resume_from);
        trainer.load_checkpoint(in);
    }

    const std::size_t spectrum_size = std::min(cfg.train.flatten_sample, trainer.data().rows());
    auto trace_csv = open_out(out_dir / "trace.csv");
    trace_csv << gan::trace_csv_header(spectrum_size) << '\n';
    auto decisions = open_out(out_dir / "decisions.jsonl");

    TrainReport rep;
    std::string last_row = "(none)";
    try {
        while (trainer.iteration() < cfg.train.iterations) {
            const auto stats = trainer.step();
            if (stats.iteration % cfg.train.trace_every == 0) {
                auto rec = trainer.trace(stats);
                last_row = gan::trace_csv_row(rec);
                trace_csv << last_row << '\n';
                nlohmann::json dj = interp::to_json(trainer.last_real_decision());
                dj["iteration"] = stats.iteration;
                decisions << dj.dump() << '\n';
                log << "iter " << stats.iteration << " d_loss " << stats.d_loss << " g_loss " << stats.g_loss
                    << " k " << stats.k << " p " << stats.p << '\n';
                rep.traces.push_back(std::move(rec));
            }
            if (cfg.checkpoint_every > 0 && stats.iteration % cfg.checkpoint_every == 0)
                write_checkpoint(trainer, out_dir / ("checkpoint_" + std::to_string(stats.iteration) + ".bin"));
        }
    } catch (const DivergenceError& e) {
        trace_csv.flush();
        throw DivergenceError(e.iteration(), std::string(e.what()) + "; last finite trace: " + last_row);
    }
    write_checkpoint(trainer, out_dir / "checkpoint.bin");
    rep.iterations = trainer.iteration();
    return rep;
}

void afi_bench(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    ensure_dir(out_dir);
    auto csv = open_out(out_dir / "afi_bench.csv");
    csv << "batch_size,feature_dim,repeats,mean_microseconds,mean_k\n";
    rnd::Rng rng(cfg.bench.seed);
    for (std::size_t b : cfg.bench.batch_sizes) {
        Matrix feats(b, cfg.bench.feature_dim);
        double total_us = 0.0;
        double total_k = 0.0;
        for (std::size_t rep = 0; rep < cfg.bench.repeats; ++rep) {
            for (double& v : feats.data()) v = rng.normal();
            const auto t0 = std::chrono::steady_clock::now();
            const auto res = interp::afi_augment(feats, cfg.train.afi, rng);
            const auto t1 = std::chrono::steady_clock::now();
            total_us += std::chrono::duration<double, std::micro>(t1 - t0).count();
            total_k += static_cast<double>(res.decision.k);
        }
        const double n = static_cast<double>(cfg.bench.repeats);
        csv << b << ',' << cfg.bench.feature_dim << ',' << cfg.bench.repeats << ',' << total_us / n << ','
            << total_k / n << '\n';
        log << "b=" << b << " mean " << total_us / n << " us\n";
    }
}

}  // namespace afi::cli
