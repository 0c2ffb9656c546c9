#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "afi/config.hpp"
#include "afi/gan.hpp"
#include "afi/linalg.hpp"

namespace afi::cli {

struct ShapeReport {
    linalg::MdsSpectrum spectrum;
    double threshold = 0.0;
    std::size_t above_threshold = 0;  ///< eigenvalues >= threshold_ratio * lambda_max
    std::size_t k = 1;
};

struct LemmaRow {
    double radius = 0.0;
    double max_dev = 0.0;
    double error = 0.0;
};

struct LemmaReport {
    std::vector<LemmaRow> rows;
    double slope = 0.0;  ///< log-log fit over rows with radius > 0
};

struct TrainReport {
    std::vector<gan::TraceRecord> traces;
    std::size_t iterations = 0;
};

/// Dataset -> normalized distances -> MDS spectrum. Writes eigencurve.csv and shape_report.json.
ShapeReport analyze_shape(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Radius sweep of the gradient-averaging error. Writes lemma_scaling.csv and lemma_report.json.
LemmaReport verify_lemma(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// GAN training with trace.csv, decisions.jsonl, checkpoint_<it>.bin and checkpoint.bin.
/// On divergence rethrows DivergenceError with the last finite trace row in the message.
TrainReport train(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

/// Mean wall time of afi_augment per batch size. Writes afi_bench.csv.
void afi_bench(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace afi::cli
