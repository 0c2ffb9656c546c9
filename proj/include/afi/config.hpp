#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "afi/datasets.hpp"
#include "afi/gan.hpp"
#include "afi/interpolation.hpp"
#include "afi/lemma.hpp"
#include "json.hpp"

namespace afi::cli {

struct LemmaSpec {
    std::size_t input_dim = 16;
    std::size_t hidden = 32;
    std::size_t output_dim = 8;
    std::size_t neighbors = 8;
    std::vector<double> radii{0.0, 1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
    nn::Activation activation = nn::Activation::Tanh;
    gan::DirectionScheme scheme = gan::DirectionScheme::Antithetic;
    std::uint64_t seed = 0;

    friend bool operator==(const LemmaSpec&, const LemmaSpec&) = default;
};

struct BenchSpec {
    std::vector<std::size_t> batch_sizes{8, 16, 32, 64};
    std::size_t feature_dim = 20;
    std::size_t repeats = 50;
    std::uint64_t seed = 0;

    friend bool operator==(const BenchSpec&, const BenchSpec&) = default;
};

/// Everything a subcommand may read. Sections missing from the file keep their defaults.
struct ExperimentConfig {
    DatasetSpec dataset;
    gan::TrainConfig train;  ///< train.afi holds the "afi" section; data_dim follows dataset.ambient_dim
    std::size_t checkpoint_every = 0;
    std::string resume_from;
    LemmaSpec lemma;
    BenchSpec bench;

    /// Overrides every seed in the document.
    void set_seed(std::uint64_t seed);

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws ConfigError on unknown keys, wrong types, or out-of-range values.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

nlohmann::json to_json(const interp::AfiConfig& cfg);
interp::AfiConfig parse_afi_config(const nlohmann::json& doc);

}  // namespace afi::cli
