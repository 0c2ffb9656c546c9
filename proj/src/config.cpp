#include "afi/config.hpp"

#include <fstream>
#include <set>

#include "afi/error.hpp"

namespace afi::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& section, std::initializer_list<const char*> known) {
    if (!obj.is_object()) throw ConfigError("config: section '" + section + "' must be an object");
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, _] : obj.items())
        if (!allowed.contains(key)) throw ConfigError("config: unknown key '" + section + "." + key + "'");
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& section) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config: bad value for '" + section + "." + key + "': " + e.what());
    }
}

void read_count(const json& obj, const char* key, std::size_t& out, const std::string& section) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError("config: '" + section + "." + key + "' must be a non-negative integer");
    out = v.get<std::size_t>();
}

void read_seed(const json& obj, const char* key, std::uint64_t& out, const std::string& section) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ConfigError("config: '" + section + "." + key + "' must be an unsigned integer");
    out = v.get<std::uint64_t>();
}

}  // namespace

void ExperimentConfig::set_seed(std::uint64_t seed) {
    dataset.seed = seed;
    train.seed = seed;
    lemma.seed = seed;
    bench.seed = seed;
}

json to_json(const interp::AfiConfig& cfg) {
    json j;
    j["t"] = cfg.t;
    j["threshold_ratio"] = cfg.threshold_ratio;
    j["k"] = cfg.fixed_k ? json(*cfg.fixed_k) : json("adaptive");
    j["p"] = cfg.fixed_p ? json(*cfg.fixed_p) : json("adaptive");
    j["p_max"] = cfg.p_max;
    j["concentration"] = "reciprocal-one-plus";
    return j;
}

interp::AfiConfig parse_afi_config(const json& doc) {
    const std::string s = "afi";
    reject_unknown(doc, s, {"t", "threshold_ratio", "k", "p", "p_max", "concentration"});
    interp::AfiConfig cfg;
    read(doc, "t", cfg.t, s);
    read(doc, "threshold_ratio", cfg.threshold_ratio, s);
    read(doc, "p_max", cfg.p_max, s);
    if (doc.contains("k")) {
        const json& k = doc.at("k");
        if (k.is_string() && k.get<std::string>() == "adaptive") cfg.fixed_k.reset();
        else if (k.is_number_integer() && k.get<long long>() >= 1) cfg.fixed_k = k.get<std::size_t>();
        else throw ConfigError("config: afi.k must be \"adaptive\" or a positive integer");
    }
    if (doc.contains("p")) {
        const json& p = doc.at("p");
        if (p.is_string() && p.get<std::string>() == "adaptive") cfg.fixed_p.reset();
        else if (p.is_number()) cfg.fixed_p = p.get<double>();
        else throw ConfigError("config: afi.p must be \"adaptive\" or a number in [0, 1]");
    }
    if (doc.contains("concentration") && doc.at("concentration") != "reciprocal-one-plus")
        throw ConfigError("config: afi.concentration supports only \"reciprocal-one-plus\"");
    if (!(cfg.t >= 0.0)) throw ConfigError("config: afi.t must be >= 0");
    if (!(cfg.threshold_ratio > 0.0 && cfg.threshold_ratio < 1.0))
        throw ConfigError("config: afi.threshold_ratio must lie in (0, 1)");
    if (cfg.fixed_p && !(*cfg.fixed_p >= 0.0 && *cfg.fixed_p <= 1.0))
        throw ConfigError("config: afi.p must lie in [0, 1]");
    if (!(cfg.p_max >= 0.0 && cfg.p_max <= 1.0)) throw ConfigError("config: afi.p_max must lie in [0, 1]");
    return cfg;
}

ExperimentConfig parse_config(const json& doc) {
    reject_unknown(doc, "<root>", {"dataset", "afi", "train", "lemma", "bench"});
    ExperimentConfig cfg;

    if (doc.contains("dataset")) {
        const json& d = doc.at("dataset");
        const std::string s = "dataset";
        reject_unknown(d, s, {"shape", "n_points", "ambient_dim", "radii", "noise_sigma", "components", "seed"});
        if (d.contains("shape")) {
            if (!d.at("shape").is_string()) throw ConfigError("config: dataset.shape must be a string");
            cfg.dataset.shape = shape_from_string(d.at("shape").get<std::string>());
        }
        read_count(d, "n_points", cfg.dataset.n_points, s);
        read_count(d, "ambient_dim", cfg.dataset.ambient_dim, s);
        read(d, "radii", cfg.dataset.radii, s);
        read(d, "noise_sigma", cfg.dataset.noise_sigma, s);
        read_count(d, "components", cfg.dataset.components, s);
        read_seed(d, "seed", cfg.dataset.seed, s);
    }
    cfg.dataset.validate();

    if (doc.contains("afi")) cfg.train.afi = parse_afi_config(doc.at("afi"));

    if (doc.contains("train")) {
        const json& t = doc.at("train");
        const std::string s = "train";
        reject_unknown(t, s, {"batch_size", "latent_dim", "feature_dim", "hidden", "iterations", "lr", "beta1",
                              "beta2", "afi_on", "trace_every", "seed", "flatten_sample", "mmd_samples",
                              "checkpoint_every", "resume_from"});
        read_count(t, "batch_size", cfg.train.batch_size, s);
        read_count(t, "latent_dim", cfg.train.latent_dim, s);
        read_count(t, "feature_dim", cfg.train.feature_dim, s);
        read_count(t, "hidden", cfg.train.hidden, s);
        read_count(t, "iterations", cfg.train.iterations, s);
        read(t, "lr", cfg.train.lr, s);
        read(t, "beta1", cfg.train.beta1, s);
        read(t, "beta2", cfg.train.beta2, s);
        if (t.contains("afi_on")) {
            if (!t.at("afi_on").is_string()) throw ConfigError("config: train.afi_on must be a string");
            cfg.train.afi_on = gan::afi_target_from_string(t.at("afi_on").get<std::string>());
        }
        read_count(t, "trace_every", cfg.train.trace_every, s);
        read_seed(t, "seed", cfg.train.seed, s);
        read_count(t, "flatten_sample", cfg.train.flatten_sample, s);
        read_count(t, "mmd_samples", cfg.train.mmd_samples, s);
        read_count(t, "checkpoint_every", cfg.checkpoint_every, s);
        read(t, "resume_from", cfg.resume_from, s);
    }
    cfg.train.data_dim = cfg.dataset.ambient_dim;
    try {
        cfg.train.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    if (doc.contains("lemma")) {
        const json& l = doc.at("lemma");
        const std::string s = "lemma";
        reject_unknown(l, s, {"input_dim", "hidden", "output_dim", "neighbors", "radii", "activation", "scheme", "seed"});
        read_count(l, "input_dim", cfg.lemma.input_dim, s);
        read_count(l, "hidden", cfg.lemma.hidden, s);
        read_count(l, "output_dim", cfg.lemma.output_dim, s);
        read_count(l, "neighbors", cfg.lemma.neighbors, s);
        read(l, "radii", cfg.lemma.radii, s);
        if (l.contains("activation")) {
            try {
                cfg.lemma.activation = nn::activation_from_string(l.at("activation").get<std::string>());
            } catch (const std::exception& e) {
                throw ConfigError(std::string("config: lemma.activation: ") + e.what());
            }
        }
        if (l.contains("scheme")) {
            const auto v = l.at("scheme");
            if (v == "antithetic") cfg.lemma.scheme = gan::DirectionScheme::Antithetic;
            else if (v == "independent") cfg.lemma.scheme = gan::DirectionScheme::Independent;
            else throw ConfigError("config: lemma.scheme must be \"antithetic\" or \"independent\"");
        }
        read_seed(l, "seed", cfg.lemma.seed, s);
    }
    if (cfg.lemma.input_dim < 1 || cfg.lemma.hidden < 1 || cfg.lemma.output_dim < 1)
        throw ConfigError("config: lemma dimensions must be >= 1");
    if (cfg.lemma.neighbors < 2) throw ConfigError("config: lemma.neighbors must be >= 2");
    if (cfg.lemma.scheme == gan::DirectionScheme::Antithetic && cfg.lemma.neighbors % 2 != 0)
        throw ConfigError("config: lemma.neighbors must be even for antithetic directions");
    for (double r : cfg.lemma.radii)
        if (!(r >= 0.0)) throw ConfigError("config: lemma.radii must be >= 0");

    if (doc.contains("bench")) {
        const json& b = doc.at("bench");
        const std::string s = "bench";
        reject_unknown(b, s, {"batch_sizes", "feature_dim", "repeats", "seed"});
        read(b, "batch_sizes", cfg.bench.batch_sizes, s);
        read_count(b, "feature_dim", cfg.bench.feature_dim, s);
        read_count(b, "repeats", cfg.bench.repeats, s);
        read_seed(b, "seed", cfg.bench.seed, s);
    }
    for (std::size_t b : cfg.bench.batch_sizes)
        if (b < 1) throw ConfigError("config: bench.batch_sizes must be >= 1");
    if (cfg.bench.feature_dim < 1 || cfg.bench.repeats < 1)
        throw ConfigError("config: bench.feature_dim and bench.repeats must be >= 1");
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
    json j;
    j["dataset"] = {
        {"shape", to_string(cfg.dataset.shape)},
        {"n_points", cfg.dataset.n_points},
        {"ambient_dim", cfg.dataset.ambient_dim},
        {"radii", cfg.dataset.radii},
        {"noise_sigma", cfg.dataset.noise_sigma},
        {"components", cfg.dataset.components},
        {"seed", cfg.dataset.seed},
    };
    j["afi"] = to_json(cfg.train.afi);
    const auto& t = cfg.train;
    j["train"] = {
        {"batch_size", t.batch_size},   {"latent_dim", t.latent_dim},
        {"feature_dim", t.feature_dim}, {"hidden", t.hidden},
        {"iterations", t.iterations},   {"lr", t.lr},
        {"beta1", t.beta1},             {"beta2", t.beta2},
        {"afi_on", gan::to_string(t.afi_on)},
        {"trace_every", t.trace_every}, {"seed", t.seed},
        {"flatten_sample", t.flatten_sample},
        {"mmd_samples", t.mmd_samples},
        {"checkpoint_every", cfg.checkpoint_every},
        {"resume_from", cfg.resume_from},
    };
    j["lemma"] = {
        {"input_dim", cfg.lemma.input_dim},
        {"hidden", cfg.lemma.hidden},
        {"output_dim", cfg.lemma.output_dim},
        {"neighbors", cfg.lemma.neighbors},
        {"radii", cfg.lemma.radii},
        {"activation", nn::to_string(cfg.lemma.activation)},
        {"scheme", cfg.lemma.scheme == gan::DirectionScheme::Antithetic ? "antithetic" : "independent"},
        {"seed", cfg.lemma.seed},
    };
    j["bench"] = {
        {"batch_sizes", cfg.bench.batch_sizes},
        {"feature_dim", cfg.bench.feature_dim},
        {"repeats", cfg.bench.repeats},
        {"seed", cfg.bench.seed},
    };
    return j;
}

}  // namespace afi::cli
