// Experiment runner: analyze-shape, verify-lemma, train, afi-bench.
// Exit codes: 0 success, 1 config error, 2 runtime or divergence error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "afi/commands.hpp"
#include "afi/config.hpp"
#include "afi/error.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "JSON experiment config (defaults used when omitted)");
    cmd->add_option("--seed", args.seed, "Override every seed in the config");
    cmd->add_option("--out", args.out, "Output directory")->capture_default_str();
    cmd->add_flag("--quiet", args.quiet, "Suppress progress output");
}

afi::cli::ExperimentConfig resolve(const CommonArgs& args) {
    auto cfg = args.config.empty() ? afi::cli::parse_config(nlohmann::json::object())
                                   : afi::cli::load_config(args.config);
    if (args.seed) cfg.set_seed(*args.seed);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive feature interpolation experiments"};
    app.require_subcommand(1);
    CommonArgs args;
    auto* shape = app.add_subcommand("analyze-shape", "MDS eigenvalue curve of a synthetic point set");
    auto* lemma = app.add_subcommand("verify-lemma", "Gradient-averaging error across a radius sweep");
    auto* train = app.add_subcommand("train", "Hinge GAN training with feature interpolation");
    auto* bench = app.add_subcommand("afi-bench", "Micro-timing of the augmentation step");
    for (auto* cmd : {shape, lemma, train, bench}) add_common(cmd, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    std::ofstream null_stream;
    std::ostream& log = args.quiet ? null_stream : std::cout;
    try {
        const auto cfg = resolve(args);
        const std::filesystem::path out = args.out;
        if (shape->parsed()) {
            const auto rep = afi::cli::analyze_shape(cfg, out);
            log << "lambda_max " << rep.spectrum.largest() << " above_threshold " << rep.above_threshold << " k "
                << rep.k << '\n';
        } else if (lemma->parsed()) {
            const auto rep = afi::cli::verify_lemma(cfg, out);
            for (const auto& row : rep.rows)
                log << "r " << row.radius << " max_dev " << row.max_dev << " error " << row.error << '\n';
            log << "slope " << rep.slope << '\n';
        } else if (train->parsed()) {
            const auto rep = afi::cli::train(cfg, out, log);
            log << "completed " << rep.iterations << " iterations\n";
        } else if (bench->parsed()) {
            afi::cli::afi_bench(cfg, out, log);
        }
    } catch (const afi::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const afi::DivergenceError& e) {
        std::cerr << "training diverged: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
