// hjm: command line front end. Every command reads a flat key = value config;
// flags override the matching config keys.

#include "app.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App cli{"Heath-Jarrow-Morton engine for power and gas forward markets"};
    cli.require_subcommand(1, 1);

    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::optional<int> paths;
    std::optional<double> threshold;
    std::optional<int> factors;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"ingest", "quotes to relative panels, autocorrelation, moments and correlation surfaces"},
        {"curve", "bootstrap monthly forward curves and check them against the quotes"},
        {"calibrate", "PCA of the panel log returns into a reduced-factor model"},
        {"simulate", "forward paths, summaries and the variance and correlation sanity report"},
        {"price", "value the contracts listed in the config"},
        {"pipeline", "ingest, curve, calibrate, simulate and price in one run"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = cli.add_subcommand(name, help);
        sub->add_option("--config", config_file, "run configuration (key = value)")->required();
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--paths", paths, "number of simulated paths")->check(CLI::PositiveNumber);
        sub->add_option("--threshold", threshold, "explained-variance threshold in (0, 1]");
        sub->add_option("--factors", factors, "fixed number of factors")->check(CLI::PositiveNumber);
    }

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : 1;
    }

    hjm::app::RunConfig cfg;
    try {
        cfg = hjm::app::load_config(config_file);
    } catch (const hjm::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.out = out_dir;
    if (paths) cfg.n_paths = *paths;
    if (threshold) cfg.threshold = *threshold;
    if (factors) cfg.factors = *factors;

    return hjm::app::run_command(cli.get_subcommands().front()->get_name(), cfg);
}
