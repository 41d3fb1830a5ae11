// waitline: waiting-line auction simulator and verification toolkit.

#include "waitline/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"waiting-line auction simulator"};
    app.require_subcommand(1);

    waitline::CliOptions opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--seed", opt.seed, "seed override (also via SEED env var)");
        sub->add_option("--runs", opt.runs, "run count override");
        sub->add_option("--format", opt.format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--particles", opt.particles, "belief-trace particle count");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "run a batch and persist outcomes");
    CLI::App* verify = app.add_subcommand("verify", "run certification suites");
    CLI::App* welfare = app.add_subcommand("welfare", "surplus comparison tables");
    add_common(simulate);
    add_common(verify);
    add_common(welfare);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return waitline::cmd_simulate(opt);
        if (verify->parsed()) return waitline::cmd_verify(opt);
        if (welfare->parsed()) return waitline::cmd_welfare(opt);
    } catch (const waitline::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return waitline::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return waitline::kExitConfigError;
    }
    return waitline::kExitConfigError;
}
