// nmqc: coefficient tables, optimal control, trajectories, ensembles and figure presets
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nmqc/errors.hpp"
#include "nmqc_cli/commands.hpp"

int main(int argc, char** argv) {
    using namespace nmqc::cli;

    CLI::App app{"nmqc: non-Markovian qubit decoherence control"};
    app.require_subcommand(1);

    Overrides ov;
    std::string config_path, preset, out, mode;
    std::uint64_t seed = 0;
    std::size_t trajectories = 0;
    unsigned workers = 0;

    app.add_option("--config", config_path, "YAML configuration file")->check(CLI::ExistingFile);
    app.add_option("--preset", preset, "none | fig1 | fig2a | fig2b | fig2c | fig2d");
    app.add_option("--seed", seed, "master seed (u64)");
    app.add_option("--out", out, "output directory");
    app.add_option("--trajectories", trajectories, "ensemble size")->check(CLI::PositiveNumber);
    app.add_option("--mode", mode, "nonmarkovian | markovian");
    app.add_option("--workers", workers, "ensemble threads, 0 = all cores (does not affect results)");

    const char* commands[][2] = {
        {"coeffs", "tabulate Delta(t), gamma(t), Gamma1, Gamma2"},
        {"control", "solve the optimality system by forward-backward sweep"},
        {"simulate", "integrate one stochastic trajectory"},
        {"ensemble", "run a trajectory ensemble and reduce statistics"},
        {"fig1", "deterministic control-free temperature scan"},
        {"fig2", "controlled / uncontrolled / Markovian ensemble comparison"},
    };
    for (const auto& c : commands) {
        app.add_subcommand(c[0], c[1])->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigInvalid;
    }

    if (!config_path.empty()) ov.config_path = config_path;
    if (app.count("--preset")) ov.preset = preset;
    if (app.count("--seed")) ov.seed = seed;
    if (app.count("--out")) ov.out = out;
    if (app.count("--trajectories")) ov.trajectories = trajectories;
    if (app.count("--mode")) ov.mode = mode;

    nmqc::RunConfig cfg;
    try {
        cfg = resolve_config(ov);
    } catch (const nmqc::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigInvalid;
    } catch (const nmqc::ValidationError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigInvalid;
    } catch (const IoError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigInvalid;
    }

    const Context ctx{std::cout, workers};
    return run_command(app.get_subcommands().front()->get_name(), cfg, ctx, std::cerr);
}
