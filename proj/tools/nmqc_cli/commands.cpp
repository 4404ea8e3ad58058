#include "nmqc_cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <vector>

#include "nmqc/nmqc.hpp"

namespace nmqc::cli {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read configuration file " + path.string());
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Writes via a callback; any stream failure becomes an IoError.
void write_output(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    body(out);
    out.flush();
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

std::string csv_header(std::string_view command, const RunConfig& cfg) {
    std::ostringstream os;
    os << "command: " << command << '\n';
    os << "master_seed: " << cfg.integrator.master_seed << '\n';
    os << echo_config(cfg);
    return os.str();
}

// Echoes the configuration and makes sure the output directory exists before any work starts.
void echo(const Context& ctx, std::string_view command, const RunConfig& cfg) {
    ctx.log << "# nmqc " << command << "\n" << echo_config(cfg) << "---\n";
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec || !fs::is_directory(cfg.output_dir)) {
        throw IoError("cannot create output directory " + cfg.output_dir);
    }
}

double horizon(const RunConfig& cfg) {
    return std::max(cfg.integrator.t_max, cfg.control.t_max);
}

CoefficientTable make_table(const RunConfig& cfg, RateMode mode, double t_max) {
    if (mode == RateMode::markovian) {
        return build_markov_table(cfg.reservoir, t_max, cfg.table_dt);
    }
    return build_coefficient_table(cfg.reservoir, t_max, cfg.table_dt, cfg.quadrature);
}

std::string table_diagnostics(const CoefficientTable& t) {
    std::ostringstream os;
    os << "quadrature_converged: " << (t.quadrature_converged() ? "true" : "false") << '\n'
       << "refinement_ok: " << (t.refinement_ok() ? "true" : "false") << '\n'
       << "max_refinement_change: " << format_number(t.max_refinement_change()) << '\n'
       << "gamma_negative_points: " << t.gamma_negative_count() << '\n'
       << "Delta_inf: " << format_number(t.asymptotic().delta) << '\n'
       << "gamma_inf: " << format_number(t.asymptotic().gamma) << '\n';
    return os.str();
}

// Synthesizes the control when the configuration asks for feedback. Sets converged to false
// if the sweep stopped at max_iter.
ControlPolicy make_policy(const RunConfig& cfg, const CoefficientTable& table, const Context& ctx,
                          bool& converged) {
    converged = true;
    if (cfg.policy == PolicyKind::zero) {
        return zero_policy();
    }
    const OCResult res = forward_backward_sweep(cfg.reservoir, table, cfg.initial_state, cfg.control, cfg.mode);
    ctx.log << "control: " << control_summary(res) << '\n';
    converged = res.converged;
    return feedback_policy(res);
}

std::string kbt_label(double kBT) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", kBT);
    return buf;
}

}  // namespace

RunConfig resolve_config(const Overrides& ov) {
    RunConfig cfg = ov.config_path ? parse_config(read_file(*ov.config_path)) : parse_config("");
    if (ov.preset) {
        if (const auto p = parse_preset(*ov.preset)) {
            apply_preset(cfg, *p);
        } else {
            cfg.preset.reset();
        }
    }
    if (ov.seed) {
        cfg.integrator.master_seed = *ov.seed;
    }
    if (ov.out) {
        cfg.output_dir = *ov.out;
    }
    if (ov.trajectories) {
        cfg.ensemble_size = *ov.trajectories;
    }
    if (ov.mode) {
        cfg.mode = parse_mode(*ov.mode);
    }
    cfg.validate();
    return cfg;
}

int cmd_coeffs(const RunConfig& cfg, const Context& ctx) {
    echo(ctx, "coeffs", cfg);
    const CoefficientTable table = make_table(cfg, cfg.mode, cfg.integrator.t_max);
    const fs::path path = fs::path(cfg.output_dir) / "coefficients.csv";
    write_output(path, [&](std::ostream& os) {
        write_coefficients_csv(os, table, csv_header("coeffs", cfg) + table_diagnostics(table));
    });
    ctx.log << "wrote " << path.string() << " (" << table.size() << " rows)\n";
    return kOk;
}

int cmd_control(const RunConfig& cfg, const Context& ctx) {
    echo(ctx, "control", cfg);
    const CoefficientTable table = make_table(cfg, cfg.mode, cfg.control.t_max);
    const OCResult res = forward_backward_sweep(cfg.reservoir, table, cfg.initial_state, cfg.control, cfg.mode);
    const fs::path path = fs::path(cfg.output_dir) / "control.csv";
    write_output(path, [&](std::ostream& os) { write_control_csv(os, res, csv_header("control", cfg)); });
    ctx.log << "control: " << control_summary(res) << '\n';
    ctx.log << "wrote " << path.string() << '\n';
    return res.converged ? kOk : kNotConverged;
}

int cmd_simulate(const RunConfig& cfg, const Context& ctx) {
    echo(ctx, "simulate", cfg);
    const CoefficientTable table = make_table(cfg, cfg.mode, horizon(cfg));
    bool converged = true;
    const ControlPolicy policy = make_policy(cfg, table, ctx, converged);
    const TrajectoryRecord rec = simulate(cfg.reservoir, table, cfg.integrator, policy, cfg.mode, cfg.initial_state);
    const fs::path path = fs::path(cfg.output_dir) / "trajectory.csv";
    write_output(path, [&](std::ostream& os) { write_trajectory_csv(os, rec, csv_header("simulate", cfg)); });
    ctx.log << "wrote " << path.string() << " (clamp events: " << rec.clamp_count << ")\n";
    return converged ? kOk : kNotConverged;
}

int cmd_ensemble(const RunConfig& cfg, const Context& ctx) {
    echo(ctx, "ensemble", cfg);
    const CoefficientTable table = make_table(cfg, cfg.mode, horizon(cfg));
    bool converged = true;
    const ControlPolicy policy = make_policy(cfg, table, ctx, converged);
    const EnsembleStats stats =
        run_ensemble(cfg.reservoir, table, cfg.integrator, policy, cfg.mode, cfg.initial_state, cfg.ensemble_size,
                     EnsembleOptions{.workers = ctx.workers, .stride = cfg.stride});
    const std::string header = csv_header("ensemble", cfg);
    const fs::path dir(cfg.output_dir);
    write_output(dir / "ensemble.csv", [&](std::ostream& os) { write_ensemble_csv(os, stats, header); });
    write_output(dir / "ensemble.json", [&](std::ostream& os) { os << ensemble_sidecar_json(stats, header); });
    ctx.log << "wrote " << (dir / "ensemble.csv").string() << " and ensemble.json\n";
    return converged ? kOk : kNotConverged;
}

int cmd_fig1(const RunConfig& base, const Context& ctx) {
    RunConfig cfg = base;
    if (!cfg.preset) {
        apply_preset(cfg, Preset::fig1);
    }
    echo(ctx, "fig1", cfg);
    const TemperatureScan scan = temperature_scan(cfg.reservoir, cfg.fig1_kBT, cfg.integrator.t_max, cfg.integrator.dt,
                                                  cfg.table_dt, cfg.initial_state, cfg.quadrature);
    const std::string header = csv_header("fig1", cfg);
    for (const ScanCurve& c : scan.curves) {
        const std::string name =
            "fig1_" + std::string(to_string(c.mode)) + "_kBT" + kbt_label(c.kBT) + ".csv";
        const fs::path path = fs::path(cfg.output_dir) / name;
        write_output(path, [&](std::ostream& os) {
            write_lambda_csv(os, scan.times, c.lambda,
                             header + "curve: mode=" + std::string(to_string(c.mode)) + " kBT=" + format_number(c.kBT));
        });
        ctx.log << "wrote " << path.string() << '\n';
    }
    return kOk;
}

int cmd_fig2(const RunConfig& base, const Context& ctx) {
    std::vector<Preset> panels;
    if (base.preset && *base.preset != Preset::fig1) {
        panels.push_back(*base.preset);
    } else {
        panels = {Preset::fig2a, Preset::fig2b, Preset::fig2c, Preset::fig2d};
    }
    int code = kOk;
    for (const Preset panel : panels) {
        RunConfig cfg = base;
        apply_preset(cfg, panel);
        const std::string label(to_string(panel));
        echo(ctx, "fig2 " + label, cfg);
        const CoefficientTable table = make_table(cfg, RateMode::non_markovian, horizon(cfg));
        const ModeComparison cmp = compare_modes(cfg.reservoir, table, cfg.control, cfg.integrator, cfg.initial_state,
                                                 cfg.ensemble_size,
                                                 EnsembleOptions{.workers = ctx.workers, .stride = cfg.stride});
        ctx.log << label << " control: " << control_summary(cmp.control) << '\n';
        const int warning = cmp.control.converged ? 0 : 1;
        if (warning) {
            code = kNotConverged;
        }
        const std::string header = csv_header("fig2", cfg) + "control: " + control_summary(cmp.control) + '\n';
        const fs::path dir(cfg.output_dir);
        const auto write_stats = [&](const std::string& branch, const EnsembleStats& s) {
            const fs::path path = dir / (label + "_" + branch + ".csv");
            write_output(path, [&](std::ostream& os) {
                write_ensemble_csv(os, s, header + "branch: " + branch, warning);
            });
            ctx.log << "wrote " << path.string() << '\n';
        };
        write_stats("controlled", cmp.controlled);
        write_stats("uncontrolled", cmp.uncontrolled);
        write_stats("markovian", cmp.markovian_uncontrolled);
        const fs::path target = dir / (label + "_target.csv");
        write_output(target, [&](std::ostream& os) {
            write_lambda_csv(os, cmp.controlled.times, cmp.target_lambda, header + "branch: target", warning);
        });
        ctx.log << "wrote " << target.string() << '\n';
    }
    return code;
}

int run_command(std::string_view name, const RunConfig& cfg, const Context& ctx, std::ostream& err) {
    try {
        if (name == "coeffs") return cmd_coeffs(cfg, ctx);
        if (name == "control") return cmd_control(cfg, ctx);
        if (name == "simulate") return cmd_simulate(cfg, ctx);
        if (name == "ensemble") return cmd_ensemble(cfg, ctx);
        if (name == "fig1") return cmd_fig1(cfg, ctx);
        if (name == "fig2") return cmd_fig2(cfg, ctx);
        err << "error: unknown command '" << name << "'\n";
        return kConfigInvalid;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIoFailure;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kConfigInvalid;
    } catch (const ValidationError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kConfigInvalid;
    } catch (const RangeError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kConfigInvalid;
    } catch (const ResourceError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kConfigInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
}

}  // namespace nmqc::cli
