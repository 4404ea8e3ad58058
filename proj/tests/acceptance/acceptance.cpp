// Acceptance driver: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.
//
// Usage: nmqc_acceptance <acceptance.yaml> [scratch_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <yaml-cpp/yaml.h>

#include "nmqc_cli/commands.hpp"
#include "nmqc/config.hpp"
#include "nmqc/control.hpp"
#include "nmqc/ensemble.hpp"
#include "nmqc/kernels.hpp"
#include "nmqc/qubit.hpp"
#include "nmqc/rng.hpp"
#include "nmqc/sde.hpp"

namespace fs = std::filesystem;
using namespace nmqc;

namespace {

const BlochState kReferenceState{std::sqrt(2.0) / 4.0, std::sqrt(2.0) / 4.0, std::sqrt(3.0) / 2.0};

struct Margins {
    double fig2_time{15.0};
    double fig2_gap{0.2};
    double fig2_floor{0.1};
    std::vector<double> fig1_kBT{0.0, 1.0, 5.0, 10.0};
    double fig1_t_max{30.0};
    std::size_t reproducibility_trajectories{40};
};

struct Verdict {
    bool pass{false};
    std::string detail;
};

class Clock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_{std::chrono::steady_clock::now()};
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

ReservoirParams bath(double r, double kBT) {
    ReservoirParams p;
    p.omega_c = r;
    p.kBT = kBT;
    return p;
}

// Adaptive Gauss-Kronrod of alpha^2 mu(tau) sin(omega0 tau) over [0, t].
double gamma_by_quadrature(double t, const ReservoirParams& p) {
    auto f = [&](double tau) {
        return 2.0 * p.gamma0 * p.omega_c * p.omega_c * std::exp(-p.omega_c * tau) * std::sin(p.omega0 * tau);
    };
    return p.alpha_sq * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, t, 30, 1e-14);
}

// coth x -> 1/x limit of Delta(t).
double delta_high_t(double t, const ReservoirParams& p) {
    const double wc = p.omega_c, w0 = p.omega0;
    return p.alpha_sq * 4.0 * p.gamma0 * p.kBT * wc *
           (wc - std::exp(-wc * t) * (wc * std::cos(w0 * t) - w0 * std::sin(w0 * t))) / (wc * wc + w0 * w0);
}

Verdict criterion1() {
    Clock clock;
    double worst = 0.0;
    for (const double r : {0.1, 0.5, 3.0}) {
        for (const double kBT : {0.0, 1.0, 10.0}) {
            const auto p = bath(r, kBT);
            for (int i = 1; i <= 300; ++i) {
                const double t = 0.1 * i;
                const double q = gamma_by_quadrature(t, p);
                worst = std::max(worst, std::abs(damping_coefficient(t, p) - q) / std::abs(q));
            }
        }
    }
    const double secs = clock.seconds();
    return {worst <= 1e-8 && secs < 5.0, "max rel err " + fmt(worst) + ", " + fmt(secs) + " s"};
}

Verdict criterion2() {
    const auto p = bath(0.5, 100.0);
    double worst = 0.0;
    for (int i = 0; i <= 78; ++i) {
        const double t = 0.5 + 0.25 * i;
        const double exact = delta_high_t(t, p);
        worst = std::max(worst, std::abs(diffusion_coefficient(t, p) - exact) / std::abs(exact));
    }
    return {worst <= 0.01, "max rel err " + fmt(worst)};
}

Verdict criterion3() {
    const auto table = build_coefficient_table(bath(0.1, 10.0), 20.0, 0.01);
    const auto& d = table.delta();
    const auto it = std::min_element(d.begin(), d.end());
    const double t_min = table.times()[static_cast<std::size_t>(it - d.begin())];
    return {*it < 0.0, "min Delta " + fmt(*it) + " at t = " + fmt(t_min)};
}

Verdict criterion4() {
    const ReservoirParams p;
    const auto table = build_coefficient_table(p, 10.0, 0.05);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ut(0.0, 10.0), uu(-2.0, 2.0), uc(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        BlochState s;
        do {
            s = {uc(rng), uc(rng), uc(rng)};
        } while (s.norm_sq() > 1.0);
        const ControlInput u{uu(rng), uu(rng)};
        const double t = ut(rng);
        const RateMode mode = i % 2 == 0 ? RateMode::non_markovian : RateMode::markovian;
        const auto img = bloch_image(matrix_drift_oracle(density_from_bloch(s), t, u, table, p, mode));
        const auto d = drift(s, t, u, table, p, mode);
        worst = std::max({worst, std::abs(img.x - d.x), std::abs(img.y - d.y), std::abs(img.z - d.z)});
    }
    return {worst <= 1e-12, "max componentwise diff " + fmt(worst)};
}

Verdict criterion5() {
    ReservoirParams p;
    p.alpha_sq = 0.0;
    p.M = 0.05;
    p.eta = 1.0;
    const double t_max = 10.0, fine_dt = 5e-5, coarse_dt = 1e-4;
    const auto table = build_markov_table(p, t_max, 0.01);
    const std::size_t paths = 16;
    auto max_dev = [](const TrajectoryRecord& rec) {
        double worst = 0.0;
        for (const auto& s : rec.states) worst = std::max(worst, std::abs(1.0 - s.norm()));
        return worst;
    };
    double sum_fine = 0.0, sum_coarse = 0.0, worst_coarse = 0.0;
    for (std::size_t i = 0; i < paths; ++i) {
        const auto fine_dw = wiener_increments(static_cast<std::size_t>(std::llround(t_max / fine_dt)), fine_dt,
                                               20240601, i);
        std::vector<double> coarse_dw(fine_dw.size() / 2);
        for (std::size_t k = 0; k < coarse_dw.size(); ++k) coarse_dw[k] = fine_dw[2 * k] + fine_dw[2 * k + 1];
        IntegratorConfig fine{.dt = fine_dt, .t_max = t_max};
        IntegratorConfig coarse{.dt = coarse_dt, .t_max = t_max};
        const double df = max_dev(
            simulate_with_noise(p, table, fine, zero_policy(), RateMode::non_markovian, kReferenceState, fine_dw));
        const double dc = max_dev(
            simulate_with_noise(p, table, coarse, zero_policy(), RateMode::non_markovian, kReferenceState, coarse_dw));
        sum_fine += df;
        sum_coarse += dc;
        worst_coarse = std::max(worst_coarse, dc);
    }
    const double ratio = sum_coarse / sum_fine;
    return {worst_coarse <= 5e-3 && ratio >= 1.5 && ratio <= 2.5,
            "max dev at dt=1e-4 " + fmt(worst_coarse) + ", halving ratio " + fmt(ratio) + " over " +
                std::to_string(paths) + " paths"};
}

Verdict criterion6() {
    Clock clock;
    ReservoirParams p;
    p.alpha_sq = 0.0;
    p.M = 0.05;
    p.eta = 1.0;
    const auto table = build_markov_table(p, 10.0, 0.01);
    IntegratorConfig cfg{.dt = 1e-3, .t_max = 10.0};
    const std::size_t n = 2000;
    const auto stats = run_ensemble(p, table, cfg, zero_policy(), RateMode::non_markovian, kReferenceState, n);
    const double se = std::sqrt(stats.var_z.back() / static_cast<double>(n));
    const double dev = std::abs(stats.mean_z.back() - kReferenceState.z);
    const double secs = clock.seconds();
    return {se > 0.0 && dev <= 4.0 * se && secs < 120.0,
            "|mean z - z0| = " + fmt(dev) + " vs 4 SE = " + fmt(4.0 * se) + ", " + fmt(secs) + " s"};
}

Verdict criterion7() {
    OCConfig oc;
    ReservoirParams lin;
    lin.alpha_sq = 0.0;
    lin.M = 0.0;
    const double e_lin = gradient_check(lin, build_markov_table(lin, oc.t_max, 0.01), kReferenceState, oc, 1e-5);
    const ReservoirParams reference;
    const double e_reference =
        gradient_check(reference, build_coefficient_table(reference, oc.t_max, 0.01), kReferenceState, oc, 1e-5);
    return {e_lin <= 1e-6 && e_reference <= 1e-3, "linear " + fmt(e_lin) + ", reference " + fmt(e_reference)};
}

Verdict criterion8() {
    const ReservoirParams p;  // r = 0.5, kBT = 10, M = 0.05, eta = 1, alpha^2 = 0.01
    OCConfig oc;
    const auto table = build_coefficient_table(p, oc.t_max, 0.01);
    OCConfig off = oc;
    off.theta = 0.0;
    const auto zero = forward_backward_sweep(p, table, kReferenceState, off);
    const bool zero_ok = zero.converged && zero.iterations == 1 &&
                         std::all_of(zero.control.u.begin(), zero.control.u.end(),
                                     [](const ControlInput& u) { return u.ux == 0.0 && u.uy == 0.0; });
    const auto res = forward_backward_sweep(p, table, kReferenceState, oc);
    const bool reference_ok = res.converged && res.iterations <= 500 && res.cost < res.zero_control_cost;
    return {zero_ok && reference_ok, "theta=0 iterations " + std::to_string(zero.iterations) + "; reference iterations " +
                                     std::to_string(res.iterations) + ", cost " + fmt(res.cost) + " vs u=0 " +
                                     fmt(res.zero_control_cost)};
}

Verdict criterion9(const RunConfig& cfg, const Margins& m) {
    Clock clock;
    const auto table = build_coefficient_table(cfg.reservoir, cfg.integrator.t_max, cfg.table_dt);
    const auto cmp = compare_modes(cfg.reservoir, table, cfg.control, cfg.integrator, cfg.initial_state,
                                   cfg.ensemble_size, EnsembleOptions{.stride = cfg.stride});
    const std::size_t i15 = cmp.controlled.index_at(m.fig2_time);
    const double controlled = cmp.controlled.mean_lambda[i15];
    const double uncontrolled = cmp.uncontrolled.mean_lambda[i15];
    const double gap = controlled - uncontrolled;
    const double se = std::sqrt((cmp.controlled.var_lambda[i15] + cmp.uncontrolled.var_lambda[i15]) /
                                static_cast<double>(cfg.ensemble_size));
    const double end_nm = cmp.uncontrolled.mean_lambda.back();
    const double end_mk = cmp.markovian_uncontrolled.mean_lambda.back();
    const double secs = clock.seconds();
    return {gap >= m.fig2_gap && end_nm < m.fig2_floor && end_mk < m.fig2_floor && secs < 300.0,
            "seed " + std::to_string(cfg.integrator.master_seed) + ": gap at t=" + fmt(m.fig2_time) + " " +
                fmt(gap) + " (SE " + fmt(se) + ", controlled " + fmt(controlled) + ", uncontrolled " +
                fmt(uncontrolled) + "); uncontrolled at t=" + fmt(cfg.integrator.t_max) + ": " + fmt(end_nm) +
                " non-Markovian, " + fmt(end_mk) + " Markovian; " + fmt(secs) + " s"};
}

Verdict criterion10(const Margins& m) {
    auto p = bath(0.1, 0.0);
    p.M = 0.0;
    const auto scan = temperature_scan(p, m.fig1_kBT, m.fig1_t_max, 1e-3, 0.01, kReferenceState);
    bool markov_monotone = true;
    for (const double kBT : m.fig1_kBT) {
        const auto& l = scan.curve(RateMode::markovian, kBT).lambda;
        for (std::size_t i = 1; i < l.size(); ++i) markov_monotone = markov_monotone && l[i] <= l[i - 1];
    }
    const double hot = m.fig1_kBT.back();
    const auto& nm_hot = scan.curve(RateMode::non_markovian, hot).lambda;
    bool oscillates = false;
    for (std::size_t i = 1; i < nm_hot.size(); ++i) oscillates = oscillates || nm_hot[i] > nm_hot[i - 1];
    auto sup_diff = [&](double kBT) {
        const auto& a = scan.curve(RateMode::non_markovian, kBT).lambda;
        const auto& b = scan.curve(RateMode::markovian, kBT).lambda;
        double d = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
        return d;
    };
    const double cold_gap = sup_diff(0.0), hot_gap = sup_diff(hot);
    return {markov_monotone && oscillates && cold_gap < hot_gap,
            std::string("Markovian monotone ") + (markov_monotone ? "yes" : "no") + ", non-Markovian rises at kBT=" +
                fmt(hot) + " " + (oscillates ? "yes" : "no") + ", sup diff kBT=0 " + fmt(cold_gap) + " vs kBT=" +
                fmt(hot) + " " + fmt(hot_gap)};
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        files[fs::relative(e.path(), dir).string()] = os.str();
    }
    return files;
}

Verdict criterion11(const fs::path& scratch, const Margins& m) {
    struct Run {
        std::string command;
        std::string preset;
    };
    const std::vector<Run> runs{{"coeffs", "fig2c"},   {"control", "fig2c"}, {"simulate", "fig2c"},
                                {"ensemble", "fig2c"}, {"fig1", "fig1"},     {"fig2", "fig2c"}};
    std::ostringstream log;
    std::size_t compared = 0;
    std::string mismatch;
    for (const auto& run : runs) {
        std::map<std::string, std::string> reference;
        for (const unsigned workers : {1u, 1u, 3u}) {
            cli::Overrides ov;
            ov.preset = run.preset;
            ov.trajectories = m.reproducibility_trajectories;
            // the output directory is part of the echoed configuration, so every run reuses it
            ov.out = (scratch / run.command).string();
            fs::remove_all(*ov.out);
            auto cfg = cli::resolve_config(ov);
            cfg.integrator.t_max = 15.0;
            if (run.command == "fig1") cfg.fig1_kBT = {0.0, 10.0};
            const int code = cli::run_command(run.command, cfg, cli::Context{log, workers}, log);
            if (code != cli::kOk) {
                return {false, run.command + " exited with " + std::to_string(code)};
            }
            const auto files = read_tree(*ov.out);
            if (reference.empty()) {
                reference = files;
            } else if (files != reference) {
                mismatch += run.command + "(workers " + std::to_string(workers) + ") ";
            }
        }
        compared += reference.size();
    }
    return {mismatch.empty() && compared > 0,
            mismatch.empty() ? std::to_string(compared) + " files identical across reruns and worker counts"
                             : "differences: " + mismatch};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: nmqc_acceptance <acceptance.yaml> [scratch_dir]\n";
        return 2;
    }
    const YAML::Node doc = YAML::LoadFile(argv[1]);
    std::ostringstream run_text;
    run_text << doc["run"];
    const RunConfig cfg = parse_config(run_text.str());
    Margins m;
    if (const auto n = doc["margins"]) {
        m.fig2_time = n["fig2_time"].as<double>(m.fig2_time);
        m.fig2_gap = n["fig2_gap"].as<double>(m.fig2_gap);
        m.fig2_floor = n["fig2_floor"].as<double>(m.fig2_floor);
        m.fig1_kBT = n["fig1_kBT"].as<std::vector<double>>(m.fig1_kBT);
        m.fig1_t_max = n["fig1_t_max"].as<double>(m.fig1_t_max);
        m.reproducibility_trajectories = n["reproducibility_trajectories"].as<std::size_t>(m.reproducibility_trajectories);
    }
    const fs::path scratch = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "nmqc_acceptance";
    fs::create_directories(scratch);

    const std::vector<std::pair<int, std::function<Verdict()>>> criteria{
        {1, criterion1},
        {2, criterion2},
        {3, criterion3},
        {4, criterion4},
        {5, criterion5},
        {6, criterion6},
        {7, criterion7},
        {8, criterion8},
        {9, [&] { return criterion9(cfg, m); }},
        {10, [&] { return criterion10(m); }},
        {11, [&] { return criterion11(scratch, m); }},
    };
    int failures = 0;
    for (const auto& [id, run] : criteria) {
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += v.pass ? 0 : 1;
        std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << " (" << v.detail << ")\n"
                  << std::flush;
    }
    return failures == 0 ? 0 : 1;
}
