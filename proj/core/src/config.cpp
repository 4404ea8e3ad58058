#include "nmqc/config.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "nmqc/errors.hpp"

namespace nmqc {

namespace {

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& what) {
    const YAML::Mark m = node.Mark();
    if (m.is_null()) {
        throw ConfigError(what);
    }
    throw ConfigError(what, m.line + 1, m.column + 1);
}

void require_map(const YAML::Node& node, const std::string& where) {
    if (!node.IsMap()) {
        fail_at(node, where + " must be a mapping");
    }
}

void reject_unknown(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.contains(key)) {
            fail_at(kv.first, "unknown key '" + key + "' in " + where);
        }
    }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& name) {
    if (!node.IsScalar()) {
        fail_at(node, name + " must be a scalar");
    }
    try {
        return node.as<T>();
    } catch (const YAML::BadConversion&) {
        fail_at(node, name + " has the wrong type");
    }
}

template <class T>
void read(const YAML::Node& map, const char* key, T& out, const std::string& where) {
    if (const YAML::Node n = map[key]) {
        out = scalar<T>(n, where + "." + key);
    }
}

std::vector<double> read_list(const YAML::Node& node, const std::string& name) {
    if (!node.IsSequence()) {
        fail_at(node, name + " must be a list");
    }
    std::vector<double> out;
    for (const auto& item : node) {
        out.push_back(scalar<double>(item, name));
    }
    return out;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void check(bool ok, const std::string& field, const std::string& rule) {
    if (!ok) {
        throw ValidationError(field + " must satisfy " + rule);
    }
}

template <class E>
E parse_enum_node(const YAML::Node& node, const std::string& name, E (*parser)(std::string_view)) {
    const auto text = scalar<std::string>(node, name);
    try {
        return parser(text);
    } catch (const ValidationError& e) {
        fail_at(node, e.what());
    }
}

ClampPolicy parse_clamp(std::string_view name) {
    if (name == "project_to_ball") return ClampPolicy::project_to_ball;
    if (name == "reject_step") return ClampPolicy::reject_step;
    throw ValidationError("unknown clamp_policy '" + std::string(name) + "'");
}

}  // namespace

std::string_view to_string(Preset p) noexcept {
    switch (p) {
        case Preset::fig1: return "fig1";
        case Preset::fig2a: return "fig2a";
        case Preset::fig2b: return "fig2b";
        case Preset::fig2c: return "fig2c";
        case Preset::fig2d: return "fig2d";
    }
    return "none";
}

std::optional<Preset> parse_preset(std::string_view name) {
    if (name == "none" || name.empty()) return std::nullopt;
    for (const Preset p : {Preset::fig1, Preset::fig2a, Preset::fig2b, Preset::fig2c, Preset::fig2d}) {
        if (name == to_string(p)) return p;
    }
    throw ValidationError("unknown preset '" + std::string(name) + "' (expected none, fig1, fig2a..fig2d)");
}

std::string_view to_string(RateMode m) noexcept {
    return m == RateMode::markovian ? "markovian" : "nonmarkovian";
}

RateMode parse_mode(std::string_view name) {
    if (name == "nonmarkovian") return RateMode::non_markovian;
    if (name == "markovian") return RateMode::markovian;
    throw ValidationError("unknown mode '" + std::string(name) + "' (expected nonmarkovian or markovian)");
}

std::string_view to_string(ClampPolicy c) noexcept {
    return c == ClampPolicy::reject_step ? "reject_step" : "project_to_ball";
}

std::string_view to_string(PolicyKind k) noexcept {
    return k == PolicyKind::feedback ? "feedback" : "zero";
}

PolicyKind parse_policy(std::string_view name) {
    if (name == "zero") return PolicyKind::zero;
    if (name == "feedback") return PolicyKind::feedback;
    throw ValidationError("unknown policy '" + std::string(name) + "' (expected zero or feedback)");
}

void apply_preset(RunConfig& cfg, Preset preset) {
    cfg.preset = preset;
    ReservoirParams& r = cfg.reservoir;
    r.omega0 = 1.0;
    r.gamma0 = 1.0;
    r.alpha_sq = 0.01;
    cfg.initial_state = {std::sqrt(2.0) / 4.0, std::sqrt(2.0) / 4.0, std::sqrt(3.0) / 2.0};
    cfg.control.theta = 1.0;
    switch (preset) {
        case Preset::fig1:
            r.omega_c = 0.1;
            r.M = 0.0;
            break;
        case Preset::fig2a: r.omega_c = 0.5; r.kBT = 1.0; break;
        case Preset::fig2b: r.omega_c = 3.0; r.kBT = 1.0; break;
        case Preset::fig2c: r.omega_c = 0.5; r.kBT = 10.0; break;
        case Preset::fig2d: r.omega_c = 3.0; r.kBT = 10.0; break;
    }
    if (preset != Preset::fig1) {
        r.M = 0.05;
        r.eta = 1.0;
    }
}

void RunConfig::validate() const {
    reservoir.validate();
    integrator.validate();
    control.validate();
    check(initial_state.norm_sq() <= 1.0 + 1e-12, "initial_state", "x0^2 + y0^2 + z0^2 <= 1");
    check(ensemble_size >= 1, "trajectories", ">= 1");
    check(table_dt > 0.0, "integrator.table_dt", "> 0");
    check(stride >= 1, "integrator.stride", ">= 1");
    check(!output_dir.empty(), "output_dir", "non-empty path");
    check(quadrature.abs_tol > 0.0, "quadrature.abs_tol", "> 0");
    check(quadrature.max_depth >= 0, "quadrature.max_depth", ">= 0");
    check(!fig1_kBT.empty(), "fig1.kBT", "non-empty list");
    for (const double t : fig1_kBT) {
        check(std::isfinite(t) && t >= 0.0, "fig1.kBT", "entries >= 0");
    }
    // both grids must line up with the coefficient table
    for (const double dt : {integrator.dt, control.dt}) {
        const double ratio = table_dt >= dt ? table_dt / dt : dt / table_dt;
        check(std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio, "integrator.table_dt",
              "an integer multiple or divisor of the integration steps");
    }
}

RunConfig parse_config(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.msg, e.mark.line + 1, e.mark.column + 1);
    }

    RunConfig cfg;
    if (root.IsNull()) {
        cfg.validate();
        return cfg;
    }
    require_map(root, "configuration document");
    reject_unknown(root,
                   {"preset", "mode", "policy", "trajectories", "output_dir", "initial_state", "reservoir", "integrator",
                    "control", "quadrature", "fig1"},
                   "top level");

    if (const YAML::Node n = root["mode"]) {
        cfg.mode = parse_enum_node<RateMode>(n, "mode", parse_mode);
    }
    if (const YAML::Node n = root["policy"]) {
        cfg.policy = parse_enum_node<PolicyKind>(n, "policy", parse_policy);
    }
    read(root, "trajectories", cfg.ensemble_size, "config");
    read(root, "output_dir", cfg.output_dir, "config");
    if (const YAML::Node n = root["initial_state"]) {
        const auto v = read_list(n, "initial_state");
        if (v.size() != 3) {
            fail_at(n, "initial_state must have exactly three entries");
        }
        cfg.initial_state = {v[0], v[1], v[2]};
    }
    if (const YAML::Node n = root["reservoir"]) {
        require_map(n, "reservoir");
        reject_unknown(n, {"omega0", "gamma0", "r", "kBT", "alpha_sq", "M", "eta"}, "reservoir");
        auto& r = cfg.reservoir;
        read(n, "omega0", r.omega0, "reservoir");
        read(n, "gamma0", r.gamma0, "reservoir");
        double ratio = r.omega_c / r.omega0;
        read(n, "r", ratio, "reservoir");
        r.omega_c = ratio * r.omega0;
        read(n, "kBT", r.kBT, "reservoir");
        read(n, "alpha_sq", r.alpha_sq, "reservoir");
        read(n, "M", r.M, "reservoir");
        read(n, "eta", r.eta, "reservoir");
    }
    if (const YAML::Node n = root["integrator"]) {
        require_map(n, "integrator");
        reject_unknown(n, {"dt", "t_max", "table_dt", "stride", "clamp_policy", "seed", "max_redraws"}, "integrator");
        auto& c = cfg.integrator;
        read(n, "dt", c.dt, "integrator");
        read(n, "t_max", c.t_max, "integrator");
        read(n, "table_dt", cfg.table_dt, "integrator");
        read(n, "stride", cfg.stride, "integrator");
        read(n, "seed", c.master_seed, "integrator");
        read(n, "max_redraws", c.max_redraws, "integrator");
        if (const YAML::Node cp = n["clamp_policy"]) {
            c.clamp_policy = parse_enum_node<ClampPolicy>(cp, "integrator.clamp_policy", parse_clamp);
        }
    }
    if (const YAML::Node n = root["control"]) {
        require_map(n, "control");
        reject_unknown(n, {"theta", "relaxation", "tol", "max_iter", "dt", "t_max"}, "control");
        auto& c = cfg.control;
        read(n, "theta", c.theta, "control");
        read(n, "relaxation", c.relaxation, "control");
        read(n, "tol", c.tol, "control");
        read(n, "max_iter", c.max_iter, "control");
        read(n, "dt", c.dt, "control");
        read(n, "t_max", c.t_max, "control");
    }
    if (const YAML::Node n = root["quadrature"]) {
        require_map(n, "quadrature");
        reject_unknown(n, {"abs_tol", "max_depth"}, "quadrature");
        read(n, "abs_tol", cfg.quadrature.abs_tol, "quadrature");
        read(n, "max_depth", cfg.quadrature.max_depth, "quadrature");
    }
    if (const YAML::Node n = root["fig1"]) {
        require_map(n, "fig1");
        reject_unknown(n, {"kBT"}, "fig1");
        if (const YAML::Node k = n["kBT"]) {
            cfg.fig1_kBT = read_list(k, "fig1.kBT");
        }
    }
    if (const YAML::Node n = root["preset"]) {
        const auto name = scalar<std::string>(n, "preset");
        std::optional<Preset> preset;
        try {
            preset = parse_preset(name);
        } catch (const ValidationError& e) {
            fail_at(n, e.what());
        }
        if (preset) {
            apply_preset(cfg, *preset);
        }
    }
    cfg.validate();
    return cfg;
}

std::string echo_config(const RunConfig& cfg) {
    std::ostringstream os;
    const auto& r = cfg.reservoir;
    const auto& ic = cfg.integrator;
    const auto& oc = cfg.control;
    os << "preset: " << (cfg.preset ? to_string(*cfg.preset) : "none") << '\n';
    os << "mode: " << to_string(cfg.mode) << '\n';
    os << "policy: " << to_string(cfg.policy) << '\n';
    os << "trajectories: " << cfg.ensemble_size << '\n';
    os << "output_dir: \"" << cfg.output_dir << "\"\n";
    os << "initial_state: [" << fmt(cfg.initial_state.x) << ", " << fmt(cfg.initial_state.y) << ", "
       << fmt(cfg.initial_state.z) << "]\n";
    os << "reservoir:\n"
       << "  omega0: " << fmt(r.omega0) << '\n'
       << "  gamma0: " << fmt(r.gamma0) << '\n'
       << "  r: " << fmt(r.ratio()) << '\n'
       << "  kBT: " << fmt(r.kBT) << '\n'
       << "  alpha_sq: " << fmt(r.alpha_sq) << '\n'
       << "  M: " << fmt(r.M) << '\n'
       << "  eta: " << fmt(r.eta) << '\n';
    os << "integrator:\n"
       << "  dt: " << fmt(ic.dt) << '\n'
       << "  t_max: " << fmt(ic.t_max) << '\n'
       << "  table_dt: " << fmt(cfg.table_dt) << '\n'
       << "  stride: " << cfg.stride << '\n'
       << "  clamp_policy: " << to_string(ic.clamp_policy) << '\n'
       << "  seed: " << ic.master_seed << '\n'
       << "  max_redraws: " << ic.max_redraws << '\n';
    os << "control:\n"
       << "  theta: " << fmt(oc.theta) << '\n'
       << "  relaxation: " << fmt(oc.relaxation) << '\n'
       << "  tol: " << fmt(oc.tol) << '\n'
       << "  max_iter: " << oc.max_iter << '\n'
       << "  dt: " << fmt(oc.dt) << '\n'
       << "  t_max: " << fmt(oc.t_max) << '\n';
    os << "quadrature:\n"
       << "  abs_tol: " << fmt(cfg.quadrature.abs_tol) << '\n'
       << "  max_depth: " << cfg.quadrature.max_depth << '\n';
    os << "fig1:\n  kBT: [";
    for (std::size_t i = 0; i < cfg.fig1_kBT.size(); ++i) {
        os << (i ? ", " : "") << fmt(cfg.fig1_kBT[i]);
    }
    os << "]\n";
    return os.str();
}

}  // namespace nmqc
