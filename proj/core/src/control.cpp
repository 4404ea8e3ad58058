#include "nmqc/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nmqc/errors.hpp"
#include "nmqc/rng.hpp"

namespace nmqc {

std::size_t OCConfig::steps() const {
    validate();
    return static_cast<std::size_t>(std::llround(t_max / dt));
}

void OCConfig::validate() const {
    if (!(theta >= 0.0) || !std::isfinite(theta)) {
        throw ValidationError("OCConfig.theta must be >= 0");
    }
    if (!(relaxation > 0.0 && relaxation <= 1.0)) {
        throw ValidationError("OCConfig.relaxation must be in (0, 1]");
    }
    if (!(tol > 0.0)) {
        throw ValidationError("OCConfig.tol must be > 0");
    }
    if (max_iter < 1) {
        throw ValidationError("OCConfig.max_iter must be >= 1");
    }
    if (!(dt > 0.0) || !(t_max >= dt) || !std::isfinite(t_max)) {
        throw ValidationError("OCConfig grid must satisfy 0 < dt <= t_max");
    }
}

namespace {

MarkovRates rates_for(double t, const CoefficientTable& table, RateMode mode) {
    const MarkovRates r = table.rates_at(t);
    return mode == RateMode::markovian ? table.asymptotic() : r;
}

// J^T lambda for the drift Jacobian
//   [ -a   -w0   uy ]
//   [  w0  -a   -ux ]     a = Delta + M/2
//   [ -uy   ux  -2D ]
Costate jacobian_transpose_times(const Costate& l, const ControlInput& u, const MarkovRates& r,
                                 const ReservoirParams& p) {
    const double a = r.delta + 0.5 * p.M;
    return {
        -a * l.l1 + p.omega0 * l.l2 - u.uy * l.l3,
        -p.omega0 * l.l1 - a * l.l2 + u.ux * l.l3,
        u.uy * l.l1 - u.ux * l.l2 - 2.0 * r.delta * l.l3,
    };
}

std::vector<BlochState> target_path_for(const std::vector<double>& times, const BlochState& s0, double omega0) {
    std::vector<BlochState> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        out[k] = target_state(times[k], s0, omega0);
    }
    return out;
}

std::vector<double> uniform_times(std::size_t n, double dt) {
    std::vector<double> t(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        t[k] = dt * static_cast<double>(k);
    }
    return t;
}

double grid_dt(const std::vector<double>& times) {
    if (times.size() < 2) {
        throw ValidationError("control grid needs at least two points");
    }
    return times[1] - times[0];
}

// Discrete adjoint of explicit Euler: lambda_N = (theta/2)(s_N - s_T), lambda_k = lambda_k+1 + dt J_k^T lambda_k+1.
std::vector<Costate> backward_costate(const ReservoirParams& p, const CoefficientTable& table,
                                      const std::vector<BlochState>& path, const std::vector<BlochState>& target,
                                      const ControlTrajectory& control, double theta, RateMode mode) {
    const std::size_t n = path.size() - 1;
    const double dt = grid_dt(control.times);
    std::vector<Costate> lam(n + 1);
    const BlochState err = path[n] - target[n];
    lam[n] = {0.5 * theta * err.x, 0.5 * theta * err.y, 0.5 * theta * err.z};
    for (std::size_t k = n; k-- > 0;) {
        const MarkovRates r = rates_for(control.times[k], table, mode);
        const Costate jt = jacobian_transpose_times(lam[k + 1], control.u[k], r, p);
        lam[k] = {lam[k + 1].l1 + dt * jt.l1, lam[k + 1].l2 + dt * jt.l2, lam[k + 1].l3 + dt * jt.l3};
    }
    return lam;
}

double trapezoid_weight(std::size_t k, std::size_t n) { return (k == 0 || k == n) ? 0.5 : 1.0; }

}  // namespace

double total_cost(const std::vector<BlochState>& state_path, const ControlTrajectory& control,
                  const std::vector<BlochState>& target_path, double theta) {
    const std::size_t n = control.times.size();
    if (n < 2 || control.u.size() != n || state_path.size() != n || target_path.size() != n) {
        std::ostringstream os;
        os << "total_cost: grid mismatch (times " << n << ", controls " << control.u.size() << ", states "
           << state_path.size() << ", targets " << target_path.size() << ")";
        throw ValidationError(os.str());
    }
    const BlochState d = state_path.back() - target_path.back();
    const double terminal = 0.25 * theta * d.norm_sq();
    double running = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double h = control.times[k + 1] - control.times[k];
        const double a = control.u[k].ux * control.u[k].ux + control.u[k].uy * control.u[k].uy;
        const double b = control.u[k + 1].ux * control.u[k + 1].ux + control.u[k + 1].uy * control.u[k + 1].uy;
        running += 0.5 * h * (a + b);
    }
    return terminal + 0.5 * running;
}

Costate costate_rhs(const Costate& lambda, const BlochState& s, double t, const ControlInput& u,
                    const CoefficientTable& table, const ReservoirParams& p, RateMode mode) {
    (void)s;  // drift is affine in the state, so the Jacobian does not depend on s
    const Costate jt = jacobian_transpose_times(lambda, u, rates_for(t, table, mode), p);
    return {-jt.l1, -jt.l2, -jt.l3};
}

ControlInput stationarity_control(const Costate& l, const BlochState& s) noexcept {
    return {l.l2 * s.z - l.l3 * s.y, l.l3 * s.x - l.l1 * s.z};
}

std::vector<BlochState> deterministic_path(const ReservoirParams& p, const CoefficientTable& table,
                                           const BlochState& s0, const ControlTrajectory& control, RateMode mode) {
    const std::size_t n = control.times.size();
    if (n < 2 || control.u.size() != n) {
        throw ValidationError("deterministic_path: control grid mismatch");
    }
    const double dt = grid_dt(control.times);
    std::vector<BlochState> path(n);
    path[0] = s0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const BlochState f = drift_with_rates(path[k], control.u[k], rates_for(control.times[k], table, mode), p);
        path[k + 1] = path[k] + dt * f;
    }
    return path;
}

OCResult forward_backward_sweep(const ReservoirParams& p, const CoefficientTable& table, const BlochState& s0,
                                const OCConfig& oc, RateMode mode) {
    p.validate();
    const std::size_t n = oc.steps();
    check_table_compatible(table, oc.dt, static_cast<double>(n) * oc.dt);
    if (!s0.is_physical()) {
        throw ValidationError("forward_backward_sweep: initial state lies outside the Bloch ball");
    }

    OCResult res;
    res.theta = oc.theta;
    res.tol = oc.tol;
    res.control.times = uniform_times(n, oc.dt);
    res.control.u.assign(n + 1, ControlInput{});
    res.target_path = target_path_for(res.control.times, s0, p.omega0);
    res.costate.times = res.control.times;

    std::vector<ControlInput> proposal(n + 1);
    for (int it = 1; it <= oc.max_iter; ++it) {
        res.iterations = it;
        res.state_path = deterministic_path(p, table, s0, res.control, mode);
        res.costate.lambda = backward_costate(p, table, res.state_path, res.target_path, res.control, oc.theta, mode);
        res.cost = total_cost(res.state_path, res.control, res.target_path, oc.theta);
        if (it > 1 && res.cost > res.history.back()) {
            res.monotone = false;
        }
        res.history.push_back(res.cost);

        double change = 0.0;
        for (std::size_t k = 0; k <= n; ++k) {
            proposal[k] = stationarity_control(res.costate.lambda[k], res.state_path[k]);
            change = std::max({change, std::abs(proposal[k].ux - res.control.u[k].ux),
                               std::abs(proposal[k].uy - res.control.u[k].uy)});
        }
        res.final_change = change;
        if (change <= oc.tol) {
            res.converged = true;
            break;
        }
        if (it == oc.max_iter) {
            break;
        }
        const double b = oc.relaxation;
        for (std::size_t k = 0; k <= n; ++k) {
            res.control.u[k].ux = (1.0 - b) * res.control.u[k].ux + b * proposal[k].ux;
            res.control.u[k].uy = (1.0 - b) * res.control.u[k].uy + b * proposal[k].uy;
        }
    }
    res.zero_control_cost = res.history.front();
    return res;
}

CostGradient cost_gradient(const ReservoirParams& p, const CoefficientTable& table, const BlochState& s0,
                           const ControlTrajectory& control, double theta, RateMode mode) {
    const auto path = deterministic_path(p, table, s0, control, mode);
    const auto target = target_path_for(control.times, s0, p.omega0);
    const auto lam = backward_costate(p, table, path, target, control, theta, mode);
    const std::size_t n = control.times.size() - 1;
    const double dt = grid_dt(control.times);

    CostGradient g;
    g.running.resize(n + 1);
    g.terminal.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        const double w = trapezoid_weight(k, n) * dt;
        g.running[k] = {w * control.u[k].ux, w * control.u[k].uy};
        if (k < n) {
            // dJ/du_k through s_k+1 = s_k + dt f(s_k, u_k): dt (df/du)^T lambda_k+1 = -dt stationarity
            const ControlInput st = stationarity_control(lam[k + 1], path[k]);
            g.terminal[k] = {-dt * st.ux, -dt * st.uy};
        }
    }
    return g;
}

double gradient_check(const ReservoirParams& p, const CoefficientTable& table, const BlochState& s0,
                      const OCConfig& oc, double epsilon, RateMode mode, const GradientCheckOptions& opts) {
    if (!(epsilon > 0.0)) {
        throw DomainError("gradient_check: epsilon must be > 0");
    }
    const std::size_t n = oc.steps();
    check_table_compatible(table, oc.dt, static_cast<double>(n) * oc.dt);

    ControlTrajectory base;
    base.times = uniform_times(n, oc.dt);
    base.u.resize(n + 1);
    const NoiseStream stream(opts.seed, 0);
    // smooth random base control: a few random harmonics per channel
    for (int h = 1; h <= 3; ++h) {
        const double ax = opts.base_amplitude * stream.normal(2 * h) / h;
        const double ay = opts.base_amplitude * stream.normal(2 * h + 1) / h;
        for (std::size_t k = 0; k <= n; ++k) {
            const double phase = h * base.times[k] / oc.t_max * std::numbers::pi;
            base.u[k].ux += ax * std::sin(phase);
            base.u[k].uy += ay * std::cos(phase);
        }
    }
    const auto target = target_path_for(base.times, s0, p.omega0);
    auto cost_of = [&](const ControlTrajectory& c) {
        return total_cost(deterministic_path(p, table, s0, c, mode), c, target, oc.theta);
    };

    const CostGradient g = cost_gradient(p, table, s0, base, oc.theta, mode);
    double worst = 0.0;
    const NoiseStream dir_stream(opts.seed, 1);
    for (int d = 0; d < opts.directions; ++d) {
        ControlTrajectory plus = base;
        ControlTrajectory minus = base;
        double adjoint = 0.0;
        for (std::size_t k = 0; k <= n; ++k) {
            const std::uint64_t idx = (static_cast<std::uint64_t>(d) * (n + 1) + k) * 2;
            const double vx = dir_stream.normal(idx);
            const double vy = dir_stream.normal(idx + 1);
            adjoint += (g.running[k].ux + g.terminal[k].ux) * vx + (g.running[k].uy + g.terminal[k].uy) * vy;
            plus.u[k].ux += epsilon * vx;
            plus.u[k].uy += epsilon * vy;
            minus.u[k].ux -= epsilon * vx;
            minus.u[k].uy -= epsilon * vy;
        }
        const double fd = (cost_of(plus) - cost_of(minus)) / (2.0 * epsilon);
        const double scale = std::max({std::abs(adjoint), std::abs(fd), 1e-300});
        worst = std::max(worst, std::abs(adjoint - fd) / scale);
    }
    return worst;
}

ControlPolicy feedback_policy(const OCResult& res) {
    if (res.costate.times.size() < 2 || res.costate.times.size() != res.costate.lambda.size()) {
        throw ValidationError("feedback_policy: costate trajectory is empty or misaligned");
    }
    return [times = res.costate.times, lambda = res.costate.lambda](double t, const BlochState& s) {
        Costate l;
        if (t <= times.front()) {
            l = lambda.front();
        } else if (t >= times.back()) {
            l = lambda.back();
        } else {
            const double h = times[1] - times[0];
            const double pos = (t - times.front()) / h;
            auto i = std::min(static_cast<std::size_t>(pos), times.size() - 2);
            const double w = pos - static_cast<double>(i);
            l = {lambda[i].l1 + w * (lambda[i + 1].l1 - lambda[i].l1),
                 lambda[i].l2 + w * (lambda[i + 1].l2 - lambda[i].l2),
                 lambda[i].l3 + w * (lambda[i + 1].l3 - lambda[i].l3)};
        }
        return stationarity_control(l, s);
    };
}

}  // namespace nmqc
