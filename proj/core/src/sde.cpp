#include "nmqc/sde.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "nmqc/errors.hpp"
#include "nmqc/rng.hpp"

namespace nmqc {

std::size_t IntegratorConfig::steps() const {
    validate();
    return static_cast<std::size_t>(std::llround(t_max / dt));
}

void IntegratorConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ValidationError("IntegratorConfig.dt must be > 0");
    }
    if (!(t_max >= dt) || !std::isfinite(t_max)) {
        throw ValidationError("IntegratorConfig.t_max must satisfy t_max >= dt");
    }
    if (max_redraws == 0 || max_redraws > 255) {
        throw ValidationError("IntegratorConfig.max_redraws must be in [1, 255]");
    }
}

ControlPolicy zero_policy() {
    return [](double, const BlochState&) { return ControlInput{}; };
}

ControlPolicy open_loop_policy(std::vector<double> times, std::vector<ControlInput> controls) {
    if (times.size() != controls.size() || times.empty()) {
        throw ValidationError("open_loop_policy: times and controls must be non-empty and aligned");
    }
    return [times = std::move(times), controls = std::move(controls)](double t, const BlochState&) {
        if (t <= times.front()) {
            return controls.front();
        }
        if (t >= times.back()) {
            return controls.back();
        }
        const double h = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
        const double pos = (t - times.front()) / h;
        auto i = static_cast<std::size_t>(pos);
        if (i + 1 >= times.size()) {
            return controls.back();
        }
        const double w = pos - static_cast<double>(i);
        return ControlInput{controls[i].ux + w * (controls[i + 1].ux - controls[i].ux),
                            controls[i].uy + w * (controls[i + 1].uy - controls[i].uy)};
    };
}

void check_table_compatible(const CoefficientTable& table, double dt, double t_max) {
    const double ratio = table.dt() / dt;
    const double r = ratio >= 1.0 ? ratio : 1.0 / ratio;
    if (std::abs(r - std::round(r)) > 1e-9 * r) {
        std::ostringstream os;
        os << "dynamics dt=" << dt << " is neither a multiple nor a divisor of the table dt=" << table.dt();
        throw ValidationError(os.str());
    }
    if (t_max > table.t_max() * (1.0 + 1e-9) + 1e-12) {
        std::ostringstream os;
        os << "horizon " << t_max << " exceeds the coefficient table range " << table.t_max();
        throw RangeError(os.str());
    }
}

StepOutcome em_step(const BlochState& s, double t, double dt, const ControlInput& u, double dW,
                    const CoefficientTable& table, const ReservoirParams& p, RateMode mode, ClampPolicy clamp) {
    const BlochState a = drift(s, t, u, table, p, mode);
    const BlochState b = diffusion(s, p);
    StepOutcome out;
    out.state = {s.x + a.x * dt + b.x * dW, s.y + a.y * dt + b.y * dW, s.z + a.z * dt + b.z * dW};
    const BlochState& n = out.state;
    if (!std::isfinite(n.x) || !std::isfinite(n.y) || !std::isfinite(n.z)) {
        throw IntegrationError("non-finite Euler-Maruyama update", t, s.x, s.y, s.z, u.ux, u.uy);
    }
    const double r2 = n.norm_sq();
    if (r2 > 1.0) {
        out.left_ball = true;
        if (clamp == ClampPolicy::project_to_ball) {
            const double inv = 1.0 / std::sqrt(r2);
            out.state = inv * n;
        }
    }
    return out;
}

namespace {

double measurement_drift(const BlochState& s, const ReservoirParams& p) {
    // F = -sz / 2, tr(F rho) = -z / 2
    return std::sqrt(p.eta * p.M) * (-0.5 * s.z);
}

TrajectoryRecord integrate(const ReservoirParams& p, const CoefficientTable& table, const IntegratorConfig& cfg,
                           const ControlPolicy& policy, RateMode mode, const BlochState& s0,
                           std::optional<std::span<const double>> supplied) {
    p.validate();
    const std::size_t n = cfg.steps();
    check_table_compatible(table, cfg.dt, static_cast<double>(n) * cfg.dt);
    if (!s0.is_physical()) {
        throw ValidationError("initial state lies outside the Bloch ball");
    }
    if (supplied && supplied->size() != n) {
        throw ValidationError("simulate_with_noise: dW length must equal the number of steps");
    }
    if (supplied && cfg.clamp_policy == ClampPolicy::reject_step) {
        throw ValidationError("simulate_with_noise: reject_step needs a noise stream to redraw from");
    }

    const double dt = cfg.dt;
    const double sqrt_dt = std::sqrt(dt);
    const NoiseStream stream(cfg.master_seed, cfg.trajectory_index);
    const bool has_reference = std::hypot(s0.x, s0.y) > 0.0;
    auto lambda_of = [&](const BlochState& s) {
        return has_reference ? coherence_factor(s, s0) : std::numeric_limits<double>::quiet_NaN();
    };
    auto control_at = [&](double t, const BlochState& s) {
        const ControlInput u = policy(t, s);
        if (!std::isfinite(u.ux) || !std::isfinite(u.uy)) {
            throw IntegrationError("control policy returned a non-finite value", t, s.x, s.y, s.z, u.ux, u.uy);
        }
        return u;
    };

    TrajectoryRecord rec;
    rec.times.resize(n + 1);
    rec.states.resize(n + 1);
    rec.controls.resize(n + 1);
    rec.noise.resize(n + 1);
    rec.record.resize(n + 1);
    rec.lambda.resize(n + 1);

    BlochState s = s0;
    rec.times[0] = 0.0;
    rec.states[0] = s;
    rec.noise[0] = 0.0;
    rec.record[0] = 0.0;
    rec.lambda[0] = lambda_of(s);

    for (std::size_t k = 0; k < n; ++k) {
        const double t = dt * static_cast<double>(k);
        const ControlInput u = control_at(t, s);
        rec.controls[k] = u;

        double dW = supplied ? (*supplied)[k] : sqrt_dt * stream.normal(k, 0);
        StepOutcome step = em_step(s, t, dt, u, dW, table, p, mode, cfg.clamp_policy);
        if (step.left_ball) {
            ++rec.clamp_count;
        }
        if (cfg.clamp_policy == ClampPolicy::reject_step) {
            std::uint32_t attempt = 1;
            while (step.left_ball && attempt <= cfg.max_redraws) {
                dW = sqrt_dt * stream.normal(k, attempt++);
                step = em_step(s, t, dt, u, dW, table, p, mode, ClampPolicy::reject_step);
            }
            if (step.left_ball) {
                step.state = (1.0 / step.state.norm()) * step.state;
            }
        }

        rec.record[k + 1] = rec.record[k] + dW + measurement_drift(s, p) * dt;
        s = step.state;
        rec.times[k + 1] = dt * static_cast<double>(k + 1);
        rec.states[k + 1] = s;
        rec.noise[k + 1] = dW;
        rec.lambda[k + 1] = lambda_of(s);
    }
    rec.controls[n] = control_at(rec.times[n], s);
    return rec;
}

}  // namespace

TrajectoryRecord simulate(const ReservoirParams& p, const CoefficientTable& table, const IntegratorConfig& cfg,
                          const ControlPolicy& policy, RateMode mode, const BlochState& s0) {
    return integrate(p, table, cfg, policy, mode, s0, std::nullopt);
}

TrajectoryRecord simulate_with_noise(const ReservoirParams& p, const CoefficientTable& table,
                                     const IntegratorConfig& cfg, const ControlPolicy& policy, RateMode mode,
                                     const BlochState& s0, std::span<const double> dW) {
    return integrate(p, table, cfg, policy, mode, s0, dW);
}

}  // namespace nmqc
