// control.hpp: Pontryagin forward-backward sweep on the noise-free Bloch dynamics
//
// Cost: J = (theta/4) |s(T) - s_T(T)|^2 + 1/2 int (ux^2 + uy^2) dt
// (the Bloch form of (theta/2) ||rho(T) - rho_T||_F^2). Stationarity of
// H = 1/2 |u|^2 + lambda . f(s, u) gives ux = l2 z - l3 y, uy = l3 x - l1 z.

#pragma once

#include <cstdint>
#include <vector>

#include "nmqc/kernels.hpp"
#include "nmqc/qubit.hpp"
#include "nmqc/sde.hpp"

namespace nmqc {

struct OCConfig {
    double theta{1.0};
    double relaxation{0.3};
    double tol{1e-6};
    int max_iter{500};
    double dt{1e-3};
    double t_max{15.0};

    std::size_t steps() const;
    void validate() const;
};

struct Costate {
    double l1{0.0};
    double l2{0.0};
    double l3{0.0};
};

struct ControlTrajectory {
    std::vector<double> times;
    std::vector<ControlInput> u;
};

struct CostateTrajectory {
    std::vector<double> times;
    std::vector<Costate> lambda;
};

struct OCResult {
    ControlTrajectory control;
    CostateTrajectory costate;
    std::vector<BlochState> state_path;
    std::vector<BlochState> target_path;
    double cost{0.0};
    double zero_control_cost{0.0};
    bool converged{false};
    int iterations{0};
    std::vector<double> history;      // cost at the start of each iteration
    double final_change{0.0};         // sup |stationarity_control - u| at the returned iterate
    bool monotone{true};              // history is non-increasing
    double theta{1.0};
    double tol{0.0};
};

// Terminal term (theta/4)|s(T) - s_T(T)|^2 plus trapezoidal running cost.
// Throws ValidationError if the grids do not line up.
double total_cost(const std::vector<BlochState>& state_path, const ControlTrajectory& control,
                  const std::vector<BlochState>& target_path, double theta);

// lambda_dot = -J^T lambda, J = d drift / d (x, y, z)
Costate costate_rhs(const Costate& lambda, const BlochState& s, double t, const ControlInput& u,
                    const CoefficientTable& table, const ReservoirParams& p, RateMode mode);

ControlInput stationarity_control(const Costate& lambda, const BlochState& s) noexcept;

// Noise-free explicit-Euler path for a given control sequence (aligned with the OC grid).
std::vector<BlochState> deterministic_path(const ReservoirParams& p, const CoefficientTable& table,
                                           const BlochState& s0, const ControlTrajectory& control, RateMode mode);

OCResult forward_backward_sweep(const ReservoirParams& p, const CoefficientTable& table, const BlochState& s0,
                                const OCConfig& oc, RateMode mode = RateMode::non_markovian);

// Exact gradient of the discretized cost with respect to every grid control, split into the
// running and terminal contributions.
struct CostGradient {
    std::vector<ControlInput> running;
    std::vector<ControlInput> terminal;
};

CostGradient cost_gradient(const ReservoirParams& p, const CoefficientTable& table, const BlochState& s0,
                           const ControlTrajectory& control, double theta, RateMode mode);

struct GradientCheckOptions {
    int directions{10};
    std::uint64_t seed{7};
    double base_amplitude{0.1};  // size of the random control the check is performed around
};

// Worst relative discrepancy between the adjoint directional derivative and a central
// finite difference over random directions.
double gradient_check(const ReservoirParams& p, const CoefficientTable& table, const BlochState& s0,
                      const OCConfig& oc, double epsilon, RateMode mode = RateMode::non_markovian,
                      const GradientCheckOptions& opts = {});

// u(t, s) = stationarity_control(lambda(t), s), lambda linearly interpolated and held at the
// end values outside the horizon.
ControlPolicy feedback_policy(const OCResult& res);

}  // namespace nmqc
