// sde.hpp: Euler-Maruyama integration of the stochastic Bloch equations with reproducible noise

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nmqc/kernels.hpp"
#include "nmqc/qubit.hpp"

namespace nmqc {

enum class Scheme { euler_maruyama };

enum class ClampPolicy {
    project_to_ball,  // renormalize to |s| = 1 when a step leaves the Bloch ball
    reject_step,      // redraw dW (up to max_redraws, then project)
};

struct IntegratorConfig {
    double dt{1e-3};
    double t_max{15.0};
    Scheme scheme{Scheme::euler_maruyama};
    ClampPolicy clamp_policy{ClampPolicy::project_to_ball};
    std::uint64_t master_seed{20240601};
    std::uint64_t trajectory_index{0};
    std::uint32_t max_redraws{32};

    std::size_t steps() const;  // round(t_max / dt)
    void validate() const;
};

// u(t, s). Open-loop policies ignore s.
using ControlPolicy = std::function<ControlInput(double t, const BlochState& s)>;

ControlPolicy zero_policy();

// Piecewise-linear interpolation of tabulated controls on a uniform grid; holds the end values
// outside the grid.
ControlPolicy open_loop_policy(std::vector<double> times, std::vector<ControlInput> controls);

// Row k holds the state at t_k, the control applied on [t_k, t_k+1), the increment dW that led
// into t_k (0 for k = 0), the cumulative measurement record Y(t_k) and Lambda(t_k).
struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<BlochState> states;
    std::vector<ControlInput> controls;
    std::vector<double> noise;
    std::vector<double> record;
    std::vector<double> lambda;  // NaN when the initial state has no transverse component
    std::size_t clamp_count{0};

    std::size_t size() const noexcept { return times.size(); }
};

struct StepOutcome {
    BlochState state;
    bool left_ball{false};  // raw update had |s| > 1
};

// s' = s + drift dt + diffusion dW. With project_to_ball the returned state is projected back
// onto the sphere; with reject_step it is returned raw and the caller redraws.
// Throws IntegrationError on a non-finite result.
StepOutcome em_step(const BlochState& s, double t, double dt, const ControlInput& u, double dW,
                    const CoefficientTable& table, const ReservoirParams& p, RateMode mode,
                    ClampPolicy clamp = ClampPolicy::project_to_ball);

// Integrates from s0 over cfg.steps() steps, drawing increments from the (master_seed,
// trajectory_index) stream.
TrajectoryRecord simulate(const ReservoirParams& p, const CoefficientTable& table, const IntegratorConfig& cfg,
                          const ControlPolicy& policy, RateMode mode, const BlochState& s0);

// Same, with caller-supplied increments (dW.size() == cfg.steps()). reject_step is not available.
TrajectoryRecord simulate_with_noise(const ReservoirParams& p, const CoefficientTable& table,
                                     const IntegratorConfig& cfg, const ControlPolicy& policy, RateMode mode,
                                     const BlochState& s0, std::span<const double> dW);

// Throws ValidationError unless the dynamics step and table step are integer multiples of one
// another, and RangeError if the horizon runs past the table.
void check_table_compatible(const CoefficientTable& table, double dt, double t_max);

}  // namespace nmqc
