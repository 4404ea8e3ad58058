// config.hpp: run configuration for the nmqc tool
//
// The configuration document is YAML. Every key is optional; unknown keys are rejected.
//
//   preset: fig2c              # none | fig1 | fig2a | fig2b | fig2c | fig2d
//   mode: nonmarkovian         # nonmarkovian | markovian
//   policy: zero               # zero | feedback (simulate and ensemble commands)
//   trajectories: 500
//   output_dir: out
//   initial_state: [0.3535533905932738, 0.3535533905932738, 0.8660254037844386]
//   reservoir:   {omega0, gamma0, r, kBT, alpha_sq, M, eta}
//   integrator:  {dt, t_max, table_dt, stride, clamp_policy, seed, max_redraws}
//   control:     {theta, relaxation, tol, max_iter, dt, t_max}
//   quadrature:  {abs_tol, max_depth}
//   fig1:        {kBT: [0, 1, 2, 5, 10]}
//
// r is the cutoff ratio omega_c / omega0. A preset overrides the blocks it covers.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nmqc/control.hpp"
#include "nmqc/kernels.hpp"
#include "nmqc/qubit.hpp"
#include "nmqc/sde.hpp"

namespace nmqc {

enum class Preset { fig1, fig2a, fig2b, fig2c, fig2d };

// Control applied by the simulate and ensemble commands.
enum class PolicyKind { zero, feedback };

std::string_view to_string(Preset p) noexcept;
std::optional<Preset> parse_preset(std::string_view name);  // "none" -> nullopt; throws ValidationError if unknown
std::string_view to_string(RateMode m) noexcept;
RateMode parse_mode(std::string_view name);
std::string_view to_string(ClampPolicy c) noexcept;
std::string_view to_string(PolicyKind k) noexcept;
PolicyKind parse_policy(std::string_view name);

struct RunConfig {
    std::optional<Preset> preset;
    RateMode mode{RateMode::non_markovian};
    PolicyKind policy{PolicyKind::zero};
    std::size_t ensemble_size{500};
    std::string output_dir{"out"};
    BlochState initial_state{0.35355339059327373, 0.35355339059327373, 0.8660254037844386};
    ReservoirParams reservoir{};
    IntegratorConfig integrator{.dt = 1e-3, .t_max = 30.0};
    double table_dt{0.01};
    std::size_t stride{10};
    OCConfig control{};
    QuadratureOptions quadrature{};
    std::vector<double> fig1_kBT{0.0, 1.0, 2.0, 5.0, 10.0};

    // Throws ValidationError naming the offending field.
    void validate() const;
};

// Overwrites the parameters a preset fixes.
void apply_preset(RunConfig& cfg, Preset preset);

// Parses and validates. Throws ConfigError (with 1-based line/column) on malformed YAML, unknown
// keys or wrongly typed values, and ValidationError on invariant violations.
RunConfig parse_config(std::string_view text);

// YAML rendering of the fully resolved configuration; parse_config(echo_config(c)) reproduces c.
std::string echo_config(const RunConfig& cfg);

}  // namespace nmqc
