// kernels.hpp: Ohmic/Lorentz-Drude reservoir: spectral density, bath kernels and the
// time-dependent diffusion/damping rates Delta(t), gamma(t) of the second-order TCL generator.
//
// Units: hbar = 1, frequencies in units of omega0 (omega0 = 1 is the usual choice),
// times in 1/omega0, temperature as kBT in energy units.

#pragma once

#include <cstddef>
#include <vector>

namespace nmqc {

struct ReservoirParams {
    double omega0{1.0};    // qubit transition frequency
    double gamma0{1.0};    // frequency-independent damping constant
    double omega_c{0.5};   // Lorentz-Drude cutoff
    double kBT{10.0};      // temperature (energy units)
    double alpha_sq{0.01}; // squared system-reservoir coupling
    double M{0.05};        // measurement strength
    double eta{1.0};       // detection efficiency

    // r = omega_c / omega0
    double ratio() const noexcept { return omega_c / omega0; }

    // Throws ValidationError naming the first offending field.
    void validate() const;
};

// Numerical controls for the omega-quadratures. abs_tol bounds the quadrature error of Delta(t)
// itself (alpha_sq included); the tail beyond the cutoff is reported separately.
struct QuadratureOptions {
    double abs_tol{1e-10};
    int max_depth{18};             // bisection depth limit per panel
    double cutoff_omega_c{50.0};   // Omega_max >= cutoff_omega_c * omega_c
    double cutoff_omega0{50.0};    // Omega_max >= cutoff_omega0 * omega0
    double cutoff_kBT{20.0};       // Omega_max >= cutoff_kBT * kBT
    double cutoff_periods{50.0};   // Omega_max >= cutoff_periods * pi / t
};

struct QuadratureResult {
    double value{0.0};
    double error_estimate{0.0};  // quadrature error + explicit tail bound (same units as value)
    double tail_bound{0.0};
    double cutoff{0.0};          // Omega_max actually used
    bool converged{true};        // every panel reached its tolerance before max_depth
};

// J(omega) = (2 gamma0 / pi) omega omega_c^2 / (omega_c^2 + omega^2)
double spectral_density(double omega, const ReservoirParams& p);

// mu(tau) = 2 gamma0 omega_c^2 exp(-omega_c tau), tau > 0
double dissipation_kernel(double tau, const ReservoirParams& p);

// k(tau) = 2 int_0^inf J(w) coth(w / 2kBT) cos(w tau) dw, tau > 0 (k diverges logarithmically at tau = 0).
double noise_kernel(double tau, const ReservoirParams& p);

// Delta(t) = alpha_sq int_0^t k(tau) cos(omega0 tau) dtau, via a single omega-quadrature with the
// tau-integral done analytically.
double diffusion_coefficient(double t, const ReservoirParams& p, const QuadratureOptions& opts = {});
QuadratureResult diffusion_coefficient_detailed(double t, const ReservoirParams& p,
                                                const QuadratureOptions& opts = {});

// gamma(t) = alpha_sq int_0^t mu(tau) sin(omega0 tau) dtau, closed form.
double damping_coefficient(double t, const ReservoirParams& p);

struct MarkovRates {
    double delta{0.0};
    double gamma{0.0};
};

// t -> infinity limits of Delta(t) and gamma(t).
MarkovRates markov_rates(const ReservoirParams& p);

enum class RateMode { non_markovian, markovian };

// Uniformly sampled rates on t_k = k dt, k = 0..n-1. Immutable once built.
class CoefficientTable {
public:
    const std::vector<double>& times() const noexcept { return t_; }
    const std::vector<double>& delta() const noexcept { return delta_; }
    const std::vector<double>& gamma() const noexcept { return gamma_; }
    const std::vector<double>& gamma1() const noexcept { return gamma1_; }
    const std::vector<double>& gamma2() const noexcept { return gamma2_; }
    const std::vector<double>& delta_error() const noexcept { return delta_err_; }

    double dt() const noexcept { return dt_; }
    double t_max() const noexcept { return t_max_; }
    std::size_t size() const noexcept { return t_.size(); }
    RateMode mode() const noexcept { return mode_; }
    const ReservoirParams& params() const noexcept { return params_; }
    const MarkovRates& asymptotic() const noexcept { return markov_; }

    // Tolerance-halving audit: true when |Delta(tol/2) - Delta(tol)| <= error estimate everywhere.
    bool refinement_ok() const noexcept { return refinement_ok_; }
    double max_refinement_change() const noexcept { return max_refinement_change_; }
    bool quadrature_converged() const noexcept { return converged_; }
    // Grid points where the closed-form gamma(t) came out negative (reported, never clamped).
    std::size_t gamma_negative_count() const noexcept { return gamma_negative_; }

    // Linear interpolation of (Delta, gamma) at time t. Markovian tables return the constants.
    // Throws RangeError when t lies outside [0, t_max] (a relative slack of 1e-9 is tolerated).
    MarkovRates rates_at(double t) const;

private:
    friend CoefficientTable build_coefficient_table(const ReservoirParams&, double, double,
                                                    const QuadratureOptions&, std::size_t);
    friend CoefficientTable build_markov_table(const ReservoirParams&, double, double, std::size_t);

    void fill_derived();

    ReservoirParams params_{};
    MarkovRates markov_{};
    RateMode mode_{RateMode::non_markovian};
    double dt_{0.0};
    double t_max_{0.0};
    std::vector<double> t_, delta_, gamma_, gamma1_, gamma2_, delta_err_;
    bool refinement_ok_{true};
    bool converged_{true};
    double max_refinement_change_{0.0};
    std::size_t gamma_negative_{0};
};

inline constexpr std::size_t kDefaultTableBudget = 50'000'000;

// Samples Delta and gamma on a uniform grid 0..t_max; the last sample is the first multiple of dt
// at or beyond t_max.
// Throws ResourceError when the grid exceeds max_samples.
CoefficientTable build_coefficient_table(const ReservoirParams& p, double t_max, double dt,
                                         const QuadratureOptions& opts = {},
                                         std::size_t max_samples = kDefaultTableBudget);

// Same grid, constant rows equal to markov_rates(p).
CoefficientTable build_markov_table(const ReservoirParams& p, double t_max, double dt,
                                    std::size_t max_samples = kDefaultTableBudget);

}  // namespace nmqc
