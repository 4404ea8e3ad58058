// Reservoir kernels and TCL rates for the Lorentz-Drude Ohmic bath.
#include "nmqc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "nmqc/errors.hpp"

namespace nmqc {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* field, const char* rule) {
    if (!ok) {
        throw ValidationError(std::string("ReservoirParams.") + field + " must satisfy " + rule);
    }
}

// x coth(x), smooth through x = 0
double x_coth_x(double x) {
    if (std::abs(x) < 1e-4) {
        return 1.0 + x * x / 3.0;
    }
    return x / std::tanh(x);
}

// J(w) coth(w / 2kBT), with the removable singularity at w = 0 resolved analytically
// (limit 4 gamma0 kBT / pi). kBT = 0 takes the coth -> 1 branch.
double thermal_density(double omega, const ReservoirParams& p) {
    const double wc2 = p.omega_c * p.omega_c;
    const double pref = 2.0 * p.gamma0 / kPi * wc2 / (wc2 + omega * omega);
    if (p.kBT == 0.0) {
        return pref * omega;
    }
    const double two_t = 2.0 * p.kBT;
    return pref * two_t * x_coth_x(omega / two_t);
}

double coth_factor(double omega, const ReservoirParams& p) {
    if (p.kBT == 0.0) {
        return 1.0;
    }
    return 1.0 / std::tanh(omega / (2.0 * p.kBT));
}

// sin(a t) / a, equal to t at a = 0
double sinc_t(double a, double t) {
    const double at = a * t;
    if (std::abs(at) < 1e-6) {
        return t * (1.0 - at * at / 6.0);
    }
    return std::sin(at) / a;
}

using GK15 = boost::math::quadrature::gauss_kronrod<double, 15>;

// Adaptive bisection on top of the fixed G7/K15 pair. One traversal yields the value at the
// requested tolerance ("coarse") and at half of it ("fine"), so the tolerance-halving audit costs
// only the extra refinement.
struct AdaptiveSum {
    double coarse{0.0};
    double coarse_err{0.0};
    double fine{0.0};
    bool converged{true};
};

template <class F>
void integrate_panel(const F& f, double a, double b, double tol, int depth, bool track_coarse,
                     AdaptiveSum& acc) {
    double err = 0.0;
    double l1 = 0.0;
    const double v = GK15::integrate(f, a, b, 0, 0.0, &err, &l1);
    // Error estimates below a few hundred ulps of the panel's L1 norm are roundoff.
    const double floor = 256.0 * std::numeric_limits<double>::epsilon() * l1;
    const bool fine_ok = err <= std::max(0.5 * tol, floor);
    const bool coarse_ok = err <= std::max(tol, floor);
    if (fine_ok || depth == 0) {
        if (!fine_ok) {
            acc.converged = false;
        }
        acc.fine += v;
        if (track_coarse) {
            acc.coarse += v;
            acc.coarse_err += err;
        }
        return;
    }
    bool children_track = track_coarse;
    if (track_coarse && coarse_ok) {
        acc.coarse += v;
        acc.coarse_err += err;
        children_track = false;
    }
    const double m = 0.5 * (a + b);
    integrate_panel(f, a, m, 0.5 * tol, depth - 1, children_track, acc);
    integrate_panel(f, m, b, 0.5 * tol, depth - 1, children_track, acc);
}

struct DeltaQuadrature {
    QuadratureResult result;
    double refined_value{0.0};
};

DeltaQuadrature delta_quadrature(double t, const ReservoirParams& p, const QuadratureOptions& opts) {
    DeltaQuadrature out;
    if (t == 0.0 || p.alpha_sq == 0.0) {
        return out;
    }
    const double w0 = p.omega0;
    const double cutoff = std::max({opts.cutoff_omega_c * p.omega_c, opts.cutoff_omega0 * w0,
                                    opts.cutoff_kBT * p.kBT, opts.cutoff_periods * kPi / t});

    auto integrand = [&](double w) {
        return thermal_density(w, p) * (sinc_t(w - w0, t) + sinc_t(w + w0, t));
    };

    // Panels no wider than half an oscillation period of sin(w t).
    const double width_target = std::min(kPi / t, cutoff / 64.0);
    const auto panels = static_cast<std::size_t>(std::ceil(cutoff / width_target));
    const double width = cutoff / static_cast<double>(panels);
    // abs_tol bounds Delta itself, which carries the factor alpha_sq.
    const double panel_tol = opts.abs_tol / p.alpha_sq / static_cast<double>(panels);

    AdaptiveSum acc;
    for (std::size_t i = 0; i < panels; ++i) {
        const double a = width * static_cast<double>(i);
        const double b = (i + 1 == panels) ? cutoff : a + width;
        integrate_panel(integrand, a, b, panel_tol, opts.max_depth, true, acc);
    }

    // Tail beyond the cutoff: J coth / (w -+ w0) is positive and decreasing there, so both the
    // envelope integral and the integration-by-parts bound 2 h(cutoff) / t apply; keep the smaller.
    const double c = coth_factor(cutoff, p);
    const double envelope = 4.0 * p.gamma0 * p.omega_c * p.omega_c * c / kPi *
                            std::log(cutoff / (cutoff - w0)) / w0;
    const double f_cut = thermal_density(cutoff, p);
    const double oscillatory = 2.0 * (f_cut / (cutoff - w0) + f_cut / (cutoff + w0)) / t;
    const double tail = std::min(envelope, oscillatory);

    out.result.value = p.alpha_sq * acc.coarse;
    out.result.tail_bound = p.alpha_sq * tail;
    out.result.error_estimate = p.alpha_sq * (acc.coarse_err + tail);
    out.result.cutoff = cutoff;
    out.result.converged = acc.converged;
    out.refined_value = p.alpha_sq * acc.fine;
    return out;
}

}  // namespace

void ReservoirParams::validate() const {
    require(std::isfinite(omega0) && omega0 > 0.0, "omega0", "omega0 > 0");
    require(std::isfinite(gamma0) && gamma0 > 0.0, "gamma0", "gamma0 > 0");
    require(std::isfinite(omega_c) && omega_c > 0.0, "omega_c", "omega_c > 0");
    require(std::isfinite(kBT) && kBT >= 0.0, "kBT", "kBT >= 0");
    require(std::isfinite(alpha_sq) && alpha_sq >= 0.0, "alpha_sq", "alpha_sq >= 0");
    require(std::isfinite(M) && M >= 0.0, "M", "M >= 0");
    require(std::isfinite(eta) && eta >= 0.0 && eta <= 1.0, "eta", "0 <= eta <= 1");
    const double r = ratio();
    require(std::isfinite(r) && r > 0.0, "omega_c", "finite positive omega_c / omega0");
}

double spectral_density(double omega, const ReservoirParams& p) {
    if (!(omega >= 0.0)) {
        throw DomainError("spectral_density: omega must be >= 0");
    }
    const double wc2 = p.omega_c * p.omega_c;
    return 2.0 * p.gamma0 / kPi * omega * wc2 / (wc2 + omega * omega);
}

double dissipation_kernel(double tau, const ReservoirParams& p) {
    if (!(tau > 0.0)) {
        throw DomainError("dissipation_kernel: tau must be > 0");
    }
    return 2.0 * p.gamma0 * p.omega_c * p.omega_c * std::exp(-p.omega_c * tau);
}

double noise_kernel(double tau, const ReservoirParams& p) {
    if (!(tau > 0.0)) {
        throw DomainError("noise_kernel: tau must be > 0 (the cosine transform diverges at tau = 0)");
    }
    // Double-exponential Fourier rule for int_0^inf f(w) cos(w tau) dw with algebraically decaying f.
    boost::math::quadrature::ooura_fourier_cos<double> integrator(1e-12, 8);
    auto f = [&p](double w) { return thermal_density(w, p); };
    const auto [value, rel_err] = integrator.integrate(f, tau);
    (void)rel_err;
    return 2.0 * value;
}

QuadratureResult diffusion_coefficient_detailed(double t, const ReservoirParams& p, const QuadratureOptions& opts) {
    if (!(t >= 0.0)) {
        throw DomainError("diffusion_coefficient: t must be >= 0");
    }
    return delta_quadrature(t, p, opts).result;
}

double diffusion_coefficient(double t, const ReservoirParams& p, const QuadratureOptions& opts) {
    return diffusion_coefficient_detailed(t, p, opts).value;
}

double damping_coefficient(double t, const ReservoirParams& p) {
    if (!(t >= 0.0)) {
        throw DomainError("damping_coefficient: t must be >= 0");
    }
    const double w0 = p.omega0;
    const double wc = p.omega_c;
    const double bracket = w0 - std::exp(-wc * t) * (w0 * std::cos(w0 * t) + wc * std::sin(w0 * t));
    return p.alpha_sq * 2.0 * p.gamma0 * wc * wc * bracket / (wc * wc + w0 * w0);
}

MarkovRates markov_rates(const ReservoirParams& p) {
    const double w0 = p.omega0;
    const double wc = p.omega_c;
    MarkovRates r;
    r.delta = p.alpha_sq * kPi * spectral_density(w0, p) * coth_factor(w0, p);
    r.gamma = p.alpha_sq * 2.0 * p.gamma0 * wc * wc * w0 / (wc * wc + w0 * w0);
    return r;
}

MarkovRates CoefficientTable::rates_at(double t) const {
    const double slack = 1e-9 * std::max(1.0, t_max_);
    if (!(t >= -slack && t <= t_max_ + slack)) {
        std::ostringstream os;
        os << "CoefficientTable: t=" << t << " outside [0, " << t_max_ << "]";
        throw RangeError(os.str());
    }
    if (mode_ == RateMode::markovian) {
        return markov_;
    }
    const double pos = std::clamp(t / dt_, 0.0, static_cast<double>(t_.size() - 1));
    auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= t_.size()) {
        return {delta_.back(), gamma_.back()};
    }
    const double w = pos - static_cast<double>(i);
    return {delta_[i] + w * (delta_[i + 1] - delta_[i]), gamma_[i] + w * (gamma_[i + 1] - gamma_[i])};
}

void CoefficientTable::fill_derived() {
    const std::size_t n = t_.size();
    gamma1_.resize(n);
    gamma2_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        // Round once into Gamma1/Gamma2, then recover Delta/gamma by exact halving so that the
        // sum/difference identities hold bit-for-bit.
        gamma1_[i] = delta_[i] + gamma_[i];
        gamma2_[i] = delta_[i] - gamma_[i];
        delta_[i] = 0.5 * (gamma1_[i] + gamma2_[i]);
        gamma_[i] = 0.5 * (gamma1_[i] - gamma2_[i]);
    }
}

namespace {

std::size_t grid_size(double t_max, double dt, std::size_t max_samples) {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) {
        throw ValidationError("coefficient table: t_max must be > 0");
    }
    if (!(dt > 0.0) || dt > t_max) {
        throw ValidationError("coefficient table: dt must satisfy 0 < dt <= t_max");
    }
    const double steps = std::ceil(t_max / dt - 1e-9);
    if (steps + 1.0 > static_cast<double>(max_samples)) {
        throw ResourceError(static_cast<std::size_t>(std::min(steps + 1.0, 1e18)), max_samples);
    }
    return static_cast<std::size_t>(steps) + 1;
}

}  // namespace

CoefficientTable build_coefficient_table(const ReservoirParams& p, double t_max, double dt,
                                         const QuadratureOptions& opts, std::size_t max_samples) {
    p.validate();
    const std::size_t n = grid_size(t_max, dt, max_samples);

    CoefficientTable table;
    table.params_ = p;
    table.markov_ = markov_rates(p);
    table.mode_ = RateMode::non_markovian;
    table.dt_ = dt;
    table.t_max_ = dt * static_cast<double>(n - 1);
    table.t_.resize(n);
    table.delta_.resize(n);
    table.gamma_.resize(n);
    table.delta_err_.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const double t = dt * static_cast<double>(i);
        table.t_[i] = t;
        const DeltaQuadrature q = delta_quadrature(t, p, opts);
        table.delta_[i] = q.result.value;
        table.delta_err_[i] = q.result.error_estimate;
        const double change = std::abs(q.refined_value - q.result.value);
        table.max_refinement_change_ = std::max(table.max_refinement_change_, change);
        if (change > q.result.error_estimate) {
            table.refinement_ok_ = false;
        }
        table.converged_ = table.converged_ && q.result.converged;
        table.gamma_[i] = damping_coefficient(t, p);
        if (table.gamma_[i] < 0.0) {
            ++table.gamma_negative_;
        }
    }
    table.fill_derived();
    return table;
}

CoefficientTable build_markov_table(const ReservoirParams& p, double t_max, double dt, std::size_t max_samples) {
    p.validate();
    const std::size_t n = grid_size(t_max, dt, max_samples);

    CoefficientTable table;
    table.params_ = p;
    table.markov_ = markov_rates(p);
    table.mode_ = RateMode::markovian;
    table.dt_ = dt;
    table.t_max_ = dt * static_cast<double>(n - 1);
    table.t_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        table.t_[i] = dt * static_cast<double>(i);
    }
    table.delta_.assign(n, table.markov_.delta);
    table.gamma_.assign(n, table.markov_.gamma);
    table.delta_err_.assign(n, 0.0);
    table.fill_derived();
    return table;
}

}  // namespace nmqc
