// qubit.hpp: single-qubit state representations, superoperators and the Bloch-form
// drift/diffusion of the measured, feedback-controlled TCL master equation.
//
// Conventions: rho = (I + x sx + y sy + z sz) / 2, so rho00 = (1 + z) / 2.
// sigma_minus = (sx - i sy) / 2 maps |0> -> |1> (drives z toward -1).

#pragma once

#include <array>
#include <complex>

#include <Eigen/Core>

#include "nmqc/kernels.hpp"

namespace nmqc {

inline constexpr double kStateSlack = 1e-9;

struct BlochState {
    double x{0.0};
    double y{0.0};
    double z{0.0};

    double norm() const noexcept;
    double norm_sq() const noexcept { return x * x + y * y + z * z; }
    // |s|^2 <= (1 + slack)^2
    bool is_physical(double slack = kStateSlack) const noexcept;
};

BlochState operator+(const BlochState& a, const BlochState& b) noexcept;
BlochState operator-(const BlochState& a, const BlochState& b) noexcept;
BlochState operator*(double c, const BlochState& s) noexcept;

using Matrix2 = Eigen::Matrix2cd;

// Hermitian, unit-trace 2x2 density matrix. Construction validates.
class DensityMatrix2 {
public:
    // Throws ValidationError if the matrix is not Hermitian, not unit trace, or has eigenvalues
    // outside [-tol, 1 + tol].
    explicit DensityMatrix2(const Matrix2& m, double tol = 1e-12);

    const Matrix2& matrix() const noexcept { return m_; }
    std::complex<double> operator()(int r, int c) const { return m_(r, c); }

private:
    Matrix2 m_;
};

struct ControlInput {
    double ux{0.0};
    double uy{0.0};
};

namespace pauli {
Matrix2 identity();
Matrix2 sx();
Matrix2 sy();
Matrix2 sz();
Matrix2 sigma_minus();  // (sx - i sy) / 2
Matrix2 sigma_plus();   // (sx + i sy) / 2
}  // namespace pauli

DensityMatrix2 density_from_bloch(const BlochState& s);
BlochState bloch_from_density(const DensityMatrix2& rho);

// Bloch components (tr(rho sx), tr(rho sy), tr(rho sz)) of an arbitrary matrix, e.g. a generator
// output. No validation.
BlochState bloch_image(const Matrix2& m);

// D[L] rho = L rho L^dag - 1/2 {L^dag L, rho}
Matrix2 dissipator(const Matrix2& L, const Matrix2& rho);

// H[A] rho = A rho + rho A - tr(A rho + rho A) rho
Matrix2 meas_superop(const Matrix2& A, const Matrix2& rho);

// Deterministic rate (xdot, ydot, zdot). Rates come from table.rates_at(t) in non-Markovian mode
// and from the asymptotic constants in Markovian mode.
BlochState drift(const BlochState& s, double t, const ControlInput& u, const CoefficientTable& table,
                 const ReservoirParams& p, RateMode mode);

// Same right-hand side for explicit (Delta, gamma).
BlochState drift_with_rates(const BlochState& s, const ControlInput& u, const MarkovRates& rates,
                            const ReservoirParams& p) noexcept;

// sqrt(M eta) (xz, yz, z^2 - 1)
BlochState diffusion(const BlochState& s, const ReservoirParams& p) noexcept;

// Assembles the deterministic generator from commutators and dissipators in matrix form.
// Its Bloch image must coincide with drift().
Matrix2 matrix_drift_oracle(const DensityMatrix2& rho, double t, const ControlInput& u,
                            const CoefficientTable& table, const ReservoirParams& p, RateMode mode);

// Free precession of s0 about z at omega0.
BlochState target_state(double t, const BlochState& s0, double omega0);

// Lambda = sqrt(x^2 + y^2) / sqrt(x0^2 + y0^2). Throws DomainError when x0 = y0 = 0.
double coherence_factor(const BlochState& s, const BlochState& s0);

struct Populations {
    double p00{0.0};
    double p11{0.0};
};

Populations populations(const BlochState& s) noexcept;

}  // namespace nmqc
