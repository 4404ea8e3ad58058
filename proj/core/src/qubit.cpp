#include "nmqc/qubit.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "nmqc/errors.hpp"

namespace nmqc {

using cd = std::complex<double>;

double BlochState::norm() const noexcept { return std::sqrt(norm_sq()); }

bool BlochState::is_physical(double slack) const noexcept {
    const double bound = 1.0 + slack;
    return norm_sq() <= bound * bound;
}

BlochState operator+(const BlochState& a, const BlochState& b) noexcept { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
BlochState operator-(const BlochState& a, const BlochState& b) noexcept { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
BlochState operator*(double c, const BlochState& s) noexcept { return {c * s.x, c * s.y, c * s.z}; }

namespace pauli {

Matrix2 identity() { return Matrix2::Identity(); }

Matrix2 sx() {
    Matrix2 m;
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

Matrix2 sy() {
    Matrix2 m;
    m << 0.0, cd(0.0, -1.0), cd(0.0, 1.0), 0.0;
    return m;
}

Matrix2 sz() {
    Matrix2 m;
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

Matrix2 sigma_minus() { return 0.5 * (sx() - cd(0.0, 1.0) * sy()); }
Matrix2 sigma_plus() { return 0.5 * (sx() + cd(0.0, 1.0) * sy()); }

}  // namespace pauli

DensityMatrix2::DensityMatrix2(const Matrix2& m, double tol) : m_(m) {
    const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (herm > tol) {
        std::ostringstream os;
        os << "density matrix is not Hermitian (deviation " << herm << ")";
        throw ValidationError(os.str());
    }
    const cd tr = m.trace();
    if (std::abs(tr - 1.0) > tol) {
        std::ostringstream os;
        os << "density matrix trace " << tr.real() << (tr.imag() >= 0 ? "+" : "") << tr.imag() << "i is not 1";
        throw ValidationError(os.str());
    }
    const Matrix2 h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix2> es(h, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    const double eig_tol = std::max(tol, kStateSlack);
    if (ev.minCoeff() < -eig_tol || ev.maxCoeff() > 1.0 + eig_tol) {
        std::ostringstream os;
        os << "density matrix eigenvalues (" << ev(0) << ", " << ev(1) << ") outside [0, 1]";
        throw ValidationError(os.str());
    }
}

DensityMatrix2 density_from_bloch(const BlochState& s) {
    Matrix2 m;
    m << cd(0.5 * (1.0 + s.z), 0.0), cd(0.5 * s.x, -0.5 * s.y),
         cd(0.5 * s.x, 0.5 * s.y), cd(0.5 * (1.0 - s.z), 0.0);
    return DensityMatrix2(m);
}

BlochState bloch_image(const Matrix2& m) {
    // tr(m sx) = m01 + m10, tr(m sy) = i (m01 - m10), tr(m sz) = m00 - m11
    const cd x = m(0, 1) + m(1, 0);
    const cd y = cd(0.0, 1.0) * (m(0, 1) - m(1, 0));
    const cd z = m(0, 0) - m(1, 1);
    return {x.real(), y.real(), z.real()};
}

BlochState bloch_from_density(const DensityMatrix2& rho) { return bloch_image(rho.matrix()); }

Matrix2 dissipator(const Matrix2& L, const Matrix2& rho) {
    const Matrix2 LdL = L.adjoint() * L;
    return L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL);
}

Matrix2 meas_superop(const Matrix2& A, const Matrix2& rho) {
    const Matrix2 sym = A * rho + rho * A;
    return sym - sym.trace() * rho;
}

BlochState drift_with_rates(const BlochState& s, const ControlInput& u, const MarkovRates& rates,
                            const ReservoirParams& p) noexcept {
    const double transverse = rates.delta + 0.5 * p.M;
    return {
        -transverse * s.x - p.omega0 * s.y + u.uy * s.z,
        p.omega0 * s.x - transverse * s.y - u.ux * s.z,
        -u.uy * s.x + u.ux * s.y - 2.0 * rates.delta * s.z - 2.0 * rates.gamma,
    };
}

namespace {

MarkovRates lookup(double t, const CoefficientTable& table, RateMode mode) {
    MarkovRates r = table.rates_at(t);  // range check in both modes
    if (mode == RateMode::markovian) {
        r = table.asymptotic();
    }
    return r;
}

}  // namespace

BlochState drift(const BlochState& s, double t, const ControlInput& u, const CoefficientTable& table,
                 const ReservoirParams& p, RateMode mode) {
    return drift_with_rates(s, u, lookup(t, table, mode), p);
}

BlochState diffusion(const BlochState& s, const ReservoirParams& p) noexcept {
    const double g = std::sqrt(p.M * p.eta);
    return {g * s.x * s.z, g * s.y * s.z, g * (s.z * s.z - 1.0)};
}

Matrix2 matrix_drift_oracle(const DensityMatrix2& rho, double t, const ControlInput& u,
                            const CoefficientTable& table, const ReservoirParams& p, RateMode mode) {
    const MarkovRates r = lookup(t, table, mode);
    const double gamma1 = r.delta + r.gamma;
    const double gamma2 = r.delta - r.gamma;
    const Matrix2& m = rho.matrix();
    const cd minus_half_i(0.0, -0.5);
    auto comm = [&m](const Matrix2& a) -> Matrix2 { return a * m - m * a; };

    Matrix2 out = minus_half_i * p.omega0 * comm(pauli::sz());
    out += minus_half_i * u.ux * comm(pauli::sx());
    out += minus_half_i * u.uy * comm(pauli::sy());
    out += gamma1 * dissipator(pauli::sigma_minus(), m);
    out += gamma2 * dissipator(pauli::sigma_plus(), m);
    out += p.M * dissipator(-0.5 * pauli::sz(), m);
    return out;
}

BlochState target_state(double t, const BlochState& s0, double omega0) {
    const double c = std::cos(omega0 * t);
    const double s = std::sin(omega0 * t);
    return {s0.x * c - s0.y * s, s0.x * s + s0.y * c, s0.z};
}

double coherence_factor(const BlochState& s, const BlochState& s0) {
    const double ref = std::hypot(s0.x, s0.y);
    if (!(ref > 0.0)) {
        throw DomainError("coherence_factor: reference state has no transverse component");
    }
    return std::hypot(s.x, s.y) / ref;
}

Populations populations(const BlochState& s) noexcept { return {0.5 * (1.0 + s.z), 0.5 * (1.0 - s.z)}; }

}  // namespace nmqc
