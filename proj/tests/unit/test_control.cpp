#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nmqc/control.hpp"
#include "nmqc/errors.hpp"
#include "nmqc/kernels.hpp"
#include "nmqc/qubit.hpp"

using namespace nmqc;

namespace {

const BlochState kReferenceState{std::sqrt(2.0) / 4.0, std::sqrt(2.0) / 4.0, std::sqrt(3.0) / 2.0};

ReservoirParams linear_params() {
    ReservoirParams p;
    p.alpha_sq = 0.0;
    p.M = 0.0;
    return p;
}

const CoefficientTable& reference_table() {
    static const CoefficientTable t = build_coefficient_table(ReservoirParams{}, 15.0, 0.01);
    return t;
}

ControlTrajectory zero_control(std::size_t n, double dt) {
    ControlTrajectory c;
    for (std::size_t k = 0; k <= n; ++k) {
        c.times.push_back(dt * static_cast<double>(k));
    }
    c.u.assign(n + 1, {});
    return c;
}

}  // namespace

TEST_SUITE("control") {

TEST_CASE("total cost examples") {
    const auto c = zero_control(10, 0.1);
    const std::vector<BlochState> path(11, kReferenceState);
    CHECK(total_cost(path, c, path, 1.0) == 0.0);

    std::vector<BlochState> off = path;
    off.back() = off.back() + BlochState{1.0, 0.0, 0.0};
    CHECK(total_cost(off, c, path, 0.0) == 0.0);
    CHECK(total_cost(off, c, path, 1.0) == doctest::Approx(0.25).epsilon(1e-15));

    auto on = c;
    for (auto& u : on.u) u = {1.0, 0.0};
    CHECK(total_cost(path, on, path, 1.0) == doctest::Approx(0.5).epsilon(1e-14));  // 1/2 int 1 dt over [0, 1]

    std::vector<BlochState> short_path(5, kReferenceState);
    CHECK_THROWS_AS(total_cost(short_path, c, path, 1.0), ValidationError);
}

TEST_CASE("costate rhs examples") {
    const auto p = linear_params();
    const auto table = build_markov_table(p, 1.0, 0.01);
    const auto r = costate_rhs({1.0, 0.0, 0.0}, kReferenceState, 0.5, {}, table, p, RateMode::non_markovian);
    CHECK(r.l1 == 0.0);
    CHECK(r.l2 == doctest::Approx(p.omega0));
    CHECK(r.l3 == 0.0);
    const auto z = costate_rhs({}, kReferenceState, 0.5, {0.3, 0.2}, table, p, RateMode::non_markovian);
    CHECK(z.l1 == 0.0);
    CHECK(z.l2 == 0.0);
    CHECK(z.l3 == 0.0);
}

TEST_CASE("costate rhs equals -J^T lambda with a finite-difference Jacobian") {
    ReservoirParams p;
    const auto& table = reference_table();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0), ut(0.0, 15.0);
    const double h = 1e-6;
    for (int i = 0; i < 200; ++i) {
        const BlochState s{0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng)};
        const ControlInput c{u(rng), u(rng)};
        const Costate l{u(rng), u(rng), u(rng)};
        const double t = ut(rng);
        double jac[3][3];
        for (int j = 0; j < 3; ++j) {
            BlochState sp = s, sm = s;
            (j == 0 ? sp.x : j == 1 ? sp.y : sp.z) += h;
            (j == 0 ? sm.x : j == 1 ? sm.y : sm.z) -= h;
            const auto fp = drift(sp, t, c, table, p, RateMode::non_markovian);
            const auto fm = drift(sm, t, c, table, p, RateMode::non_markovian);
            jac[0][j] = (fp.x - fm.x) / (2 * h);
            jac[1][j] = (fp.y - fm.y) / (2 * h);
            jac[2][j] = (fp.z - fm.z) / (2 * h);
        }
        const double lv[3] = {l.l1, l.l2, l.l3};
        double expect[3];
        for (int j = 0; j < 3; ++j) {
            expect[j] = -(jac[0][j] * lv[0] + jac[1][j] * lv[1] + jac[2][j] * lv[2]);
        }
        const auto r = costate_rhs(l, s, t, c, table, p, RateMode::non_markovian);
        CHECK(std::abs(r.l1 - expect[0]) <= 1e-6);
        CHECK(std::abs(r.l2 - expect[1]) <= 1e-6);
        CHECK(std::abs(r.l3 - expect[2]) <= 1e-6);
    }
}

TEST_CASE("stationarity control") {
    const auto zero = stationarity_control({}, kReferenceState);
    CHECK(zero.ux == 0.0);
    CHECK(zero.uy == 0.0);
    const auto u = stationarity_control({0.0, 1.0, 0.0}, {0, 0, 1});
    CHECK(u.ux == 1.0);
    CHECK(u.uy == 0.0);

    // dH/du = u + lambda . df/du with df/dux = (0, -z, y), df/duy = (z, 0, -x)
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Costate l{d(rng), d(rng), d(rng)};
        const BlochState s{d(rng), d(rng), d(rng)};
        const auto c = stationarity_control(l, s);
        CHECK(std::abs(c.ux + (-l.l2 * s.z + l.l3 * s.y)) <= 1e-15);
        CHECK(std::abs(c.uy + (l.l1 * s.z - l.l3 * s.x)) <= 1e-15);
    }
}

TEST_CASE("sweep: theta = 0 converges to zero control in one iteration") {
    OCConfig oc;
    oc.theta = 0.0;
    const auto res = forward_backward_sweep(ReservoirParams{}, reference_table(), kReferenceState, oc);
    CHECK(res.converged);
    CHECK(res.iterations == 1);
    for (const auto& u : res.control.u) {
        CHECK(u.ux == 0.0);
        CHECK(u.uy == 0.0);
    }
    CHECK(res.cost == 0.0);
}

TEST_CASE("sweep: zero control is a fixed point when free evolution hits the target") {
    const auto p = linear_params();
    const auto table = build_markov_table(p, 15.0, 0.01);

    // A pole is reproduced exactly by the discrete free evolution.
    const auto pole = forward_backward_sweep(p, table, {0, 0, 1}, OCConfig{});
    CHECK(pole.converged);
    CHECK(pole.iterations == 1);
    for (const auto& u : pole.control.u) {
        CHECK(u.ux == 0.0);
        CHECK(u.uy == 0.0);
    }

    // For a generic state explicit Euler misses the analytic rotation by O(dt), so the residual
    // of u = 0 after one sweep vanishes linearly with the step.
    std::vector<double> residual;
    for (const double dt : {1e-3, 5e-4, 2.5e-4}) {
        OCConfig oc;
        oc.dt = dt;
        oc.max_iter = 1;
        residual.push_back(forward_backward_sweep(p, table, kReferenceState, oc).final_change);
    }
    CHECK(residual[0] < 0.1);
    CHECK(residual[0] / residual[1] == doctest::Approx(2.0).epsilon(0.05));
    CHECK(residual[1] / residual[2] == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("sweep: reference preset converges and beats zero control") {
    const OCConfig oc;  // theta 1, relaxation 0.3, tol 1e-6, 500 iterations, T = 15
    const auto res = forward_backward_sweep(ReservoirParams{}, reference_table(), kReferenceState, oc);
    CHECK(res.converged);
    CHECK(res.iterations <= 500);
    CHECK(res.cost < res.zero_control_cost);
    CHECK(res.cost <= res.history.front());
    CHECK(res.history.size() == static_cast<std::size_t>(res.iterations));
    CHECK(res.final_change <= oc.tol);

    // Hamiltonian stationarity along the grid
    double lam_max = 0.0, residual = 0.0;
    for (std::size_t k = 0; k < res.control.u.size(); ++k) {
        const auto& l = res.costate.lambda[k];
        lam_max = std::max({lam_max, std::abs(l.l1), std::abs(l.l2), std::abs(l.l3)});
        const auto st = stationarity_control(l, res.state_path[k]);
        residual = std::max({residual, std::abs(res.control.u[k].ux - st.ux), std::abs(res.control.u[k].uy - st.uy)});
    }
    CHECK(residual <= oc.tol * (1.0 + lam_max));

    // terminal costate is the gradient of (theta/4)|ds|^2
    const auto ds = res.state_path.back() - res.target_path.back();
    CHECK(res.costate.lambda.back().l1 == doctest::Approx(0.5 * ds.x).epsilon(1e-14));
    CHECK(res.costate.lambda.back().l3 == doctest::Approx(0.5 * ds.z).epsilon(1e-14));
}

TEST_CASE("sweep: non-convergence is reported, not thrown") {
    OCConfig oc;
    oc.max_iter = 3;
    const auto res = forward_backward_sweep(ReservoirParams{}, reference_table(), kReferenceState, oc);
    CHECK_FALSE(res.converged);
    CHECK(res.iterations == 3);
    CHECK(res.history.size() == 3);
    CHECK(res.final_change > oc.tol);
}

TEST_CASE("sweep: larger theta never increases the terminal error") {
    double prev = 1e300;
    for (const double theta : {0.5, 1.0, 2.0, 4.0}) {
        OCConfig oc;
        oc.theta = theta;
        const auto res = forward_backward_sweep(ReservoirParams{}, reference_table(), kReferenceState, oc);
        CHECK(res.converged);
        const double err = (res.state_path.back() - res.target_path.back()).norm();
        CHECK(err <= prev);
        prev = err;
    }
}

TEST_CASE("gradient check") {
    OCConfig oc;
    const auto p = linear_params();
    const auto lin_table = build_markov_table(p, 15.0, 0.01);
    CHECK(gradient_check(p, lin_table, kReferenceState, oc, 1e-5) <= 1e-6);
    CHECK(gradient_check(ReservoirParams{}, reference_table(), kReferenceState, oc, 1e-5) <= 1e-3);
    CHECK_THROWS_AS(gradient_check(p, lin_table, kReferenceState, oc, 0.0), DomainError);
}

TEST_CASE("terminal gradient scales linearly with theta") {
    const ReservoirParams p;
    const auto c0 = zero_control(1000, 1e-3);
    auto c = c0;
    for (std::size_t k = 0; k < c.u.size(); ++k) {
        c.u[k] = {0.1 * std::sin(c.times[k]), 0.05};
    }
    const auto g1 = cost_gradient(p, reference_table(), kReferenceState, c, 1.0, RateMode::non_markovian);
    const auto g3 = cost_gradient(p, reference_table(), kReferenceState, c, 3.0, RateMode::non_markovian);
    for (std::size_t k = 0; k < c.u.size(); ++k) {
        CHECK(g3.terminal[k].ux == doctest::Approx(3.0 * g1.terminal[k].ux).epsilon(1e-12));
        CHECK(g3.terminal[k].uy == doctest::Approx(3.0 * g1.terminal[k].uy).epsilon(1e-12));
        CHECK(g3.running[k].ux == g1.running[k].ux);
    }
}

TEST_CASE("feedback policy") {
    const auto res = forward_backward_sweep(ReservoirParams{}, reference_table(), kReferenceState, OCConfig{});
    const auto policy = feedback_policy(res);
    double worst = 0.0;
    for (std::size_t k = 0; k < res.control.u.size(); ++k) {
        const auto u = policy(res.control.times[k], res.state_path[k]);
        worst = std::max({worst, std::abs(u.ux - res.control.u[k].ux), std::abs(u.uy - res.control.u[k].uy)});
    }
    CHECK(worst <= res.tol);

    // beyond the horizon lambda is held at lambda(T)
    const auto& lT = res.costate.lambda.back();
    const auto late = policy(40.0, kReferenceState);
    const auto expect = stationarity_control(lT, kReferenceState);
    CHECK(late.ux == doctest::Approx(expect.ux).epsilon(1e-14));
    CHECK(late.uy == doctest::Approx(expect.uy).epsilon(1e-14));

    OCResult zero = res;
    for (auto& l : zero.costate.lambda) l = {};
    const auto none = feedback_policy(zero);
    CHECK(none(3.0, kReferenceState).ux == 0.0);
    CHECK(none(3.0, kReferenceState).uy == 0.0);
}

TEST_CASE("config validation") {
    OCConfig oc;
    CHECK_NOTHROW(oc.validate());
    oc.relaxation = 0.0;
    CHECK_THROWS_AS(oc.validate(), ValidationError);
    oc = {};
    oc.theta = -1.0;
    CHECK_THROWS_AS(oc.validate(), ValidationError);
    oc = {};
    oc.tol = 0.0;
    CHECK_THROWS_AS(oc.validate(), ValidationError);
}

}  // TEST_SUITE
