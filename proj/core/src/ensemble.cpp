#include "nmqc/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "nmqc/errors.hpp"
#include "nmqc/rng.hpp"

namespace nmqc {

namespace {

struct Sampled {
    std::vector<double> lambda, x, y, z;
    std::size_t clamps{0};
};

// Welford accumulator, fed strictly in trajectory-index order.
struct Moments {
    std::vector<double> mean, m2;

    explicit Moments(std::size_t n) : mean(n, 0.0), m2(n, 0.0) {}

    void add(const std::vector<double>& v, std::size_t count) {
        const double inv = 1.0 / static_cast<double>(count);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double d = v[i] - mean[i];
            mean[i] += d * inv;
            m2[i] += d * (v[i] - mean[i]);
        }
    }

    std::vector<double> variance(std::size_t count) const {
        std::vector<double> out(m2.size(), 0.0);
        if (count > 1) {
            for (std::size_t i = 0; i < m2.size(); ++i) {
                out[i] = std::max(0.0, m2[i] / static_cast<double>(count - 1));
            }
        }
        return out;
    }
};

Sampled sample(const TrajectoryRecord& rec, std::size_t stride) {
    Sampled s;
    const std::size_t n = rec.size();
    for (std::size_t k = 0; k < n; k += stride) {
        s.lambda.push_back(rec.lambda[k]);
        s.x.push_back(rec.states[k].x);
        s.y.push_back(rec.states[k].y);
        s.z.push_back(rec.states[k].z);
    }
    s.clamps = rec.clamp_count;
    return s;
}

std::string describe(const std::exception& e) { return e.what(); }

}  // namespace

EnsembleError::EnsembleError(std::size_t index, const std::string& what)
    : std::runtime_error("trajectory " + std::to_string(index) + ": " + what), index_(index) {}

std::size_t EnsembleStats::index_at(double t) const {
    if (times.empty()) {
        throw RangeError("EnsembleStats::index_at on empty statistics");
    }
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end()) {
        return times.size() - 1;
    }
    const auto i = static_cast<std::size_t>(it - times.begin());
    if (i > 0 && std::abs(times[i - 1] - t) <= std::abs(times[i] - t)) {
        return i - 1;
    }
    return i;
}

EnsembleStats run_ensemble(const ReservoirParams& p, const CoefficientTable& table, const IntegratorConfig& cfg,
                           const ControlPolicy& policy, RateMode mode, const BlochState& s0, std::size_t n,
                           const EnsembleOptions& opts) {
    if (n == 0) {
        throw ValidationError("run_ensemble: trajectory count must be >= 1");
    }
    if (opts.stride == 0) {
        throw ValidationError("run_ensemble: stride must be >= 1");
    }
    const std::size_t steps = cfg.steps();
    check_table_compatible(table, cfg.dt, static_cast<double>(steps) * cfg.dt);

    unsigned workers = opts.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.workers;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));

    EnsembleStats stats;
    stats.master_seed = cfg.master_seed;
    stats.trajectory_count = n;
    for (std::size_t k = 0; k <= steps; k += opts.stride) {
        stats.times.push_back(cfg.dt * static_cast<double>(k));
    }
    const std::size_t m = stats.times.size();
    Moments lam(m), mx(m), my(m), mz(m);
    double clamp_sum = 0.0;

    // Chunks bound the memory held between simulation and the ordered reduction.
    const std::size_t chunk = static_cast<std::size_t>(workers) * 8;
    std::vector<Sampled> slots(chunk);
    std::size_t reduced = 0;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
        const std::size_t end = std::min(n, begin + chunk);
        std::atomic<std::size_t> next{begin};
        std::mutex err_mutex;
        std::size_t failed_index = n;
        std::string failed_what;

        auto work = [&]() {
            for (std::size_t i = next.fetch_add(1); i < end; i = next.fetch_add(1)) {
                try {
                    IntegratorConfig c = cfg;
                    c.trajectory_index = i;
                    slots[i - begin] = sample(simulate(p, table, c, policy, mode, s0), opts.stride);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (i < failed_index) {
                        failed_index = i;
                        failed_what = describe(e);
                    }
                }
            }
        };
        if (workers == 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (unsigned w = 0; w < workers; ++w) {
                pool.emplace_back(work);
            }
            for (auto& th : pool) {
                th.join();
            }
        }
        if (failed_index < n) {
            throw EnsembleError(failed_index, failed_what);
        }
        for (std::size_t i = begin; i < end; ++i) {
            const Sampled& s = slots[i - begin];
            ++reduced;
            lam.add(s.lambda, reduced);
            mx.add(s.x, reduced);
            my.add(s.y, reduced);
            mz.add(s.z, reduced);
            clamp_sum += static_cast<double>(s.clamps);
        }
    }

    stats.mean_lambda = lam.mean;
    stats.var_lambda = lam.variance(n);
    stats.mean_x = mx.mean;
    stats.var_x = mx.variance(n);
    stats.mean_y = my.mean;
    stats.var_y = my.variance(n);
    stats.mean_z = mz.mean;
    stats.var_z = mz.variance(n);
    stats.clamp_rate = clamp_sum / (static_cast<double>(n) * static_cast<double>(std::max<std::size_t>(steps, 1)));
    return stats;
}

ModeComparison compare_modes(const ReservoirParams& p, const CoefficientTable& table, const OCConfig& oc,
                             const IntegratorConfig& cfg, const BlochState& s0, std::size_t n,
                             const EnsembleOptions& opts) {
    ModeComparison out;
    out.control = forward_backward_sweep(p, table, s0, oc, RateMode::non_markovian);

    auto branch_cfg = [&cfg](Branch b) {
        IntegratorConfig c = cfg;
        c.master_seed = branch_seed(cfg.master_seed, static_cast<std::uint64_t>(b));
        return c;
    };
    out.controlled = run_ensemble(p, table, branch_cfg(Branch::controlled), feedback_policy(out.control),
                                  RateMode::non_markovian, s0, n, opts);
    out.uncontrolled = run_ensemble(p, table, branch_cfg(Branch::uncontrolled), zero_policy(),
                                    RateMode::non_markovian, s0, n, opts);
    out.markovian_uncontrolled = run_ensemble(p, table, branch_cfg(Branch::markovian), zero_policy(),
                                              RateMode::markovian, s0, n, opts);
    // Report the caller's seed; branch seeds are derived from it.
    out.controlled.master_seed = cfg.master_seed;
    out.uncontrolled.master_seed = cfg.master_seed;
    out.markovian_uncontrolled.master_seed = cfg.master_seed;
    out.target_lambda.assign(out.controlled.times.size(), 1.0);
    return out;
}

const ScanCurve& TemperatureScan::curve(RateMode mode, double kBT) const {
    for (const auto& c : curves) {
        if (c.mode == mode && c.kBT == kBT) {
            return c;
        }
    }
    std::ostringstream os;
    os << "TemperatureScan: no curve for kBT=" << kBT;
    throw RangeError(os.str());
}

namespace {

// Classical RK4 of the control-free drift. Explicit Euler inflates the precession radius by
// omega0^2 dt / 2 per unit time, which exceeds the Markovian decay rate at low temperature.
std::vector<BlochState> rk4_free_path(const ReservoirParams& p, const CoefficientTable& table, const BlochState& s0,
                                      double dt, std::size_t steps, RateMode mode) {
    std::vector<BlochState> path(steps + 1);
    path[0] = s0;
    const ControlInput u{};
    auto f = [&](double t, const BlochState& s) { return drift(s, t, u, table, p, mode); };
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = dt * static_cast<double>(k);
        const double t_next = dt * static_cast<double>(k + 1);
        const double t_mid = 0.5 * (t + t_next);
        const BlochState& s = path[k];
        const BlochState k1 = f(t, s);
        const BlochState k2 = f(t_mid, s + (0.5 * dt) * k1);
        const BlochState k3 = f(t_mid, s + (0.5 * dt) * k2);
        const BlochState k4 = f(t_next, s + dt * k3);
        path[k + 1] = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return path;
}

}  // namespace

TemperatureScan temperature_scan(const ReservoirParams& p, const std::vector<double>& kBT_values, double t_max,
                                 double dt, double table_dt, const BlochState& s0, const QuadratureOptions& quad) {
    if (kBT_values.empty()) {
        throw ValidationError("temperature_scan: kBT list must be non-empty");
    }
    if (!(dt > 0.0) || !(t_max >= dt)) {
        throw ValidationError("temperature_scan: grid must satisfy 0 < dt <= t_max");
    }
    const auto steps = static_cast<std::size_t>(std::llround(t_max / dt));

    TemperatureScan scan;
    scan.times.resize(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        scan.times[k] = dt * static_cast<double>(k);
    }

    for (const double kBT : kBT_values) {
        ReservoirParams q = p;
        q.kBT = kBT;
        q.M = 0.0;
        const CoefficientTable table = build_coefficient_table(q, static_cast<double>(steps) * dt, table_dt, quad);
        check_table_compatible(table, dt, static_cast<double>(steps) * dt);
        for (const RateMode mode : {RateMode::non_markovian, RateMode::markovian}) {
            const auto path = rk4_free_path(q, table, s0, dt, steps, mode);
            ScanCurve c;
            c.mode = mode;
            c.kBT = kBT;
            c.lambda.resize(path.size());
            for (std::size_t k = 0; k < path.size(); ++k) {
                c.lambda[k] = coherence_factor(path[k], s0);
            }
            scan.curves.push_back(std::move(c));
        }
    }
    return scan;
}

}  // namespace nmqc
