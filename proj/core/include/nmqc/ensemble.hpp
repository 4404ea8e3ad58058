// ensemble.hpp: trajectory ensembles and the coherence comparison experiments
//
// Trajectory i always uses the noise sub-stream (master_seed, i); per-trajectory results are
// reduced in index order, so statistics are bitwise identical for any worker count.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nmqc/control.hpp"
#include "nmqc/kernels.hpp"
#include "nmqc/qubit.hpp"
#include "nmqc/sde.hpp"

namespace nmqc {

struct EnsembleOptions {
    unsigned workers{0};     // 0: std::thread::hardware_concurrency()
    std::size_t stride{10};  // keep every stride-th integration step in the statistics
};

struct EnsembleStats {
    std::vector<double> times;
    std::vector<double> mean_lambda, var_lambda;
    std::vector<double> mean_x, var_x;
    std::vector<double> mean_y, var_y;
    std::vector<double> mean_z, var_z;
    std::size_t trajectory_count{0};
    std::uint64_t master_seed{0};
    double clamp_rate{0.0};  // clamp events per step, averaged over trajectories

    // Index of the sample closest to time t.
    std::size_t index_at(double t) const;
};

// Raised when a member trajectory fails; what() carries the index and the step context.
class EnsembleError : public std::runtime_error {
public:
    EnsembleError(std::size_t index, const std::string& what);
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

EnsembleStats run_ensemble(const ReservoirParams& p, const CoefficientTable& table, const IntegratorConfig& cfg,
                           const ControlPolicy& policy, RateMode mode, const BlochState& s0, std::size_t n,
                           const EnsembleOptions& opts = {});

// Branch identifiers used to derive independent seeds in compare_modes.
enum class Branch : std::uint64_t { controlled = 1, uncontrolled = 2, markovian = 3 };

struct ModeComparison {
    OCResult control;
    EnsembleStats controlled;              // non-Markovian, feedback policy
    EnsembleStats uncontrolled;            // non-Markovian, u = 0
    EnsembleStats markovian_uncontrolled;  // constant rates, u = 0
    std::vector<double> target_lambda;     // identically 1 on the statistics grid
};

// Synthesizes the control on oc's horizon, then runs the three ensembles over cfg's horizon
// (which may extend past the control horizon; the costate is then held at lambda(T)).
ModeComparison compare_modes(const ReservoirParams& p, const CoefficientTable& table, const OCConfig& oc,
                             const IntegratorConfig& cfg, const BlochState& s0, std::size_t n,
                             const EnsembleOptions& opts = {});

struct ScanCurve {
    RateMode mode{RateMode::non_markovian};
    double kBT{0.0};
    std::vector<double> lambda;
};

struct TemperatureScan {
    std::vector<double> times;
    std::vector<ScanCurve> curves;  // for each kBT: non-Markovian then Markovian

    const ScanCurve& curve(RateMode mode, double kBT) const;
};

// Control-free, measurement-free deterministic runs (u = 0, M = 0, classical RK4) for every temperature in both
// modes. table_dt is the coefficient grid; dt the integration step.
TemperatureScan temperature_scan(const ReservoirParams& p, const std::vector<double>& kBT_values, double t_max,
                                 double dt, double table_dt, const BlochState& s0,
                                 const QuadratureOptions& quad = {});

}  // namespace nmqc
