#include <cmath>

#include <benchmark/benchmark.h>

#include "nmqc/control.hpp"
#include "nmqc/ensemble.hpp"
#include "nmqc/kernels.hpp"
#include "nmqc/sde.hpp"

using namespace nmqc;

namespace {

const BlochState kReferenceState{std::sqrt(2.0) / 4.0, std::sqrt(2.0) / 4.0, std::sqrt(3.0) / 2.0};

void bm_diffusion_coefficient(benchmark::State& state) {
    ReservoirParams p;
    p.omega_c = 0.1;
    const double t = static_cast<double>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(diffusion_coefficient(t, p));
    }
}
BENCHMARK(bm_diffusion_coefficient)->Arg(1)->Arg(10)->Arg(30);

void bm_coefficient_table(benchmark::State& state) {
    const ReservoirParams p;
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_coefficient_table(p, 15.0, 0.01));
    }
}
BENCHMARK(bm_coefficient_table)->Unit(benchmark::kMillisecond);

void bm_em_step(benchmark::State& state) {
    const ReservoirParams p;
    const auto table = build_coefficient_table(p, 2.0, 0.01);
    BlochState s = kReferenceState;
    double t = 0.0;
    for (auto _ : state) {
        s = em_step(s, t, 1e-3, {0.1, -0.1}, 0.01, table, p, RateMode::non_markovian).state;
        t = t < 1.5 ? t + 1e-3 : 0.0;
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(bm_em_step);

void bm_forward_backward_sweep(benchmark::State& state) {
    const ReservoirParams p;
    const OCConfig oc;
    const auto table = build_coefficient_table(p, oc.t_max, 0.01);
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward_backward_sweep(p, table, kReferenceState, oc));
    }
}
BENCHMARK(bm_forward_backward_sweep)->Unit(benchmark::kMillisecond);

void bm_ensemble(benchmark::State& state) {
    const ReservoirParams p;
    const auto table = build_coefficient_table(p, 5.0, 0.01);
    const IntegratorConfig cfg{.dt = 1e-3, .t_max = 5.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_ensemble(p, table, cfg, zero_policy(), RateMode::non_markovian, kReferenceState,
                                              static_cast<std::size_t>(state.range(0))));
    }
}
BENCHMARK(bm_ensemble)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
