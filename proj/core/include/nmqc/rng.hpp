// rng.hpp: counter-based Gaussian noise (Philox4x32-10 + Box-Muller)
//
// Every variate is a pure function of (key, counter), so a trajectory's Wiener increments depend
// only on (master_seed, trajectory_index, step, attempt) and never on scheduling.

#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace nmqc {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

// Ten-round Philox 4x32 bijection (Salmon et al., SC'11 constants).
Philox4x32Counter philox4x32(Philox4x32Counter ctr, Philox4x32Key key) noexcept;

// SplitMix64 finalizer, used to derive independent seeds for named sub-streams.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

class NoiseStream {
public:
    NoiseStream(std::uint64_t master_seed, std::uint64_t trajectory_index) noexcept;

    // Standard normal variate for (step, attempt). attempt > 0 is used when a step is rejected
    // and redrawn; attempt must be < 256.
    double normal(std::uint64_t step, std::uint32_t attempt = 0) const noexcept;

    // Uniform in (0, 1), 53-bit resolution, for the same counter layout.
    std::array<double, 2> uniforms(std::uint64_t step, std::uint32_t attempt = 0) const noexcept;

private:
    Philox4x32Key key_;
    std::uint64_t trajectory_;
};

// n independent N(0, dt) increments for the given sub-stream.
std::vector<double> wiener_increments(std::size_t n, double dt, std::uint64_t master_seed,
                                      std::uint64_t trajectory_index);

// Seed of a named branch (e.g. the controlled/uncontrolled/Markovian ensembles of one comparison).
std::uint64_t branch_seed(std::uint64_t master_seed, std::uint64_t branch) noexcept;

}  // namespace nmqc
