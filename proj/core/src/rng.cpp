#include "nmqc/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nmqc/errors.hpp"

namespace nmqc {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// (hi << 21 | lo >> 11) scaled into (0, 1): never exactly 0 or 1
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) | (lo >> 11);
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32Counter philox4x32(Philox4x32Counter ctr, Philox4x32Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

NoiseStream::NoiseStream(std::uint64_t master_seed, std::uint64_t trajectory_index) noexcept
    : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
      trajectory_(trajectory_index) {}

std::array<double, 2> NoiseStream::uniforms(std::uint64_t step, std::uint32_t attempt) const noexcept {
    // counter = (step lo, step hi | attempt << 24, trajectory lo, trajectory hi)
    const Philox4x32Counter ctr{static_cast<std::uint32_t>(step),
                                static_cast<std::uint32_t>(step >> 32) | (attempt << 24),
                                static_cast<std::uint32_t>(trajectory_),
                                static_cast<std::uint32_t>(trajectory_ >> 32)};
    const auto r = philox4x32(ctr, key_);
    return {to_open_unit(r[0], r[1]), to_open_unit(r[2], r[3])};
}

double NoiseStream::normal(std::uint64_t step, std::uint32_t attempt) const noexcept {
    const auto u = uniforms(step, attempt);
    return std::sqrt(-2.0 * std::log(u[0])) * std::cos(2.0 * std::numbers::pi * u[1]);
}

std::vector<double> wiener_increments(std::size_t n, double dt, std::uint64_t master_seed,
                                      std::uint64_t trajectory_index) {
    if (!(dt > 0.0)) {
        throw DomainError("wiener_increments: dt must be > 0");
    }
    const NoiseStream stream(master_seed, trajectory_index);
    const double scale = std::sqrt(dt);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = scale * stream.normal(k);
    }
    return out;
}

std::uint64_t branch_seed(std::uint64_t master_seed, std::uint64_t branch) noexcept {
    return splitmix64(master_seed ^ splitmix64(branch + 0x5851F42D4C957F2Dull));
}

}  // namespace nmqc
