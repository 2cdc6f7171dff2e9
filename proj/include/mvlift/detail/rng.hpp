// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

namespace mvlift::detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Small deterministic RNG (SplitMix64 + Box-Muller). Bit-reproducible on
/// any platform, unlike the std <random> distributions.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (two uniforms per draw, no caching).
    double normal() {
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Independent substream keyed on the construction seed and `salt`;
    /// unaffected by how many draws were taken from this stream.
    Rng fork(std::uint64_t salt) const {
        std::uint64_t s = seed_ ^ (0x9E3779B97F4A7C15ull * (salt + 0x632BE59BD9B4E019ull));
        return Rng(splitmix64(s));
    }

  private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

}  // namespace mvlift::detail
