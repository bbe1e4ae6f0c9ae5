#pragma once

#include <cstdint>
#include <random>

namespace lpf {

// splitmix64 finalizer; mixes a base seed with a stream tag so trials,
// simulators and filters get unrelated engine states from one user seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

// Uniform random source. All randomness in the library flows through this
// wrapper so the number of engine draws per operation is fixed and runs are
// bit-reproducible given a seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // One engine draw -> double in [0,1) with 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, bound). Rejection sampling from the top of the
    // 64-bit range; consumes at least one draw.
    std::uint64_t uniform_below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
};

} // namespace lpf
