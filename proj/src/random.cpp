#include "lpf/random.hpp"

#include <stdexcept>

namespace lpf {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
    if (bound == 0)
        throw std::invalid_argument("uniform_below: bound must be positive");
    // reject the low, non-divisible stub of the range: residues of the
    // accepted draws are exactly equidistributed
    const std::uint64_t reject_below = (-bound) % bound; // 2^64 mod bound
    std::uint64_t x = engine_();
    while (x < reject_below)
        x = engine_();
    return x % bound;
}

} // namespace lpf
