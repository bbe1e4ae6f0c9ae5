#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lpf/random.hpp"

namespace lpf {

/// A shifted Korobov rule: point i (zero-based) is
///   ((i / n) * (1, a, a^2, ..., a^{s-1}) + shift) mod 1.
///
/// The generator must be coprime with n so that every one-dimensional
/// projection of the n points has n distinct values. Coordinates are kept as
/// exact integer residues internally; the only rounding is the final division
/// by n and the shift addition.
struct LatticeRule {
    std::uint64_t n = 0;
    std::uint64_t generator = 0;
    std::size_t dims = 0;
    std::vector<double> shift; // size dims, each in [0,1)

    /// Validates n >= 1, generator in [1, n-1] (or 1 when n == 1),
    /// gcd(generator, n) == 1 and the shift range. An empty shift means the
    /// zero shift.
    LatticeRule(std::uint64_t n, std::uint64_t generator, std::size_t dims,
                std::vector<double> shift = {});

    /// a^k mod n for k = 0..dims-1, reduced at every step so no power
    /// overflows even for n = 2^21 and dims = 32.
    std::vector<std::uint64_t> coordinate_multipliers() const;

    LatticeRule with_shift(std::vector<double> new_shift) const;
};

struct GeneratorTableEntry {
    unsigned log2_n;
    std::uint64_t a_low;  // state dimension <= 8
    std::uint64_t a_high; // state dimension 9..32
};

/// The tabulated Korobov generators, one row per log2 n in [4, 21].
std::span<const GeneratorTableEntry> generator_table();

inline constexpr unsigned kMinTableLog2 = 4;
inline constexpr unsigned kMaxTableLog2 = 21;
inline constexpr std::size_t kMaxTableDims = 32;

/// True when n is one of the tabulated sample counts (a power of two with
/// log2 n in [4, 21]).
bool n_in_generator_table(std::uint64_t n);

/// Looks up the tabulated generator for a sample count and state dimension.
/// Throws std::out_of_range, naming the valid bounds, when n is not a
/// tabulated power of two or state_dim exceeds 32.
std::uint64_t generator_for(std::uint64_t n, std::size_t state_dim);

/// All n points of the rule, row-major (n x dims).
std::vector<double> korobov_points(const LatticeRule& rule);

/// Independent uniform shift over [0,1)^dims; consumes exactly dims draws.
std::vector<double> draw_shift(std::size_t dims, Rng& rng);

/// Uniform random permutation of {0, ..., n-1} (Fisher-Yates, one
/// uniform_below draw per swap).
std::vector<std::uint32_t> draw_permutation(std::size_t n, Rng& rng);

/// Per-time-step point assignment: perms[t][i] is the zero-based lattice
/// index driving particle i at step t. Permutations at distinct steps are
/// drawn independently.
struct PermutationSchedule {
    std::size_t n = 0;
    std::vector<std::vector<std::uint32_t>> perms;

    static PermutationSchedule draw(std::size_t n, std::size_t steps, Rng& rng);
};

/// The uniform vector assigned to particle i at step t:
///   ((perms[t][i] / n) * (1, a, ..., a^{s-1}) + rule.shift) mod 1.
/// The caller supplies the rule already carrying the step-t shift. Across i
/// at fixed t this reproduces korobov_points(rule) as a set.
std::vector<double> lpf_point(std::size_t t, std::size_t i, const LatticeRule& rule,
                              const PermutationSchedule& schedule);

} // namespace lpf
