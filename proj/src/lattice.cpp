#include "lpf/lattice.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace lpf {

LatticeRule::LatticeRule(std::uint64_t n_, std::uint64_t generator_, std::size_t dims_,
                         std::vector<double> shift_)
    : n(n_), generator(generator_), dims(dims_), shift(std::move(shift_)) {
    if (n < 1)
        throw std::invalid_argument("LatticeRule: n must be at least 1");
    if (dims < 1)
        throw std::invalid_argument("LatticeRule: dims must be at least 1");
    const std::uint64_t max_gen = n > 1 ? n - 1 : 1;
    if (generator < 1 || generator > max_gen)
        throw std::invalid_argument("LatticeRule: generator must lie in [1, n-1]");
    if (std::gcd(generator, n) != 1)
        throw std::invalid_argument("LatticeRule: generator must be coprime with n");
    if (shift.empty()) {
        shift.assign(dims, 0.0);
    } else if (shift.size() != dims) {
        throw std::invalid_argument("LatticeRule: shift dimension mismatch");
    }
    for (double s : shift)
        if (!(s >= 0.0) || !(s < 1.0))
            throw std::invalid_argument("LatticeRule: shift components must lie in [0,1)");
}

std::vector<std::uint64_t> LatticeRule::coordinate_multipliers() const {
    std::vector<std::uint64_t> mult(dims);
    std::uint64_t m = 1 % n;
    for (std::size_t k = 0; k < dims; ++k) {
        mult[k] = m;
        m = (m * (generator % n)) % n;
    }
    return mult;
}

LatticeRule LatticeRule::with_shift(std::vector<double> new_shift) const {
    return LatticeRule(n, generator, dims, std::move(new_shift));
}

namespace {

constexpr std::array<GeneratorTableEntry, 18> kGeneratorTable = {{
    {4, 3, 3},
    {5, 5, 5},
    {6, 11, 5},
    {7, 13, 11},
    {8, 25, 75},
    {9, 55, 51},
    {10, 43, 139},
    {11, 259, 519},
    {12, 307, 1081},
    {13, 699, 1289},
    {14, 2087, 2961},
    {15, 7243, 2149},
    {16, 11035, 21553},
    {17, 27891, 27383},
    {18, 18373, 3597},
    {19, 21643, 120079},
    {20, 201579, 172565},
    {21, 431119, 232501},
}};

} // namespace

std::span<const GeneratorTableEntry> generator_table() { return kGeneratorTable; }

bool n_in_generator_table(std::uint64_t n) {
    if (n == 0 || !std::has_single_bit(n))
        return false;
    const unsigned lg = static_cast<unsigned>(std::countr_zero(n));
    return lg >= kMinTableLog2 && lg <= kMaxTableLog2;
}

std::uint64_t generator_for(std::uint64_t n, std::size_t state_dim) {
    if (!n_in_generator_table(n))
        throw std::out_of_range("generator_for: n=" + std::to_string(n) +
                                " is not a tabulated sample count (powers of two with log2 n in [" +
                                std::to_string(kMinTableLog2) + ", " + std::to_string(kMaxTableLog2) +
                                "])");
    if (state_dim < 1 || state_dim > kMaxTableDims)
        throw std::out_of_range("generator_for: state_dim=" + std::to_string(state_dim) +
                                " outside the tabulated range [1, " +
                                std::to_string(kMaxTableDims) + "]");
    const unsigned lg = static_cast<unsigned>(std::countr_zero(n));
    const GeneratorTableEntry& row = kGeneratorTable[lg - kMinTableLog2];
    return state_dim <= 8 ? row.a_low : row.a_high;
}

std::vector<double> korobov_points(const LatticeRule& rule) {
    const auto mult = rule.coordinate_multipliers();
    std::vector<double> pts(rule.n * rule.dims);
    const double inv_n = 1.0 / static_cast<double>(rule.n);
    for (std::uint64_t i = 0; i < rule.n; ++i) {
        for (std::size_t k = 0; k < rule.dims; ++k) {
            // residues stay below n^2 <= 2^42, exact in a double
            const std::uint64_t r = (i * mult[k]) % rule.n;
            double c = static_cast<double>(r) * inv_n + rule.shift[k];
            if (c >= 1.0)
                c -= 1.0;
            pts[i * rule.dims + k] = c;
        }
    }
    return pts;
}

std::vector<double> draw_shift(std::size_t dims, Rng& rng) {
    if (dims < 1)
        throw std::invalid_argument("draw_shift: dims must be at least 1");
    std::vector<double> shift(dims);
    for (double& s : shift)
        s = rng.uniform();
    return shift;
}

std::vector<std::uint32_t> draw_permutation(std::size_t n, Rng& rng) {
    if (n < 1)
        throw std::invalid_argument("draw_permutation: n must be at least 1");
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.uniform_below(i + 1));
        std::swap(perm[i], perm[j]);
    }
    return perm;
}

PermutationSchedule PermutationSchedule::draw(std::size_t n, std::size_t steps, Rng& rng) {
    PermutationSchedule schedule;
    schedule.n = n;
    schedule.perms.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t)
        schedule.perms.push_back(draw_permutation(n, rng));
    return schedule;
}

std::vector<double> lpf_point(std::size_t t, std::size_t i, const LatticeRule& rule,
                              const PermutationSchedule& schedule) {
    if (t >= schedule.perms.size())
        throw std::out_of_range("lpf_point: time index out of range");
    if (i >= rule.n || i >= schedule.n)
        throw std::out_of_range("lpf_point: particle index out of range");
    if (schedule.n != rule.n)
        throw std::invalid_argument("lpf_point: schedule and rule disagree on n");
    const std::uint64_t gamma = schedule.perms[t][i];
    const auto mult = rule.coordinate_multipliers();
    std::vector<double> point(rule.dims);
    const double inv_n = 1.0 / static_cast<double>(rule.n);
    for (std::size_t k = 0; k < rule.dims; ++k) {
        const std::uint64_t r = (gamma * mult[k]) % rule.n;
        double c = static_cast<double>(r) * inv_n + rule.shift[k];
        if (c >= 1.0)
            c -= 1.0;
        point[k] = c;
    }
    return point;
}

} // namespace lpf
