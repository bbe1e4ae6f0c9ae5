#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpf/lattice.hpp"
#include "lpf/random.hpp"

namespace lpf {

/// Raised when every particle has zero likelihood (total loss of track).
class DegenerateWeightsError : public std::runtime_error {
public:
    explicit DegenerateWeightsError(long time_step = -1)
        : std::runtime_error("degenerate weights: all particle likelihoods are zero" +
                             (time_step >= 0 ? " at step " + std::to_string(time_step) : std::string())),
          time_step_(time_step) {}

    long time_step() const { return time_step_; }

private:
    long time_step_;
};

/// n weighted states, row-major, weights normalized to sum 1.
struct ParticleSet {
    std::size_t dim = 0;
    std::vector<double> states;  // n x dim
    std::vector<double> weights; // n

    ParticleSet() = default;
    ParticleSet(std::size_t n, std::size_t dim);

    /// Every particle at x0, uniform weights.
    static ParticleSet filled(std::size_t n, std::span<const double> x0);

    std::size_t size() const { return weights.size(); }
    std::span<double> state(std::size_t i) { return {states.data() + i * dim, dim}; }
    std::span<const double> state(std::size_t i) const { return {states.data() + i * dim, dim}; }
};

/// An observation plus whatever per-observation value the model wants to
/// reuse across the n likelihood evaluations of one step.
struct PreparedObservation {
    std::span<const double> y;
    double cache = 0.0;
};

/// Transition transform, likelihood and simulators for one state-space model.
/// transform() maps a uniform vector onto a sample of the model transition
/// density; simulate_transition() follows the data-generating dynamics, which
/// deliberately differ for the misspecified trackers.
class StateSpaceModel {
public:
    virtual ~StateSpaceModel() = default;

    virtual std::size_t state_dim() const = 0;
    virtual std::size_t obs_dim() const = 0;
    virtual std::vector<double> initial_state() const = 0;

    virtual void transform(std::span<const double> u, std::span<const double> x_prev,
                           std::span<double> x_out) const = 0;
    virtual double log_likelihood(const PreparedObservation& y, std::span<const double> x) const = 0;

    /// Per-observation precomputation shared by the n per-step likelihood
    /// calls. Default: passthrough.
    virtual PreparedObservation prepare(std::span<const double> y) const { return {y, 0.0}; }

    virtual void simulate_transition(std::span<const double> x, std::span<double> x_out,
                                     Rng& rng) const = 0;
    virtual void simulate_observation(std::span<const double> x, std::span<double> y_out,
                                      Rng& rng) const = 0;

    /// Whether a simulated ground-truth state is acceptable (models with a
    /// bounded scene reject trajectories that leave it).
    virtual bool state_in_bounds(std::span<const double>) const { return true; }

    double log_likelihood(std::span<const double> y, std::span<const double> x) const {
        return log_likelihood(prepare(y), x);
    }
};

enum class Resampling { multinomial, residual };
enum class Proposal { pseudorandom, lattice };

Resampling resampling_from_string(const std::string& s);
Proposal proposal_from_string(const std::string& s);
std::string to_string(Resampling r);
std::string to_string(Proposal p);

struct FilterConfig {
    std::size_t n_particles = 0;
    Resampling resampling = Resampling::multinomial;
    Proposal proposal = Proposal::pseudorandom;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> generator; // lattice generator override

    /// Lattice proposals without a generator override need n_particles in the
    /// tabulated range; with an override any n coprime with the generator is
    /// accepted. Throws std::invalid_argument.
    void validate(std::size_t state_dim) const;

    /// The generator this configuration resolves to (override or table).
    std::uint64_t resolve_generator(std::size_t state_dim) const;
};

/// Normalized weights proportional to exp(log_likelihood), computed with
/// max-log subtraction. Throws DegenerateWeightsError when every
/// log-likelihood is -inf.
ParticleSet reweight(const ParticleSet& particles, const PreparedObservation& y,
                     const StateSpaceModel& model);
ParticleSet reweight(const ParticleSet& particles, std::span<const double> y,
                     const StateSpaceModel& model);

/// n i.i.d. ancestor indices, P(a(i) = j) = w_j. One uniform draw per index.
std::vector<std::uint32_t> multinomial_resample(const ParticleSet& particles, Rng& rng);

/// floor(n w_j) deterministic copies of index j (ascending j), then the
/// remaining slots drawn multinomially from the fractional remainders.
std::vector<std::uint32_t> residual_resample(const ParticleSet& particles, Rng& rng);

/// x_out[i] = transform(points row i, states[indices[i]]); weights reset to
/// 1/n pending reweight.
ParticleSet propagate(const ParticleSet& particles, std::span<const std::uint32_t> indices,
                      const std::vector<double>& points, const StateSpaceModel& model);

/// One bootstrap-filter step: resample, propagate with n fresh pseudorandom
/// uniform vectors (row-major draw order), reweight.
ParticleSet pf_step(const ParticleSet& particles, std::span<const double> y,
                    const StateSpaceModel& model, const FilterConfig& config, Rng& rng);

/// Identical to pf_step except the n uniform vectors are the shifted Korobov
/// points of `rule`, assigned through a fresh uniform permutation. Draw order
/// at each step: resampling, then the shift (dims draws), then the
/// permutation. rule.shift is ignored; a fresh one is drawn per call.
ParticleSet lpf_step(const ParticleSet& particles, std::span<const double> y,
                     const StateSpaceModel& model, const FilterConfig& config,
                     const LatticeRule& rule, Rng& rng);

/// Self-normalized weighted average of f over the particle set. The
/// denominator re-sums the weights so indicator estimates over the full
/// support come out exactly 1.
std::vector<double> estimate(const ParticleSet& particles,
                             const std::function<std::vector<double>(std::span<const double>)>& f);

/// estimate() with f = identity, without the per-particle allocation.
std::vector<double> weighted_mean(const ParticleSet& particles);

/// Sequential filter runner: owns the RNG, the particle set and the time
/// counter. Particles start at the model's initial state (or an explicit one)
/// with uniform weights; each step() consumes one observation.
class Filter {
public:
    Filter(const StateSpaceModel& model, FilterConfig config);
    Filter(const StateSpaceModel& model, FilterConfig config, std::span<const double> x0);

    const ParticleSet& step(std::span<const double> y);

    /// Engine core with the proposal points supplied by the caller
    /// (n x state_dim, row-major). Resamples, propagates, reweights.
    const ParticleSet& step_with_points(std::span<const double> y, const std::vector<double>& points);

    const ParticleSet& particles() const { return particles_; }
    long time() const { return t_; }
    const FilterConfig& config() const { return config_; }

    /// The shift-free base rule (lattice proposals only).
    const LatticeRule& rule() const;

private:
    const StateSpaceModel& model_;
    FilterConfig config_;
    Rng rng_;
    std::optional<LatticeRule> base_rule_;
    ParticleSet particles_;
    long t_ = 0;
};

} // namespace lpf
