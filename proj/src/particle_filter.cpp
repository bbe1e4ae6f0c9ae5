#include "lpf/particle_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lpf {

ParticleSet::ParticleSet(std::size_t n, std::size_t dim_)
    : dim(dim_), states(n * dim_, 0.0), weights(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0) {
    if (n < 1)
        throw std::invalid_argument("ParticleSet: need at least one particle");
    if (dim_ < 1)
        throw std::invalid_argument("ParticleSet: state dimension must be positive");
}

ParticleSet ParticleSet::filled(std::size_t n, std::span<const double> x0) {
    ParticleSet set(n, x0.size());
    for (std::size_t i = 0; i < n; ++i)
        std::copy(x0.begin(), x0.end(), set.state(i).begin());
    return set;
}

Resampling resampling_from_string(const std::string& s) {
    if (s == "multinomial")
        return Resampling::multinomial;
    if (s == "residual")
        return Resampling::residual;
    throw std::invalid_argument("unknown resampling scheme '" + s +
                                "' (expected multinomial or residual)");
}

Proposal proposal_from_string(const std::string& s) {
    if (s == "pf" || s == "pseudorandom")
        return Proposal::pseudorandom;
    if (s == "lpf" || s == "lattice")
        return Proposal::lattice;
    throw std::invalid_argument("unknown proposal scheme '" + s + "' (expected pf or lpf)");
}

std::string to_string(Resampling r) {
    return r == Resampling::multinomial ? "multinomial" : "residual";
}

std::string to_string(Proposal p) { return p == Proposal::pseudorandom ? "pf" : "lpf"; }

void FilterConfig::validate(std::size_t state_dim) const {
    if (n_particles < 1)
        throw std::invalid_argument("FilterConfig: n_particles must be at least 1");
    if (proposal == Proposal::lattice) {
        if (!generator && !n_in_generator_table(n_particles))
            throw std::invalid_argument(
                "FilterConfig: lattice proposals need n_particles to be a power of two with log2 n in [" +
                std::to_string(kMinTableLog2) + ", " + std::to_string(kMaxTableLog2) +
                "], or an explicit generator override");
        resolve_generator(state_dim); // validates the table lookup / override
    }
}

std::uint64_t FilterConfig::resolve_generator(std::size_t state_dim) const {
    if (generator) {
        // constructing the rule validates coprimality and range
        LatticeRule probe(n_particles, *generator, state_dim);
        return *generator;
    }
    return generator_for(n_particles, state_dim);
}

ParticleSet reweight(const ParticleSet& particles, const PreparedObservation& y,
                     const StateSpaceModel& model) {
    const std::size_t n = particles.size();
    ParticleSet out = particles;
    std::vector<double> ll(n);
    double max_ll = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        ll[i] = model.log_likelihood(y, particles.state(i));
        max_ll = std::max(max_ll, ll[i]);
    }
    if (!std::isfinite(max_ll))
        throw DegenerateWeightsError();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.weights[i] = std::exp(ll[i] - max_ll);
        sum += out.weights[i];
    }
    for (double& w : out.weights)
        w /= sum;
    return out;
}

ParticleSet reweight(const ParticleSet& particles, std::span<const double> y,
                     const StateSpaceModel& model) {
    return reweight(particles, model.prepare(y), model);
}

namespace {

// inclusive prefix sums; draws land in [0, total)
std::uint32_t pick_index(const std::vector<double>& cumulative, double u) {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
    return static_cast<std::uint32_t>(std::min(idx, cumulative.size() - 1));
}

} // namespace

std::vector<std::uint32_t> multinomial_resample(const ParticleSet& particles, Rng& rng) {
    const std::size_t n = particles.size();
    std::vector<double> cumulative(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += particles.weights[i];
        cumulative[i] = acc;
    }
    std::vector<std::uint32_t> indices(n);
    for (std::size_t i = 0; i < n; ++i)
        indices[i] = pick_index(cumulative, rng.uniform() * acc);
    return indices;
}

std::vector<std::uint32_t> residual_resample(const ParticleSet& particles, Rng& rng) {
    const std::size_t n = particles.size();
    std::vector<std::uint32_t> indices;
    indices.reserve(n);
    std::vector<double> residual(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double scaled = static_cast<double>(n) * particles.weights[j];
        const double copies = std::floor(scaled);
        residual[j] = scaled - copies;
        for (std::uint64_t c = 0; c < static_cast<std::uint64_t>(copies); ++c)
            indices.push_back(static_cast<std::uint32_t>(j));
    }
    if (indices.size() < n) {
        std::vector<double> cumulative(n);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            acc += residual[j];
            cumulative[j] = acc;
        }
        while (indices.size() < n)
            indices.push_back(pick_index(cumulative, rng.uniform() * acc));
    }
    return indices;
}

ParticleSet propagate(const ParticleSet& particles, std::span<const std::uint32_t> indices,
                      const std::vector<double>& points, const StateSpaceModel& model) {
    const std::size_t n = particles.size();
    const std::size_t s = model.state_dim();
    if (indices.size() != n || points.size() != n * s)
        throw std::invalid_argument("propagate: length mismatch");
    ParticleSet out(n, s);
    for (std::size_t i = 0; i < n; ++i)
        model.transform(std::span<const double>(points.data() + i * s, s),
                        particles.state(indices[i]), out.state(i));
    return out;
}

namespace {

ParticleSet step_core(const ParticleSet& particles, std::span<const double> y,
                      const StateSpaceModel& model, std::span<const std::uint32_t> indices,
                      const std::vector<double>& points) {
    ParticleSet propagated = propagate(particles, indices, points, model);
    return reweight(propagated, model.prepare(y), model);
}

std::vector<std::uint32_t> resample_indices(const ParticleSet& particles,
                                            const FilterConfig& config, Rng& rng) {
    return config.resampling == Resampling::multinomial ? multinomial_resample(particles, rng)
                                                        : residual_resample(particles, rng);
}

} // namespace

ParticleSet pf_step(const ParticleSet& particles, std::span<const double> y,
                    const StateSpaceModel& model, const FilterConfig& config, Rng& rng) {
    const std::size_t n = particles.size();
    const std::size_t s = model.state_dim();
    const auto indices = resample_indices(particles, config, rng);
    std::vector<double> points(n * s);
    for (double& p : points)
        p = rng.uniform();
    return step_core(particles, y, model, indices, points);
}

ParticleSet lpf_step(const ParticleSet& particles, std::span<const double> y,
                     const StateSpaceModel& model, const FilterConfig& config,
                     const LatticeRule& rule, Rng& rng) {
    const std::size_t n = particles.size();
    const std::size_t s = model.state_dim();
    if (rule.n != n)
        throw std::invalid_argument("lpf_step: rule sample count does not match particle count");
    if (rule.dims != s)
        throw std::invalid_argument("lpf_step: rule dimension does not match model state dimension");
    const auto indices = resample_indices(particles, config, rng);
    const LatticeRule step_rule = rule.with_shift(draw_shift(s, rng));
    const auto gamma = draw_permutation(n, rng);
    const auto mult = step_rule.coordinate_multipliers();
    std::vector<double> points(n * s);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < s; ++k) {
            const std::uint64_t r = (static_cast<std::uint64_t>(gamma[i]) * mult[k]) % step_rule.n;
            double c = static_cast<double>(r) * inv_n + step_rule.shift[k];
            if (c >= 1.0)
                c -= 1.0;
            points[i * s + k] = c;
        }
    }
    return step_core(particles, y, model, indices, points);
}

// Both averages are computed self-normalized and anchored at the first
// particle's value: anchor + sum w (v - anchor) / sum w. Anchoring removes
// cancellation for tightly clustered particles and makes two exactness
// properties hold bitwise: equal values average to themselves, and a 0/1
// indicator over the whole surviving support averages to exactly 1.
std::vector<double> estimate(const ParticleSet& particles,
                             const std::function<std::vector<double>(std::span<const double>)>& f) {
    const std::size_t n = particles.size();
    std::vector<double> anchor = f(particles.state(0));
    std::vector<double> num(anchor.size(), 0.0);
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> fx = i == 0 ? anchor : f(particles.state(i));
        if (fx.size() != anchor.size())
            throw std::invalid_argument("estimate: f returned inconsistent dimensions");
        const double w = particles.weights[i];
        for (std::size_t k = 0; k < fx.size(); ++k)
            num[k] += w * (fx[k] - anchor[k]);
        den += w;
    }
    for (std::size_t k = 0; k < num.size(); ++k)
        num[k] = anchor[k] + num[k] / den;
    return num;
}

std::vector<double> weighted_mean(const ParticleSet& particles) {
    const auto anchor = particles.state(0);
    std::vector<double> num(particles.dim, 0.0);
    double den = 0.0;
    for (std::size_t i = 0; i < particles.size(); ++i) {
        const double w = particles.weights[i];
        const auto x = particles.state(i);
        for (std::size_t k = 0; k < particles.dim; ++k)
            num[k] += w * (x[k] - anchor[k]);
        den += w;
    }
    for (std::size_t k = 0; k < num.size(); ++k)
        num[k] = anchor[k] + num[k] / den;
    return num;
}

Filter::Filter(const StateSpaceModel& model, FilterConfig config)
    : Filter(model, std::move(config), std::vector<double>(model.initial_state())) {}

Filter::Filter(const StateSpaceModel& model, FilterConfig config, std::span<const double> x0)
    : model_(model), config_(std::move(config)), rng_(config_.seed) {
    config_.validate(model.state_dim());
    if (x0.size() != model.state_dim())
        throw std::invalid_argument("Filter: initial state dimension mismatch");
    if (config_.proposal == Proposal::lattice)
        base_rule_.emplace(config_.n_particles, config_.resolve_generator(model.state_dim()),
                           model.state_dim());
    particles_ = ParticleSet::filled(config_.n_particles, x0);
}

const LatticeRule& Filter::rule() const {
    if (!base_rule_)
        throw std::logic_error("Filter: no lattice rule for pseudorandom proposals");
    return *base_rule_;
}

const ParticleSet& Filter::step(std::span<const double> y) {
    ++t_;
    try {
        particles_ = config_.proposal == Proposal::lattice
                         ? lpf_step(particles_, y, model_, config_, *base_rule_, rng_)
                         : pf_step(particles_, y, model_, config_, rng_);
    } catch (const DegenerateWeightsError&) {
        throw DegenerateWeightsError(t_);
    }
    return particles_;
}

const ParticleSet& Filter::step_with_points(std::span<const double> y,
                                            const std::vector<double>& points) {
    ++t_;
    const auto indices = resample_indices(particles_, config_, rng_);
    try {
        particles_ = step_core(particles_, y, model_, indices, points);
    } catch (const DegenerateWeightsError&) {
        throw DegenerateWeightsError(t_);
    }
    return particles_;
}

} // namespace lpf
