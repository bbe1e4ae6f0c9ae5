#pragma once

#include "lpf/particle_filter.hpp"

namespace lpf {

/// 1-D binary-observation model: the transition is uniform on [0,1)
/// regardless of the previous state, and the observation is 1 exactly when
/// the state lies in [0, threshold). The data-generating truth stays inside
/// the triggering region, so the simulated observation sequence is constant 1
/// and loss of track is the event that no particle lands in the region.
class ToyBinaryModel : public StateSpaceModel {
public:
    explicit ToyBinaryModel(double threshold = 0.2) : threshold_(threshold) {}

    std::size_t state_dim() const override { return 1; }
    std::size_t obs_dim() const override { return 1; }
    std::vector<double> initial_state() const override { return {0.5 * threshold_}; }

    void transform(std::span<const double> u, std::span<const double>,
                   std::span<double> x_out) const override {
        x_out[0] = u[0];
    }

    using StateSpaceModel::log_likelihood;
    double log_likelihood(const PreparedObservation& y, std::span<const double> x) const override;

    void simulate_transition(std::span<const double>, std::span<double> x_out,
                             Rng& rng) const override {
        x_out[0] = threshold_ * rng.uniform();
    }

    void simulate_observation(std::span<const double> x, std::span<double> y_out,
                              Rng&) const override {
        y_out[0] = x[0] < threshold_ ? 1.0 : 0.0;
    }

    double threshold() const { return threshold_; }

private:
    double threshold_;
};

/// Probability that over k steps of an n-particle bootstrap filter on the
/// binary model at least one step has no particle in the triggering region of
/// coverage probability p: 1 - (1 - (1-p)^n)^k.
double toy_loss_probability(std::size_t k, std::size_t n, double p);

} // namespace lpf
