#pragma once

#include "lpf/particle_filter.hpp"

namespace lpf {

/// 1-D random walk observed in Gaussian noise:
///   x_t = x_{t-1} + N(0, transition_std^2),  y_t = x_t + N(0, observation_std^2).
/// The closed-form posterior (kalman_filter below) makes this the oracle
/// model for proper-weighting checks.
class LinearGaussianModel : public StateSpaceModel {
public:
    LinearGaussianModel(double transition_std, double observation_std, double init_state = 0.0,
                        double init_std = 0.0);

    std::size_t state_dim() const override { return 1; }
    std::size_t obs_dim() const override { return 1; }
    std::vector<double> initial_state() const override { return {init_state_}; }

    void transform(std::span<const double> u, std::span<const double> x_prev,
                   std::span<double> x_out) const override;
    using StateSpaceModel::log_likelihood;
    double log_likelihood(const PreparedObservation& y, std::span<const double> x) const override;
    void simulate_transition(std::span<const double> x, std::span<double> x_out,
                             Rng& rng) const override;
    void simulate_observation(std::span<const double> x, std::span<double> y_out,
                              Rng& rng) const override;

    double transition_std() const { return transition_std_; }
    double observation_std() const { return observation_std_; }
    double init_state() const { return init_state_; }
    double init_std() const { return init_std_; }

private:
    double transition_std_;
    double observation_std_;
    double init_state_;
    double init_std_; // 0 = filters start exactly at the known state
};

struct KalmanResult {
    std::vector<double> means;     // posterior mean after each update, t = 1..T
    std::vector<double> variances; // posterior variance after each update
};

/// Exact Gaussian filtering recursion for the linear model above, starting
/// from the prior N(init_state, init_std^2).
KalmanResult kalman_filter(std::span<const double> observations, const LinearGaussianModel& model);

} // namespace lpf
