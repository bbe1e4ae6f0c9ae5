#include "lpf/models/lingauss.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lpf/transforms.hpp"

namespace lpf {

LinearGaussianModel::LinearGaussianModel(double transition_std, double observation_std,
                                         double init_state, double init_std)
    : transition_std_(transition_std), observation_std_(observation_std), init_state_(init_state),
      init_std_(init_std) {
    if (transition_std_ < 0.0 || observation_std_ < 0.0 || init_std_ < 0.0)
        throw std::invalid_argument("LinearGaussianModel: standard deviations must be nonnegative");
}

void LinearGaussianModel::transform(std::span<const double> u, std::span<const double> x_prev,
                                    std::span<double> x_out) const {
    if (transition_std_ == 0.0) {
        x_out[0] = x_prev[0];
        return;
    }
    const double sigma[1] = {transition_std_};
    gaussian_step(u, x_prev, sigma, x_out);
}

double LinearGaussianModel::log_likelihood(const PreparedObservation& y,
                                           std::span<const double> x) const {
    const double d = y.y[0] - x[0];
    if (observation_std_ == 0.0)
        return d == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return -d * d / (2.0 * observation_std_ * observation_std_);
}

void LinearGaussianModel::simulate_transition(std::span<const double> x, std::span<double> x_out,
                                              Rng& rng) const {
    x_out[0] = transition_std_ == 0.0 ? x[0] : x[0] + transition_std_ * standard_normal(rng);
}

void LinearGaussianModel::simulate_observation(std::span<const double> x, std::span<double> y_out,
                                               Rng& rng) const {
    y_out[0] = observation_std_ == 0.0 ? x[0] : x[0] + observation_std_ * standard_normal(rng);
}

KalmanResult kalman_filter(std::span<const double> observations, const LinearGaussianModel& model) {
    KalmanResult result;
    result.means.reserve(observations.size());
    result.variances.reserve(observations.size());
    double m = model.init_state();
    double v = model.init_std() * model.init_std();
    const double q = model.transition_std() * model.transition_std();
    const double r = model.observation_std() * model.observation_std();
    for (double y : observations) {
        const double v_pred = v + q;
        const double gain = v_pred + r > 0.0 ? v_pred / (v_pred + r) : 0.0;
        m += gain * (y - m);
        v = (1.0 - gain) * v_pred;
        result.means.push_back(m);
        result.variances.push_back(v);
    }
    return result;
}

} // namespace lpf
