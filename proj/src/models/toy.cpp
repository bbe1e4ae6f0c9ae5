#include "lpf/models/toy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lpf {

double ToyBinaryModel::log_likelihood(const PreparedObservation& y,
                                      std::span<const double> x) const {
    const bool triggered = x[0] < threshold_;
    const bool observed = y.y[0] > 0.5;
    return triggered == observed ? 0.0 : -std::numeric_limits<double>::infinity();
}

double toy_loss_probability(std::size_t k, std::size_t n, double p) {
    if (k < 1 || n < 1)
        throw std::invalid_argument("toy_loss_probability: k and n must be at least 1");
    if (!(p > 0.0) || p > 1.0)
        throw std::invalid_argument("toy_loss_probability: p must lie in (0, 1]");
    const double miss_all = std::pow(1.0 - p, static_cast<double>(n));
    return 1.0 - std::pow(1.0 - miss_all, static_cast<double>(k));
}

} // namespace lpf
