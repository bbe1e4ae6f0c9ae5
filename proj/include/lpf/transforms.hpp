#pragma once

#include <span>
#include <vector>

#include "lpf/random.hpp"

namespace lpf {

/// Standard normal CDF, Phi(z) = 0.5 * erfc(-z / sqrt(2)).
double normal_cdf(double z);

/// Standard normal quantile. Rational approximation refined by one Halley
/// step against the erfc-based CDF; |Phi(result) - u| < 1e-9 over (0,1).
/// Throws std::domain_error for u <= 0 or u >= 1.
double inv_normal_cdf(double u);

// Uniform coordinates this close to 0 or 1 are pulled inside the open
// interval before inversion, so deterministic zero-shift lattice points do
// not hit the quantile singularity.
inline constexpr double kUniformClamp = 1e-12;

/// One Gaussian random-walk step driven by a uniform vector:
/// out[k] = x_prev[k] + sigma[k] * inv_normal_cdf(u[k]).
void gaussian_step(std::span<const double> u, std::span<const double> x_prev,
                   std::span<const double> sigma, std::span<double> out);

std::vector<double> gaussian_step(const std::vector<double>& u,
                                  const std::vector<double>& x_prev,
                                  const std::vector<double>& sigma);

/// One standard normal variate from one uniform draw (inverse-CDF method,
/// input clamped away from the interval endpoints).
double standard_normal(Rng& rng);

} // namespace lpf
