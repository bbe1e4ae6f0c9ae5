#include "lpf/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lpf {

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z * 0.7071067811865475244);
}

namespace {

// Acklam's rational approximation to the normal quantile (~1.15e-9
// relative accuracy before refinement).
double inv_normal_approx(double u) {
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double u_low = 0.02425;

    if (u < u_low) {
        const double q = std::sqrt(-2.0 * std::log(u));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (u > 1.0 - u_low) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - u));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = u - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

} // namespace

double inv_normal_cdf(double u) {
    if (!(u > 0.0) || !(u < 1.0))
        throw std::domain_error("inv_normal_cdf: argument must lie in (0, 1)");
    double z = inv_normal_approx(u);
    // one Halley step against the erfc CDF
    const double e = normal_cdf(z) - u;
    const double v = e * 2.506628274631000502 * std::exp(0.5 * z * z);
    z -= v / (1.0 + 0.5 * z * v);
    return z;
}

void gaussian_step(std::span<const double> u, std::span<const double> x_prev,
                   std::span<const double> sigma, std::span<double> out) {
    if (u.size() != x_prev.size() || u.size() != sigma.size() || u.size() != out.size())
        throw std::invalid_argument("gaussian_step: dimension mismatch");
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!(sigma[k] > 0.0))
            throw std::invalid_argument("gaussian_step: sigma must be positive");
        const double uk = std::clamp(u[k], kUniformClamp, 1.0 - kUniformClamp);
        out[k] = x_prev[k] + sigma[k] * inv_normal_cdf(uk);
    }
}

std::vector<double> gaussian_step(const std::vector<double>& u,
                                  const std::vector<double>& x_prev,
                                  const std::vector<double>& sigma) {
    std::vector<double> out(u.size());
    gaussian_step(std::span<const double>(u), std::span<const double>(x_prev),
                  std::span<const double>(sigma), std::span<double>(out));
    return out;
}

double standard_normal(Rng& rng) {
    return inv_normal_cdf(std::clamp(rng.uniform(), kUniformClamp, 1.0 - kUniformClamp));
}

} // namespace lpf
