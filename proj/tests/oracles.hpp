// Test-only reference implementations, independent of the library's own
// numerical paths.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracle {

// erf via Taylor series for small |x| and a Lentz continued fraction for the
// complementary function at large |x|; accurate to ~1e-16 over the range the
// tests use. Deliberately avoids std::erf / std::erfc.
inline double erf_series(double x) {
    const double ax = std::fabs(x);
    constexpr double two_over_sqrt_pi = 1.1283791670955125739;
    if (ax < 3.0) {
        // sum_{n} (-1)^n x^(2n+1) / (n! (2n+1))
        double term = x;
        double sum = x;
        const double x2 = x * x;
        for (int n = 1; n < 200; ++n) {
            term *= -x2 / n;
            const double add = term / (2 * n + 1);
            sum += add;
            if (std::fabs(add) < 1e-20 * std::fabs(sum))
                break;
        }
        return two_over_sqrt_pi * sum;
    }
    // erfc(ax) = exp(-ax^2)/(ax sqrt(pi)) * K, K from the continued fraction
    // 1/(1+ q/(1+ 2q/(1+ 3q/(1+ ...)))) with q = 1/(2 ax^2), evaluated by
    // backward recurrence
    const double q = 0.5 / (ax * ax);
    double f = 1.0;
    for (int n = 120; n >= 1; --n)
        f = 1.0 + n * q / f;
    const double k = 1.0 / f;
    const double erfc_ax = std::exp(-ax * ax) / (ax * 1.7724538509055160273) * k;
    const double erf_ax = 1.0 - erfc_ax;
    return x > 0 ? erf_ax : -erf_ax;
}

inline double normal_cdf(double z) { return 0.5 * (1.0 + erf_series(z * 0.70710678118654752440)); }

// Quantile by bisection against normal_cdf above.
inline double inv_normal_bisect(double u) {
    double lo = -40.0, hi = 40.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (normal_cdf(mid) < u)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-13)
            break;
    }
    return 0.5 * (lo + hi);
}

// Exact-to-quadrature Bayesian recursion for the 1-D linear-Gaussian model on
// a per-step adaptive grid; an independent numerical route to the Kalman
// moments.
struct GridMoments {
    std::vector<double> means;
    std::vector<double> variances;
};

inline GridMoments grid_bayes_1d(std::span<const double> observations, double init_mean,
                                 double init_std, double trans_std, double obs_std,
                                 std::size_t grid_points = 2001, double half_width_sigmas = 10.0) {
    GridMoments result;
    const double q = trans_std, r = obs_std;

    // current posterior as samples on a uniform grid
    std::vector<double> xs, ps;
    double mean = init_mean;
    double sd = std::max(init_std, 1e-12);

    const auto rebuild = [&](double center, double spread, const auto& density) {
        xs.resize(grid_points);
        ps.resize(grid_points);
        const double lo = center - half_width_sigmas * spread;
        const double hi = center + half_width_sigmas * spread;
        const double dx = (hi - lo) / static_cast<double>(grid_points - 1);
        for (std::size_t j = 0; j < grid_points; ++j) {
            xs[j] = lo + dx * static_cast<double>(j);
            ps[j] = density(xs[j]);
        }
    };

    const auto gauss = [](double x, double m, double s) {
        const double z = (x - m) / s;
        return std::exp(-0.5 * z * z) / (s * 2.5066282746310005024);
    };

    rebuild(mean, sd, [&](double x) { return gauss(x, init_mean, std::max(init_std, 1e-12)); });

    for (const double y : observations) {
        // predict onto a fresh grid around the predicted mean
        double m_pred = 0.0, norm = 0.0;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            norm += ps[j];
            m_pred += ps[j] * xs[j];
        }
        m_pred /= norm;
        double v_prev = 0.0;
        for (std::size_t j = 0; j < xs.size(); ++j)
            v_prev += ps[j] * (xs[j] - m_pred) * (xs[j] - m_pred);
        v_prev /= norm;
        const double spread = std::sqrt(v_prev + q * q);

        const std::vector<double> xs_old = xs, ps_old = ps;
        const double dx_old = xs_old[1] - xs_old[0];
        rebuild(m_pred, spread, [&](double x) {
            double acc = 0.0;
            for (std::size_t i = 0; i < xs_old.size(); ++i)
                acc += ps_old[i] * gauss(x, xs_old[i], q);
            return acc * dx_old;
        });

        // update and normalize
        for (std::size_t j = 0; j < xs.size(); ++j)
            ps[j] *= gauss(y, xs[j], r);
        double total = 0.0;
        for (const double p : ps)
            total += p;
        for (double& p : ps)
            p /= total;

        mean = 0.0;
        for (std::size_t j = 0; j < xs.size(); ++j)
            mean += ps[j] * xs[j];
        double var = 0.0;
        for (std::size_t j = 0; j < xs.size(); ++j)
            var += ps[j] * (xs[j] - mean) * (xs[j] - mean);
        result.means.push_back(mean);
        result.variances.push_back(var);
        sd = std::sqrt(var);
    }
    return result;
}

// Brute-force count of integer pixels within `radius` of the center over the
// whole image, ignoring any bounding-box shortcuts.
inline std::size_t disk_pixel_count(double cx, double cy, double radius, std::size_t width,
                                    std::size_t height) {
    std::size_t count = 0;
    for (std::size_t py = 0; py < height; ++py)
        for (std::size_t px = 0; px < width; ++px) {
            const double dx = static_cast<double>(px) - cx;
            const double dy = static_cast<double>(py) - cy;
            if (dx * dx + dy * dy <= radius * radius)
                ++count;
        }
    return count;
}

// Two-sided Kolmogorov-Smirnov distance of samples against U[0,1).
inline double ks_uniform(std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double fi = static_cast<double>(i) / n;
        const double fi1 = static_cast<double>(i + 1) / n;
        d = std::max(d, std::max(samples[i] - fi, fi1 - samples[i]));
    }
    return d;
}

inline double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (const double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

inline double variance_of(std::span<const double> v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (const double x : v)
        s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

} // namespace oracle
