#pragma once

#include "lpf/particle_filter.hpp"

namespace lpf {

/// 2-D disk tracker. A disk of fixed radius performs a Gaussian random walk
/// in a pixel image; observations add i.i.d. Gaussian noise to the binary
/// scene. The tracker's transition model is deliberately overdispersed:
/// sigma_d (used by transform) exceeds sigma_x (used to generate truth).
///
/// Likelihoods are the full-image Gaussian quadratic. The image total
/// sum(I^2) is computed once per observation in prepare(); per candidate only
/// the pixels of its own disk are visited, using
///   sum_r (I - m_c)^2 = sum_r I^2 - sum_{disk(c)} (2 I - 1),
/// so the value equals the full-image sum while each evaluation stays
/// O(radius^2).
class DiskModel : public StateSpaceModel {
public:
    struct Params {
        std::size_t width = 128;
        std::size_t height = 128;
        double radius = 16.0;
        double sigma_x = 3.0;  // true per-axis transition std
        double sigma_d = 5.0;  // tracker's (misspecified) transition std
        double sigma_nu = 0.25; // pixel noise std
        double margin = 20.0;  // truth must stay this far from the border
    };

    DiskModel() : DiskModel(Params{}) {}
    explicit DiskModel(const Params& params);

    std::size_t state_dim() const override { return 2; }
    std::size_t obs_dim() const override { return params_.width * params_.height; }
    std::vector<double> initial_state() const override;

    void transform(std::span<const double> u, std::span<const double> x_prev,
                   std::span<double> x_out) const override;
    PreparedObservation prepare(std::span<const double> y) const override;
    using StateSpaceModel::log_likelihood;
    double log_likelihood(const PreparedObservation& y, std::span<const double> x) const override;
    void simulate_transition(std::span<const double> x, std::span<double> x_out,
                             Rng& rng) const override;
    void simulate_observation(std::span<const double> x, std::span<double> y_out,
                              Rng& rng) const override;
    bool state_in_bounds(std::span<const double> x) const override;

    /// Binary scene: pixel (px, py) is 1 exactly when its distance to the
    /// center is <= radius. Row-major, width * height.
    std::vector<double> render(std::span<const double> center) const;

    /// render() plus per-pixel N(0, sigma_nu^2) noise, row-major draw order.
    std::vector<double> observe(std::span<const double> center, Rng& rng) const;

    const Params& params() const { return params_; }

private:
    Params params_;
};

/// Full-image Gaussian log-likelihood of an observed image given a candidate
/// disk center; 0 exactly when the image is the noiseless rendering at that
/// center.
double disk_log_likelihood(const DiskModel& model, std::span<const double> image,
                           std::span<const double> center);

} // namespace lpf
