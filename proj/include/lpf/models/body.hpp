#pragma once

#include <array>

#include "lpf/particle_filter.hpp"

namespace lpf {

using Vec3 = std::array<double, 3>;
using Vec2 = std::array<double, 2>;

/// Perspective projection onto a camera whose optical axis is parallel to
/// the Y axis: ((Xm-Xc)/(Ym-Yc), (Zm-Zc)/(Ym-Yc)). Throws std::domain_error
/// when the marker lies in the camera plane.
Vec2 project(const Vec3& marker, const Vec3& camera_center);

/// Articulated lower body with 10 angular degrees of freedom observed by a
/// binocular pair of cameras.
///
/// State layout (radians): 0 pelvis about Z, 1 pelvis about Y; 2-4 left hip
/// (intrinsic Z-X-Y), 5 left knee (hinge about local X); 6-8 right hip,
/// 9 right knee. The kinematic chain hangs from a fixed spine anchor; with
/// all angles zero the legs point straight down (-Z). Markers, in order:
/// left hip, right hip, left knee, right knee, left foot, right foot.
/// Each camera observes all six markers, giving 24 observation scalars per
/// frame (camera-major, then marker, then coordinate).
class BodyModel : public StateSpaceModel {
public:
    struct Params {
        double pelvis_width = 0.30;
        double thigh_length = 0.45;
        double shin_length = 0.45;
        Vec3 spine_anchor = {0.0, 2.5, 1.0};
        Vec3 camera_left = {-0.03, 0.0, 0.0};
        Vec3 camera_right = {0.03, 0.0, 0.0};
        double sigma_obs = 0.002;    // image noise std
        double sigma_a = 0.1;        // tracker's angle random-walk std
        double truth_sigma_a = 0.05; // data-generating angle walk std
    };

    static constexpr std::size_t kAngles = 10;
    static constexpr std::size_t kMarkers = 6;

    BodyModel() : BodyModel(Params{}) {}
    explicit BodyModel(const Params& params);

    std::size_t state_dim() const override { return kAngles; }
    std::size_t obs_dim() const override { return 2 * kMarkers * 2; }
    std::vector<double> initial_state() const override { return std::vector<double>(kAngles, 0.0); }

    void transform(std::span<const double> u, std::span<const double> x_prev,
                   std::span<double> x_out) const override;
    using StateSpaceModel::log_likelihood;
    double log_likelihood(const PreparedObservation& y, std::span<const double> x) const override;
    void simulate_transition(std::span<const double> x, std::span<double> x_out,
                             Rng& rng) const override;
    void simulate_observation(std::span<const double> x, std::span<double> y_out,
                              Rng& rng) const override;

    /// Marker positions from traversing the chain: spine -> pelvis -> legs.
    std::array<Vec3, kMarkers> forward_kinematics(std::span<const double> angles) const;

    /// Noiseless projections of all markers into both cameras (obs_dim
    /// scalars, same layout as observations).
    std::vector<double> predict_observations(std::span<const double> angles) const;

    /// d log_likelihood / d angle, by the chain rule through the kinematic
    /// tree and the perspective projection.
    std::vector<double> log_likelihood_gradient(std::span<const double> observations,
                                                std::span<const double> angles) const;

    const Params& params() const { return params_; }

private:
    Params params_;
};

} // namespace lpf
