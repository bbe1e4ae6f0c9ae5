#include "lpf/models/body.hpp"

#include <cmath>
#include <stdexcept>

#include "lpf/transforms.hpp"

namespace lpf {

namespace {

// row-major 3x3
using Mat3 = std::array<double, 9>;

Mat3 rot_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {1, 0, 0, 0, c, -s, 0, s, c};
}

Mat3 rot_y(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {c, 0, s, 0, 1, 0, -s, 0, c};
}

Mat3 rot_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {c, -s, 0, s, c, 0, 0, 0, 1};
}

Mat3 drot_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {0, 0, 0, 0, -s, -c, 0, c, -s};
}

Mat3 drot_y(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {-s, 0, c, 0, 0, 0, -c, 0, -s};
}

Mat3 drot_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {-s, -c, 0, c, -s, 0, 0, 0, 0};
}

Mat3 mat_mul(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r[i * 3 + j] = a[i * 3] * b[j] + a[i * 3 + 1] * b[3 + j] + a[i * 3 + 2] * b[6 + j];
    return r;
}

Vec3 mat_apply(const Mat3& m, const Vec3& v) {
    return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2], m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
            m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
}

Vec3 vec_add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

// product of ms[0..upto) with slot `dslot` replaced by its derivative;
// zero when the differentiated joint sits outside the chain prefix
Mat3 chain_derivative(const std::array<Mat3, 6>& ms, const std::array<Mat3, 6>& dms,
                      std::size_t upto, std::size_t dslot) {
    if (dslot >= upto)
        return Mat3{};
    Mat3 p = dslot == 0 ? dms[0] : ms[0];
    for (std::size_t k = 1; k < upto; ++k)
        p = mat_mul(p, k == dslot ? dms[k] : ms[k]);
    return p;
}

} // namespace

Vec2 project(const Vec3& marker, const Vec3& camera_center) {
    const double depth = marker[1] - camera_center[1];
    if (depth == 0.0)
        throw std::domain_error("project: marker lies in the camera plane");
    return {(marker[0] - camera_center[0]) / depth, (marker[2] - camera_center[2]) / depth};
}

BodyModel::BodyModel(const Params& params) : params_(params) {
    if (!(params_.pelvis_width > 0.0) || !(params_.thigh_length > 0.0) ||
        !(params_.shin_length > 0.0))
        throw std::invalid_argument("BodyModel: limb lengths must be positive");
    if (!(params_.sigma_obs > 0.0) || !(params_.sigma_a > 0.0) || !(params_.truth_sigma_a > 0.0))
        throw std::invalid_argument("BodyModel: noise parameters must be positive");
}

std::array<Vec3, BodyModel::kMarkers>
BodyModel::forward_kinematics(std::span<const double> angles) const {
    if (angles.size() != kAngles)
        throw std::invalid_argument("BodyModel: expected 10 joint angles");

    const Mat3 pelvis = mat_mul(rot_z(angles[0]), rot_y(angles[1]));
    const Vec3 down_thigh = {0.0, 0.0, -params_.thigh_length};
    const Vec3 down_shin = {0.0, 0.0, -params_.shin_length};

    std::array<Vec3, kMarkers> markers;
    for (int side = 0; side < 2; ++side) {
        const double sign = side == 0 ? -1.0 : 1.0; // left, right
        const std::size_t base = side == 0 ? 2 : 6;

        const Vec3 hip_offset = {sign * 0.5 * params_.pelvis_width, 0.0, 0.0};
        const Vec3 hip = vec_add(params_.spine_anchor, mat_apply(pelvis, hip_offset));

        Mat3 leg = mat_mul(pelvis, mat_mul(rot_z(angles[base]),
                                   mat_mul(rot_x(angles[base + 1]), rot_y(angles[base + 2]))));
        const Vec3 knee = vec_add(hip, mat_apply(leg, down_thigh));

        const Mat3 lower = mat_mul(leg, rot_x(angles[base + 3]));
        const Vec3 foot = vec_add(knee, mat_apply(lower, down_shin));

        markers[side] = hip;
        markers[2 + side] = knee;
        markers[4 + side] = foot;
    }
    return markers;
}

std::vector<double> BodyModel::predict_observations(std::span<const double> angles) const {
    const auto markers = forward_kinematics(angles);
    std::vector<double> obs(obs_dim());
    std::size_t k = 0;
    for (const Vec3& cam : {params_.camera_left, params_.camera_right}) {
        for (const Vec3& marker : markers) {
            const Vec2 d = project(marker, cam);
            obs[k++] = d[0];
            obs[k++] = d[1];
        }
    }
    return obs;
}

std::vector<double> BodyModel::log_likelihood_gradient(std::span<const double> observations,
                                                       std::span<const double> angles) const {
    if (angles.size() != kAngles)
        throw std::invalid_argument("BodyModel: expected 10 joint angles");
    if (observations.size() != obs_dim())
        throw std::invalid_argument("BodyModel: observation size mismatch");

    std::array<Vec3, kMarkers> markers;
    // per-marker position jacobian columns, dMarker/dAngle
    std::array<std::array<Vec3, kAngles>, kMarkers> jac{};

    const Vec3 down_thigh = {0.0, 0.0, -params_.thigh_length};
    const Vec3 down_shin = {0.0, 0.0, -params_.shin_length};

    for (int side = 0; side < 2; ++side) {
        const double sign = side == 0 ? -1.0 : 1.0;
        const std::size_t base = side == 0 ? 2 : 6;
        const Vec3 hip_offset = {sign * 0.5 * params_.pelvis_width, 0.0, 0.0};

        const std::array<Mat3, 6> ms = {rot_z(angles[0]),        rot_y(angles[1]),
                                        rot_z(angles[base]),     rot_x(angles[base + 1]),
                                        rot_y(angles[base + 2]), rot_x(angles[base + 3])};
        const std::array<Mat3, 6> dms = {drot_z(angles[0]),        drot_y(angles[1]),
                                         drot_z(angles[base]),     drot_x(angles[base + 1]),
                                         drot_y(angles[base + 2]), drot_x(angles[base + 3])};
        const std::array<std::size_t, 6> global = {0, 1, base, base + 1, base + 2, base + 3};

        Mat3 pelvis = mat_mul(ms[0], ms[1]);
        Mat3 leg = mat_mul(pelvis, mat_mul(ms[2], mat_mul(ms[3], ms[4])));
        Mat3 lower = mat_mul(leg, ms[5]);

        const Vec3 hip = vec_add(params_.spine_anchor, mat_apply(pelvis, hip_offset));
        const Vec3 knee = vec_add(hip, mat_apply(leg, down_thigh));
        const Vec3 foot = vec_add(knee, mat_apply(lower, down_shin));
        markers[side] = hip;
        markers[2 + side] = knee;
        markers[4 + side] = foot;

        for (std::size_t slot = 0; slot < 6; ++slot) {
            const Vec3 dhip = mat_apply(chain_derivative(ms, dms, 2, slot), hip_offset);
            const Vec3 dknee = vec_add(dhip, mat_apply(chain_derivative(ms, dms, 5, slot), down_thigh));
            const Vec3 dfoot = vec_add(dknee, mat_apply(chain_derivative(ms, dms, 6, slot), down_shin));
            jac[side][global[slot]] = dhip;
            jac[2 + side][global[slot]] = dknee;
            jac[4 + side][global[slot]] = dfoot;
        }
    }

    std::vector<double> gradient(kAngles, 0.0);
    const double inv_sigma2 = 1.0 / (params_.sigma_obs * params_.sigma_obs);
    std::size_t k = 0;
    for (const Vec3& cam : {params_.camera_left, params_.camera_right}) {
        for (std::size_t m = 0; m < kMarkers; ++m) {
            const Vec3& pos = markers[m];
            const double depth = pos[1] - cam[1];
            if (depth == 0.0)
                throw std::domain_error("project: marker lies in the camera plane");
            const Vec2 predicted = {(pos[0] - cam[0]) / depth, (pos[2] - cam[2]) / depth};
            const double r0 = observations[k] - predicted[0];
            const double r1 = observations[k + 1] - predicted[1];
            k += 2;
            for (std::size_t a = 0; a < kAngles; ++a) {
                const Vec3& dm = jac[m][a];
                const double dp0 = (dm[0] * depth - (pos[0] - cam[0]) * dm[1]) / (depth * depth);
                const double dp1 = (dm[2] * depth - (pos[2] - cam[2]) * dm[1]) / (depth * depth);
                gradient[a] += (r0 * dp0 + r1 * dp1) * inv_sigma2;
            }
        }
    }
    return gradient;
}

void BodyModel::transform(std::span<const double> u, std::span<const double> x_prev,
                          std::span<double> x_out) const {
    std::array<double, kAngles> sigma;
    sigma.fill(params_.sigma_a);
    gaussian_step(u, x_prev, sigma, x_out);
}

double BodyModel::log_likelihood(const PreparedObservation& y, std::span<const double> x) const {
    const std::vector<double> predicted = predict_observations(x);
    double sq = 0.0;
    for (std::size_t k = 0; k < predicted.size(); ++k) {
        const double d = y.y[k] - predicted[k];
        sq += d * d;
    }
    return -sq / (2.0 * params_.sigma_obs * params_.sigma_obs);
}

void BodyModel::simulate_transition(std::span<const double> x, std::span<double> x_out,
                                    Rng& rng) const {
    for (std::size_t k = 0; k < kAngles; ++k)
        x_out[k] = x[k] + params_.truth_sigma_a * standard_normal(rng);
}

void BodyModel::simulate_observation(std::span<const double> x, std::span<double> y_out,
                                     Rng& rng) const {
    const std::vector<double> predicted = predict_observations(x);
    for (std::size_t k = 0; k < predicted.size(); ++k)
        y_out[k] = predicted[k] + params_.sigma_obs * standard_normal(rng);
}

} // namespace lpf
