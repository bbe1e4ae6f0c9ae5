#include "lpf/models/disk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lpf/transforms.hpp"

namespace lpf {

DiskModel::DiskModel(const Params& params) : params_(params) {
    if (params_.width < 1 || params_.height < 1)
        throw std::invalid_argument("DiskModel: image dimensions must be positive");
    if (!(params_.radius > 0.0))
        throw std::invalid_argument("DiskModel: radius must be positive");
    if (!(params_.sigma_x > 0.0) || !(params_.sigma_d > 0.0))
        throw std::invalid_argument("DiskModel: transition stds must be positive");
    if (params_.sigma_nu < 0.0)
        throw std::invalid_argument("DiskModel: pixel noise std must be nonnegative");
}

std::vector<double> DiskModel::initial_state() const {
    return {0.5 * static_cast<double>(params_.width - 1),
            0.5 * static_cast<double>(params_.height - 1)};
}

void DiskModel::transform(std::span<const double> u, std::span<const double> x_prev,
                          std::span<double> x_out) const {
    const double sigma[2] = {params_.sigma_d, params_.sigma_d};
    gaussian_step(u, x_prev, sigma, x_out);
}

void DiskModel::simulate_transition(std::span<const double> x, std::span<double> x_out,
                                    Rng& rng) const {
    x_out[0] = x[0] + params_.sigma_x * standard_normal(rng);
    x_out[1] = x[1] + params_.sigma_x * standard_normal(rng);
}

bool DiskModel::state_in_bounds(std::span<const double> x) const {
    const double m = params_.margin;
    return x[0] >= m && x[0] <= static_cast<double>(params_.width - 1) - m && x[1] >= m &&
           x[1] <= static_cast<double>(params_.height - 1) - m;
}

namespace {

struct PixelBox {
    long x0, x1, y0, y1; // inclusive, clipped to the image
};

PixelBox disk_box(const DiskModel::Params& p, std::span<const double> center) {
    PixelBox box;
    box.x0 = std::max(0L, static_cast<long>(std::ceil(center[0] - p.radius)));
    box.x1 = std::min(static_cast<long>(p.width) - 1,
                      static_cast<long>(std::floor(center[0] + p.radius)));
    box.y0 = std::max(0L, static_cast<long>(std::ceil(center[1] - p.radius)));
    box.y1 = std::min(static_cast<long>(p.height) - 1,
                      static_cast<long>(std::floor(center[1] + p.radius)));
    return box;
}

} // namespace

std::vector<double> DiskModel::render(std::span<const double> center) const {
    std::vector<double> image(params_.width * params_.height, 0.0);
    const PixelBox box = disk_box(params_, center);
    const double r2 = params_.radius * params_.radius;
    for (long py = box.y0; py <= box.y1; ++py) {
        for (long px = box.x0; px <= box.x1; ++px) {
            const double dx = static_cast<double>(px) - center[0];
            const double dy = static_cast<double>(py) - center[1];
            if (dx * dx + dy * dy <= r2)
                image[static_cast<std::size_t>(py) * params_.width + static_cast<std::size_t>(px)] =
                    1.0;
        }
    }
    return image;
}

std::vector<double> DiskModel::observe(std::span<const double> center, Rng& rng) const {
    std::vector<double> image = render(center);
    if (params_.sigma_nu > 0.0)
        for (double& pix : image)
            pix += params_.sigma_nu * standard_normal(rng);
    return image;
}

void DiskModel::simulate_observation(std::span<const double> x, std::span<double> y_out,
                                     Rng& rng) const {
    const std::vector<double> image = observe(x, rng);
    std::copy(image.begin(), image.end(), y_out.begin());
}

PreparedObservation DiskModel::prepare(std::span<const double> y) const {
    if (y.size() != obs_dim())
        throw std::invalid_argument("DiskModel: observation size does not match the image");
    double total_sq = 0.0;
    for (double pix : y)
        total_sq += pix * pix;
    return {y, total_sq};
}

double DiskModel::log_likelihood(const PreparedObservation& y, std::span<const double> x) const {
    // sum over the candidate's disk of (2 I - 1); combined with the cached
    // sum(I^2) this reproduces the full-image quadratic exactly
    const PixelBox box = disk_box(params_, x);
    const double r2 = params_.radius * params_.radius;
    double disk_term = 0.0;
    for (long py = box.y0; py <= box.y1; ++py) {
        const double dy = static_cast<double>(py) - x[1];
        const double* row = y.y.data() + static_cast<std::size_t>(py) * params_.width;
        for (long px = box.x0; px <= box.x1; ++px) {
            const double dx = static_cast<double>(px) - x[0];
            if (dx * dx + dy * dy <= r2)
                disk_term += 2.0 * row[px] - 1.0;
        }
    }
    const double mismatch = y.cache - disk_term; // = sum (I - m)^2 over the image
    const double sigma2 = params_.sigma_nu * params_.sigma_nu;
    if (sigma2 == 0.0)
        return mismatch == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return -mismatch / (2.0 * sigma2);
}

double disk_log_likelihood(const DiskModel& model, std::span<const double> image,
                           std::span<const double> center) {
    return model.log_likelihood(model.prepare(image), center);
}

} // namespace lpf
