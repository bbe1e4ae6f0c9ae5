#include "lpf/models.hpp"

#include <stdexcept>

namespace lpf {

std::unique_ptr<StateSpaceModel> make_model(const std::string& name,
                                            const KeyValueConfig& config) {
    if (name == "toy") {
        return std::make_unique<ToyBinaryModel>(config.get_double("threshold", 0.2));
    }
    if (name == "lingauss") {
        return std::make_unique<LinearGaussianModel>(
            config.get_double("trans_std", 1.0), config.get_double("obs_std", 1.0),
            config.get_double("init_state", 0.0), config.get_double("init_std", 0.0));
    }
    if (name == "disk") {
        DiskModel::Params p;
        const auto size = static_cast<std::size_t>(
            config.get_int("image_size", static_cast<std::int64_t>(p.width)));
        p.width = size;
        p.height = size;
        p.radius = config.get_double("radius", p.radius);
        p.sigma_x = config.get_double("sigma_x", p.sigma_x);
        p.sigma_d = config.get_double("sigma_d", p.sigma_d);
        p.sigma_nu = config.get_double("sigma_nu", p.sigma_nu);
        p.margin = config.get_double("margin", p.margin);
        return std::make_unique<DiskModel>(p);
    }
    if (name == "body") {
        BodyModel::Params p;
        p.pelvis_width = config.get_double("pelvis_width", p.pelvis_width);
        p.thigh_length = config.get_double("thigh_length", p.thigh_length);
        p.shin_length = config.get_double("shin_length", p.shin_length);
        const double distance = config.get_double("camera_distance", p.spine_anchor[1]);
        p.spine_anchor = {config.get_double("spine_x", p.spine_anchor[0]), distance,
                          config.get_double("spine_z", p.spine_anchor[2])};
        const double half_baseline = 0.5 * config.get_double("camera_baseline", 0.06);
        p.camera_left = {-half_baseline, 0.0, 0.0};
        p.camera_right = {half_baseline, 0.0, 0.0};
        p.sigma_obs = config.get_double("sigma_obs", p.sigma_obs);
        p.sigma_a = config.get_double("sigma_a", p.sigma_a);
        p.truth_sigma_a = config.get_double("truth_sigma_a", p.truth_sigma_a);
        return std::make_unique<BodyModel>(p);
    }
    throw std::invalid_argument("unknown model '" + name +
                                "' (expected toy, lingauss, disk or body)");
}

} // namespace lpf
