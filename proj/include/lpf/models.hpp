#pragma once

#include <memory>
#include <string>

#include "lpf/config.hpp"
#include "lpf/models/body.hpp"
#include "lpf/models/disk.hpp"
#include "lpf/models/lingauss.hpp"
#include "lpf/models/toy.hpp"
#include "lpf/sequence.hpp"

namespace lpf {

/// Builds one of the built-in models (toy | lingauss | disk | body) with
/// parameters taken from the configuration where present.
///
/// Recognized keys: threshold (toy); trans_std, obs_std, init_state,
/// init_std (lingauss); image_size, radius, sigma_x, sigma_d, sigma_nu,
/// margin (disk); pelvis_width, thigh_length, shin_length, spine_x/y/z,
/// camera_distance, camera_baseline, sigma_obs, sigma_a, truth_sigma_a
/// (body).
std::unique_ptr<StateSpaceModel> make_model(const std::string& name, const KeyValueConfig& config);

} // namespace lpf
