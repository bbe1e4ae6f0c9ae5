#include "lpf/sequence.hpp"

#include <algorithm>
#include <stdexcept>

namespace lpf {

SimulatedSequence simulate_sequence(const StateSpaceModel& model, std::size_t frames, Rng& rng) {
    if (frames < 1)
        throw std::invalid_argument("simulate_sequence: need at least one frame");
    const std::size_t s = model.state_dim();
    SimulatedSequence out;
    out.trajectory.dim = s;
    out.trajectory.data.resize(frames * s);

    const std::vector<double> x0 = model.initial_state();
    for (;;) {
        std::copy(x0.begin(), x0.end(), out.trajectory.state(0).begin());
        bool ok = model.state_in_bounds(out.trajectory.state(0));
        for (std::size_t t = 1; ok && t < frames; ++t) {
            model.simulate_transition(out.trajectory.state(t - 1), out.trajectory.state(t), rng);
            ok = model.state_in_bounds(out.trajectory.state(t));
        }
        if (ok)
            break;
        ++out.regenerated;
    }

    out.observations.dim = model.obs_dim();
    out.observations.data.resize((frames - 1) * model.obs_dim());
    for (std::size_t t = 1; t < frames; ++t)
        model.simulate_observation(out.trajectory.state(t), out.observations.at_time(t), rng);
    return out;
}

} // namespace lpf
