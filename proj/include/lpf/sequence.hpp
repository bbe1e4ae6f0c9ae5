#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lpf/particle_filter.hpp"
#include "lpf/random.hpp"

namespace lpf {

/// Ground-truth states x_0 .. x_{frames-1}, row-major.
struct Trajectory {
    std::size_t dim = 0;
    std::vector<double> data;

    std::size_t frames() const { return dim == 0 ? 0 : data.size() / dim; }
    std::span<const double> state(std::size_t t) const { return {data.data() + t * dim, dim}; }
    std::span<double> state(std::size_t t) { return {data.data() + t * dim, dim}; }
};

/// Observations y_1 .. y_{frames-1}; there is no observation for the known
/// initial frame.
struct ObservationSequence {
    std::size_t dim = 0;
    std::vector<double> data;

    std::size_t count() const { return dim == 0 ? 0 : data.size() / dim; }
    std::span<const double> at_time(std::size_t t) const {
        return {data.data() + (t - 1) * dim, dim};
    }
    std::span<double> at_time(std::size_t t) { return {data.data() + (t - 1) * dim, dim}; }
};

struct SimulatedSequence {
    Trajectory trajectory;
    ObservationSequence observations;
    int regenerated = 0; // attempts discarded for leaving the model's bounds
};

/// Simulates `frames` ground-truth states from the model's data-generating
/// dynamics starting at its initial state, then the matching observations.
/// Trajectories rejected by state_in_bounds are discarded and redrawn from
/// the same stream (states first, observations only for the accepted
/// attempt).
SimulatedSequence simulate_sequence(const StateSpaceModel& model, std::size_t frames, Rng& rng);

} // namespace lpf
