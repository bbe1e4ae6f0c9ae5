#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lpf/particle_filter.hpp"
#include "lpf/sequence.hpp"

namespace lpf {

struct SchemeSpec {
    Proposal proposal = Proposal::pseudorandom;
    Resampling resampling = Resampling::residual;

    std::string label() const { return to_string(proposal); }
};

/// Multi-trial benchmark configuration. `steps` counts filter updates; each
/// trial simulates steps+1 frames (the initial one is known to the filters).
struct ExperimentConfig {
    std::vector<SchemeSpec> schemes;
    std::vector<std::size_t> particle_counts;
    std::size_t trials = 200;
    std::size_t steps = 40;
    std::uint64_t seed = 0;
    unsigned threads = 0; // 0 = hardware concurrency
    std::optional<std::uint64_t> generator; // lattice generator override

    void validate() const;
};

/// Aggregated results for one (scheme, n): per-step statistics over the
/// trials that kept track. Index t-1 holds step t.
struct Series {
    std::string scheme;
    std::size_t n = 0;
    std::size_t failed_trials = 0;
    std::vector<double> rmse;
    std::vector<double> mse;          // mean squared error across trials
    std::vector<double> ensemble_std; // std across trials of the per-trial error
    std::vector<double> stderr_mean;  // ensemble_std / sqrt(trials kept)
    double mean_mse = 0.0;            // time average of mse
};

struct ExperimentReport {
    std::string model;
    std::size_t trials = 0;
    std::size_t steps = 0;
    std::uint64_t seed = 0;
    int regenerated_sequences = 0;
    std::vector<Series> series;

    const Series& find(const std::string& scheme, std::size_t n) const;
};

/// Runs trials of simulate-then-filter for every (scheme, n) combination.
/// Each trial's sequence and every filter run get independent seed streams
/// derived from (seed, trial); trials that lose track are excluded from the
/// statistics and counted in failed_trials. Trials may run in parallel; the
/// reduction order is fixed, so reports are identical for any thread count.
ExperimentReport run_rmse(const StateSpaceModel& model, const ExperimentConfig& config);

/// Time-averaged percentage by which scheme_b's MSE sits below scheme_a's:
/// 100 * (1 - mean_t MSE_b / mean_t MSE_a).
double variance_difference(const ExperimentReport& report, const std::string& scheme_a,
                           const std::string& scheme_b, std::size_t n);

/// Same comparison on RMSE instead of MSE (the other common reading).
double rmse_difference(const ExperimentReport& report, const std::string& scheme_a,
                       const std::string& scheme_b, std::size_t n);

struct EfficiencyGain {
    double percent = 0.0;
    bool lower_bound = false;       // scheme_a never reached the target MSE
    std::size_t max_evaluated_n = 0;
};

/// Extra fraction of particles scheme_a needs to match scheme_b's mean MSE at
/// n_ref, by log-linear interpolation of mean MSE against n over scheme_a's
/// evaluated particle counts. When scheme_a stays above the target MSE at
/// every evaluated n the result is the lower bound given by the largest
/// evaluated count.
EfficiencyGain efficiency_gain(const ExperimentReport& report, const std::string& scheme_a,
                               const std::string& scheme_b, std::size_t n_ref);

/// Reference posterior mean from a single large-N run on a fixed sequence
/// ((steps x dim) row-major). Throws if the reference run loses track.
std::vector<double> ground_truth_mean(const StateSpaceModel& model,
                                      const ObservationSequence& observations, std::size_t n_large,
                                      std::uint64_t seed,
                                      SchemeSpec spec = {Proposal::pseudorandom,
                                                         Resampling::multinomial});

struct SpreadResult {
    std::size_t runs = 0;
    std::size_t failed_runs = 0;
    std::vector<double> spread;       // (steps x dim) std of mean estimates across runs
    std::vector<double> mean_abs_dev; // (steps x dim) vs the reference mean (empty if none)
};

/// Repeated runs of one scheme on one fixed observation sequence with
/// different seeds; per-step, per-dimension spread of the posterior-mean
/// estimates across runs.
SpreadResult ensemble_spread(const StateSpaceModel& model, const ObservationSequence& observations,
                             SchemeSpec spec, std::size_t n, std::size_t runs,
                             std::uint64_t base_seed,
                             std::span<const double> reference_mean = {},
                             std::optional<std::uint64_t> generator = {},
                             unsigned threads = 0);

/// report.json with 17-significant-digit floats.
std::string report_to_json(const ExperimentReport& report);

/// Writes report.json, rmse.csv (scheme,n,t,rmse,ensemble_std,failed) and
/// plot.gp into the directory (created if needed).
void write_report(const ExperimentReport& report, const std::string& directory);

/// Runs fn(0..count-1) on up to `threads` workers (0 = hardware concurrency);
/// with one worker the loop is sequential.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

} // namespace lpf
