#include "lpf/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace lpf {

namespace {

// stream tags for deriving independent engines from one base seed
constexpr std::uint64_t kSimulationStream = 0x5e9;
constexpr std::uint64_t kFilterStream = 0xf117;
constexpr std::uint64_t kSpreadStream = 0x5bd;

std::uint64_t filter_seed(std::uint64_t trial_seed, std::size_t scheme_index, std::size_t n) {
    return mix_seed(mix_seed(trial_seed, kFilterStream + scheme_index), n);
}

} // namespace

void ExperimentConfig::validate() const {
    if (schemes.empty())
        throw std::invalid_argument("ExperimentConfig: need at least one scheme");
    if (particle_counts.empty())
        throw std::invalid_argument("ExperimentConfig: need at least one particle count");
    if (trials < 2)
        throw std::invalid_argument("ExperimentConfig: need at least two trials");
    if (steps < 1)
        throw std::invalid_argument("ExperimentConfig: need at least one step");
}

const Series& ExperimentReport::find(const std::string& scheme, std::size_t n) const {
    for (const Series& s : series)
        if (s.scheme == scheme && s.n == n)
            return s;
    throw std::out_of_range("ExperimentReport: no series for scheme '" + scheme + "' at n=" +
                            std::to_string(n));
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count)
                    return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

namespace {

struct TrialOutcome {
    // per series: steps errors, or empty when the run lost track
    std::vector<std::vector<double>> errors;
    std::vector<bool> failed;
    int regenerated = 0;
};

double euclidean_error(std::span<const double> a, std::span<const double> b) {
    double sq = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        sq += d * d;
    }
    return std::sqrt(sq);
}

} // namespace

ExperimentReport run_rmse(const StateSpaceModel& model, const ExperimentConfig& config) {
    config.validate();
    const std::size_t n_series = config.schemes.size() * config.particle_counts.size();
    const std::size_t steps = config.steps;

    std::vector<TrialOutcome> outcomes(config.trials);
    parallel_for(config.trials, config.threads, [&](std::size_t trial) {
        const std::uint64_t trial_seed = mix_seed(config.seed, trial);
        Rng sim_rng(mix_seed(trial_seed, kSimulationStream));
        const SimulatedSequence seq = simulate_sequence(model, steps + 1, sim_rng);

        TrialOutcome& out = outcomes[trial];
        out.errors.resize(n_series);
        out.failed.assign(n_series, false);
        out.regenerated = seq.regenerated;

        std::size_t series_index = 0;
        for (std::size_t si = 0; si < config.schemes.size(); ++si) {
            for (const std::size_t n : config.particle_counts) {
                FilterConfig fc;
                fc.n_particles = n;
                fc.resampling = config.schemes[si].resampling;
                fc.proposal = config.schemes[si].proposal;
                fc.generator = config.generator;
                fc.seed = filter_seed(trial_seed, si, n);

                std::vector<double>& errors = out.errors[series_index];
                errors.reserve(steps);
                try {
                    Filter filter(model, fc, seq.trajectory.state(0));
                    for (std::size_t t = 1; t <= steps; ++t) {
                        const ParticleSet& particles = filter.step(seq.observations.at_time(t));
                        const std::vector<double> mean = weighted_mean(particles);
                        errors.push_back(euclidean_error(mean, seq.trajectory.state(t)));
                    }
                } catch (const DegenerateWeightsError&) {
                    errors.clear();
                    out.failed[series_index] = true;
                }
                ++series_index;
            }
        }
    });

    ExperimentReport report;
    report.trials = config.trials;
    report.steps = steps;
    report.seed = config.seed;
    for (const TrialOutcome& out : outcomes)
        report.regenerated_sequences += out.regenerated;

    std::size_t series_index = 0;
    for (std::size_t si = 0; si < config.schemes.size(); ++si) {
        for (const std::size_t n : config.particle_counts) {
            Series s;
            s.scheme = config.schemes[si].label();
            s.n = n;
            s.rmse.assign(steps, 0.0);
            s.mse.assign(steps, 0.0);
            s.ensemble_std.assign(steps, 0.0);
            s.stderr_mean.assign(steps, 0.0);

            std::size_t kept = 0;
            for (const TrialOutcome& out : outcomes) {
                if (out.failed[series_index]) {
                    ++s.failed_trials;
                    continue;
                }
                ++kept;
                for (std::size_t t = 0; t < steps; ++t)
                    s.mse[t] += out.errors[series_index][t] * out.errors[series_index][t];
            }
            if (kept == 0)
                throw std::runtime_error("run_rmse: every trial of scheme '" + s.scheme +
                                         "' at n=" + std::to_string(n) + " lost track");
            for (std::size_t t = 0; t < steps; ++t) {
                s.mse[t] /= static_cast<double>(kept);
                s.rmse[t] = std::sqrt(s.mse[t]);
            }
            // second pass for the spread of the per-trial errors
            for (std::size_t t = 0; t < steps; ++t) {
                double mean_err = 0.0;
                for (const TrialOutcome& out : outcomes)
                    if (!out.failed[series_index])
                        mean_err += out.errors[series_index][t];
                mean_err /= static_cast<double>(kept);
                double var = 0.0;
                for (const TrialOutcome& out : outcomes)
                    if (!out.failed[series_index]) {
                        const double d = out.errors[series_index][t] - mean_err;
                        var += d * d;
                    }
                var = kept > 1 ? var / static_cast<double>(kept - 1) : 0.0;
                s.ensemble_std[t] = std::sqrt(var);
                s.stderr_mean[t] = s.ensemble_std[t] / std::sqrt(static_cast<double>(kept));
            }
            double total = 0.0;
            for (const double m : s.mse)
                total += m;
            s.mean_mse = total / static_cast<double>(steps);
            report.series.push_back(std::move(s));
            ++series_index;
        }
    }
    return report;
}

double variance_difference(const ExperimentReport& report, const std::string& scheme_a,
                           const std::string& scheme_b, std::size_t n) {
    const Series& a = report.find(scheme_a, n);
    const Series& b = report.find(scheme_b, n);
    return 100.0 * (1.0 - b.mean_mse / a.mean_mse);
}

double rmse_difference(const ExperimentReport& report, const std::string& scheme_a,
                       const std::string& scheme_b, std::size_t n) {
    const Series& a = report.find(scheme_a, n);
    const Series& b = report.find(scheme_b, n);
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t t = 0; t < a.rmse.size(); ++t) {
        mean_a += a.rmse[t];
        mean_b += b.rmse[t];
    }
    return 100.0 * (1.0 - mean_b / mean_a);
}

EfficiencyGain efficiency_gain(const ExperimentReport& report, const std::string& scheme_a,
                               const std::string& scheme_b, std::size_t n_ref) {
    const double target = report.find(scheme_b, n_ref).mean_mse;

    std::vector<std::pair<std::size_t, double>> grid; // (n, mean_mse), ascending n
    for (const Series& s : report.series)
        if (s.scheme == scheme_a)
            grid.emplace_back(s.n, s.mean_mse);
    if (grid.empty())
        throw std::out_of_range("efficiency_gain: scheme '" + scheme_a + "' not in the report");
    std::sort(grid.begin(), grid.end());

    EfficiencyGain result;
    result.max_evaluated_n = grid.back().first;

    double best_mse = grid.front().second;
    for (const auto& [n, mse] : grid)
        best_mse = std::min(best_mse, mse);
    if (target < best_mse) {
        result.lower_bound = true;
        result.percent =
            100.0 * (static_cast<double>(result.max_evaluated_n) / static_cast<double>(n_ref) - 1.0);
        return result;
    }

    const auto gain_from = [&](double n_star) {
        return 100.0 * (n_star / static_cast<double>(n_ref) - 1.0);
    };
    for (const auto& [n, mse] : grid)
        if (mse == target) {
            result.percent = gain_from(static_cast<double>(n));
            return result;
        }
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
        const auto [n0, m0] = grid[j];
        const auto [n1, m1] = grid[j + 1];
        if ((m0 - target) * (m1 - target) < 0.0) {
            const double ln_n = std::log(static_cast<double>(n0)) +
                                (std::log(target) - std::log(m0)) *
                                    (std::log(static_cast<double>(n1)) -
                                     std::log(static_cast<double>(n0))) /
                                    (std::log(m1) - std::log(m0));
            result.percent = gain_from(std::exp(ln_n));
            return result;
        }
    }
    // target above every evaluated MSE: extrapolate from the nearest segment
    if (grid.size() < 2)
        throw std::invalid_argument("efficiency_gain: need scheme '" + scheme_a +
                                    "' at two or more particle counts");
    const auto [n0, m0] = grid[0];
    const auto [n1, m1] = grid[1];
    const double slope = (std::log(static_cast<double>(n1)) - std::log(static_cast<double>(n0))) /
                         (std::log(m1) - std::log(m0));
    const double ln_n = std::log(static_cast<double>(n0)) + (std::log(target) - std::log(m0)) * slope;
    result.percent = gain_from(std::exp(ln_n));
    return result;
}

std::vector<double> ground_truth_mean(const StateSpaceModel& model,
                                      const ObservationSequence& observations, std::size_t n_large,
                                      std::uint64_t seed, SchemeSpec spec) {
    FilterConfig fc;
    fc.n_particles = n_large;
    fc.resampling = spec.resampling;
    fc.proposal = spec.proposal;
    fc.seed = seed;
    Filter filter(model, fc);
    const std::size_t steps = observations.count();
    std::vector<double> means(steps * model.state_dim());
    for (std::size_t t = 1; t <= steps; ++t) {
        const ParticleSet& particles = filter.step(observations.at_time(t));
        const std::vector<double> mean = weighted_mean(particles);
        std::copy(mean.begin(), mean.end(), means.begin() + (t - 1) * model.state_dim());
    }
    return means;
}

SpreadResult ensemble_spread(const StateSpaceModel& model, const ObservationSequence& observations,
                             SchemeSpec spec, std::size_t n, std::size_t runs,
                             std::uint64_t base_seed, std::span<const double> reference_mean,
                             std::optional<std::uint64_t> generator, unsigned threads) {
    if (runs < 2)
        throw std::invalid_argument("ensemble_spread: need at least two runs");
    const std::size_t steps = observations.count();
    const std::size_t dim = model.state_dim();
    if (!reference_mean.empty() && reference_mean.size() != steps * dim)
        throw std::invalid_argument("ensemble_spread: reference mean has the wrong shape");

    std::vector<std::vector<double>> estimates(runs);
    std::vector<char> failed(runs, 0);
    parallel_for(runs, threads, [&](std::size_t run) {
        FilterConfig fc;
        fc.n_particles = n;
        fc.resampling = spec.resampling;
        fc.proposal = spec.proposal;
        fc.generator = generator;
        fc.seed = mix_seed(mix_seed(base_seed, kSpreadStream), run);
        std::vector<double>& est = estimates[run];
        est.resize(steps * dim);
        try {
            Filter filter(model, fc);
            for (std::size_t t = 1; t <= steps; ++t) {
                const ParticleSet& particles = filter.step(observations.at_time(t));
                const std::vector<double> mean = weighted_mean(particles);
                std::copy(mean.begin(), mean.end(), est.begin() + (t - 1) * dim);
            }
        } catch (const DegenerateWeightsError&) {
            failed[run] = 1;
        }
    });

    SpreadResult result;
    result.runs = runs;
    for (const char f : failed)
        result.failed_runs += f;
    const std::size_t kept = runs - result.failed_runs;
    if (kept < 2)
        throw std::runtime_error("ensemble_spread: fewer than two runs kept track");

    result.spread.assign(steps * dim, 0.0);
    if (!reference_mean.empty())
        result.mean_abs_dev.assign(steps * dim, 0.0);
    // first kept run anchors the mean so identical estimates give zero spread
    std::size_t anchor_run = 0;
    while (failed[anchor_run])
        ++anchor_run;
    for (std::size_t cell = 0; cell < steps * dim; ++cell) {
        const double anchor = estimates[anchor_run][cell];
        double mean = 0.0;
        for (std::size_t run = 0; run < runs; ++run)
            if (!failed[run])
                mean += estimates[run][cell] - anchor;
        mean = anchor + mean / static_cast<double>(kept);
        double var = 0.0;
        for (std::size_t run = 0; run < runs; ++run)
            if (!failed[run]) {
                const double d = estimates[run][cell] - mean;
                var += d * d;
            }
        result.spread[cell] = std::sqrt(var / static_cast<double>(kept - 1));
        if (!reference_mean.empty()) {
            double dev = 0.0;
            for (std::size_t run = 0; run < runs; ++run)
                if (!failed[run])
                    dev += std::abs(estimates[run][cell] - reference_mean[cell]);
            result.mean_abs_dev[cell] = dev / static_cast<double>(kept);
        }
    }
    return result;
}

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void append_array(std::string& out, const std::vector<double>& values) {
    out += '[';
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            out += ',';
        out += fmt17(values[i]);
    }
    out += ']';
}

} // namespace

std::string report_to_json(const ExperimentReport& report) {
    std::string out;
    out += "{\n";
    out += "  \"model\": \"" + report.model + "\",\n";
    out += "  \"trials\": " + std::to_string(report.trials) + ",\n";
    out += "  \"steps\": " + std::to_string(report.steps) + ",\n";
    out += "  \"seed\": " + std::to_string(report.seed) + ",\n";
    out += "  \"regenerated_sequences\": " + std::to_string(report.regenerated_sequences) + ",\n";
    out += "  \"series\": [\n";
    for (std::size_t i = 0; i < report.series.size(); ++i) {
        const Series& s = report.series[i];
        out += "    {\"scheme\": \"" + s.scheme + "\", \"n\": " + std::to_string(s.n) +
               ", \"failed_trials\": " + std::to_string(s.failed_trials) +
               ", \"mean_mse\": " + fmt17(s.mean_mse) + ",\n";
        out += "     \"rmse\": ";
        append_array(out, s.rmse);
        out += ",\n     \"mse\": ";
        append_array(out, s.mse);
        out += ",\n     \"ensemble_std\": ";
        append_array(out, s.ensemble_std);
        out += ",\n     \"stderr_mean\": ";
        append_array(out, s.stderr_mean);
        out += "}";
        out += i + 1 < report.series.size() ? ",\n" : "\n";
    }
    out += "  ],\n";

    // pairwise comparisons at every common particle count
    out += "  \"comparisons\": [";
    bool first = true;
    for (const Series& a : report.series) {
        for (const Series& b : report.series) {
            if (&a == &b || a.scheme == b.scheme || a.n != b.n)
                continue;
            out += first ? "\n" : ",\n";
            first = false;
            out += "    {\"baseline\": \"" + a.scheme + "\", \"candidate\": \"" + b.scheme +
                   "\", \"n\": " + std::to_string(a.n) +
                   ", \"variance_difference_pct\": " + fmt17(variance_difference(report, a.scheme, b.scheme, a.n)) +
                   ", \"rmse_difference_pct\": " + fmt17(rmse_difference(report, a.scheme, b.scheme, a.n)) + "}";
        }
    }
    out += first ? "],\n" : "\n  ],\n";

    // efficiency gains where the baseline was evaluated on a grid
    out += "  \"efficiency\": [";
    first = true;
    std::vector<std::string> schemes;
    for (const Series& s : report.series)
        if (std::find(schemes.begin(), schemes.end(), s.scheme) == schemes.end())
            schemes.push_back(s.scheme);
    for (const std::string& a : schemes) {
        std::size_t count_a = 0;
        for (const Series& s : report.series)
            if (s.scheme == a)
                ++count_a;
        if (count_a < 2)
            continue;
        for (const std::string& b : schemes) {
            if (a == b)
                continue;
            for (const Series& s : report.series) {
                if (s.scheme != b)
                    continue;
                const EfficiencyGain gain = efficiency_gain(report, a, b, s.n);
                out += first ? "\n" : ",\n";
                first = false;
                out += "    {\"baseline\": \"" + a + "\", \"candidate\": \"" + b +
                       "\", \"n_ref\": " + std::to_string(s.n) +
                       ", \"gain_pct\": " + fmt17(gain.percent) +
                       ", \"lower_bound\": " + (gain.lower_bound ? "true" : "false") +
                       ", \"max_evaluated_n\": " + std::to_string(gain.max_evaluated_n) + "}";
            }
        }
    }
    out += first ? "]\n" : "\n  ]\n";
    out += "}\n";
    return out;
}

void write_report(const ExperimentReport& report, const std::string& directory) {
    std::filesystem::create_directories(directory);
    const std::filesystem::path dir(directory);
    {
        std::ofstream json(dir / "report.json", std::ios::binary);
        if (!json)
            throw std::runtime_error("write_report: cannot write to '" + directory + "'");
        json << report_to_json(report);
    }
    {
        std::ofstream csv(dir / "rmse.csv", std::ios::binary);
        csv << "scheme,n,t,rmse,ensemble_std,failed\n";
        for (const Series& s : report.series)
            for (std::size_t t = 0; t < s.rmse.size(); ++t)
                csv << s.scheme << ',' << s.n << ',' << t + 1 << ',' << fmt17(s.rmse[t]) << ','
                    << fmt17(s.ensemble_std[t]) << ',' << s.failed_trials << '\n';
    }
    {
        std::ofstream plot(dir / "plot.gp", std::ios::binary);
        plot << "# gnuplot script for the per-step RMSE curves\n";
        plot << "set datafile separator ','\n";
        plot << "set key autotitle columnheader\n";
        plot << "set xlabel 'time step'\n";
        plot << "set ylabel 'RMSE'\n";
        plot << "plot ";
        bool first = true;
        for (const Series& s : report.series) {
            if (!first)
                plot << ", \\\n     ";
            first = false;
            plot << "'rmse.csv' using 3:(strcol(1) eq '" << s.scheme << "' && column(2) == " << s.n
                 << " ? column(4) : NaN) with linespoints title '" << s.scheme << " n=" << s.n
                 << "'";
        }
        plot << "\n";
    }
}

} // namespace lpf
