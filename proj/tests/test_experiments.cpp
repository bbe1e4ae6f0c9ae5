#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lpf/experiments.hpp"
#include "lpf/models.hpp"

using namespace lpf;

namespace {

ExperimentReport synthetic_report(const std::vector<std::pair<std::string, std::size_t>>& keys,
                                  const std::vector<double>& mean_mses) {
    ExperimentReport report;
    report.trials = 2;
    report.steps = 1;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        Series s;
        s.scheme = keys[i].first;
        s.n = keys[i].second;
        s.mean_mse = mean_mses[i];
        s.mse = {mean_mses[i]};
        s.rmse = {std::sqrt(mean_mses[i])};
        s.ensemble_std = {0.0};
        s.stderr_mean = {0.0};
        report.series.push_back(std::move(s));
    }
    return report;
}

} // namespace

TEST_CASE("experiment config validation") {
    ExperimentConfig config;
    config.schemes = {{Proposal::pseudorandom, Resampling::residual}};
    config.particle_counts = {16};
    config.trials = 1;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config.trials = 2;
    config.steps = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config.steps = 1;
    CHECK_NOTHROW(config.validate());
}

TEST_CASE("zero-noise model yields zero RMSE for both schemes") {
    const LinearGaussianModel model(0.0, 0.0, 0.4);
    ExperimentConfig config;
    config.schemes = {{Proposal::pseudorandom, Resampling::residual},
                      {Proposal::lattice, Resampling::residual}};
    config.particle_counts = {16};
    config.trials = 3;
    config.steps = 6;
    config.seed = 11;
    config.threads = 1;
    const auto report = run_rmse(model, config);
    for (const Series& s : report.series) {
        CHECK(s.failed_trials == 0);
        for (const double r : s.rmse)
            CHECK(r == 0.0);
        CHECK(s.mean_mse == 0.0);
    }
}

TEST_CASE("reports are identical across thread counts and reruns") {
    const auto model = make_model("lingauss", {});
    ExperimentConfig config;
    config.schemes = {{Proposal::pseudorandom, Resampling::multinomial},
                      {Proposal::lattice, Resampling::multinomial}};
    config.particle_counts = {16, 32};
    config.trials = 8;
    config.steps = 5;
    config.seed = 99;

    config.threads = 1;
    const auto a = report_to_json(run_rmse(*model, config));
    config.threads = 4;
    const auto b = report_to_json(run_rmse(*model, config));
    config.threads = 3;
    const auto c = report_to_json(run_rmse(*model, config));
    CHECK(a == b);
    CHECK(a == c);
}

TEST_CASE("variance difference definitions") {
    const auto report = synthetic_report({{"pf", 64}, {"lpf", 64}}, {4.0, 1.0});
    CHECK(variance_difference(report, "pf", "pf", 64) == 0.0);
    CHECK(variance_difference(report, "pf", "lpf", 64) == 75.0);
    CHECK(variance_difference(report, "lpf", "pf", 64) == -300.0); // doubled errors
    CHECK(rmse_difference(report, "pf", "lpf", 64) == 50.0);
    CHECK_THROWS_AS(variance_difference(report, "pf", "lpf", 128), std::out_of_range);
}

TEST_CASE("efficiency gain under exact 1/n scaling") {
    // MSE = c / n for the baseline; candidate matches baseline's MSE at 96
    const double c = 3.7;
    const auto report = synthetic_report(
        {{"pf", 64}, {"pf", 96}, {"pf", 128}, {"lpf", 64}},
        {c / 64.0, c / 96.0, c / 128.0, c / 96.0});
    const auto gain = efficiency_gain(report, "pf", "lpf", 64);
    CHECK_FALSE(gain.lower_bound);
    CHECK(gain.percent == doctest::Approx(50.0).epsilon(1e-9));

    // identical schemes: zero extra particles
    const auto self_gain = efficiency_gain(report, "pf", "pf", 96);
    CHECK(self_gain.percent == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("efficiency gain reports a lower bound when the grid cannot match") {
    const auto report = synthetic_report({{"pf", 64}, {"pf", 128}, {"lpf", 64}},
                                         {1.0, 0.5, 0.01});
    const auto gain = efficiency_gain(report, "pf", "lpf", 64);
    CHECK(gain.lower_bound);
    CHECK(gain.max_evaluated_n == 128);
    CHECK(gain.percent == doctest::Approx(100.0));
}

TEST_CASE("ground truth mean approaches the Kalman mean") {
    const LinearGaussianModel model(1.0, 1.0, 0.0);
    Rng rng(123);
    const auto seq = simulate_sequence(model, 11, rng);
    std::vector<double> obs;
    for (std::size_t t = 1; t <= 10; ++t)
        obs.push_back(seq.observations.at_time(t)[0]);
    const auto kalman = kalman_filter(obs, model);

    const auto mean_a = ground_truth_mean(model, seq.observations, 8192, 17);
    const auto mean_b = ground_truth_mean(model, seq.observations, 8192, 18);
    REQUIRE(mean_a.size() == 10);
    for (std::size_t t = 0; t < 10; ++t) {
        CHECK(std::fabs(mean_a[t] - kalman.means[t]) < 0.12);
        CHECK(std::fabs(mean_a[t] - mean_b[t]) < 0.2); // independent reference runs agree
    }
}

TEST_CASE("ensemble spread statistics") {
    SUBCASE("deterministic model has zero spread") {
        const LinearGaussianModel model(0.0, 0.0, 0.4);
        Rng rng(5);
        const auto seq = simulate_sequence(model, 6, rng);
        const auto spread = ensemble_spread(model, seq.observations,
                                            {Proposal::pseudorandom, Resampling::multinomial}, 8,
                                            10, 77);
        CHECK(spread.failed_runs == 0);
        for (const double s : spread.spread)
            CHECK(s == 0.0);
    }
    SUBCASE("noisy model has positive spread and deviation columns") {
        const LinearGaussianModel model(1.0, 1.0, 0.0);
        Rng rng(6);
        const auto seq = simulate_sequence(model, 6, rng);
        const auto reference = ground_truth_mean(model, seq.observations, 4096, 3);
        const auto spread = ensemble_spread(model, seq.observations,
                                            {Proposal::pseudorandom, Resampling::multinomial}, 32,
                                            12, 78, reference);
        CHECK(spread.spread.size() == 5);
        CHECK(spread.mean_abs_dev.size() == 5);
        for (const double s : spread.spread)
            CHECK(s > 0.0);
    }
}

TEST_CASE("disk MSE improves with more particles") {
    DiskModel::Params p;
    p.width = 96;
    p.height = 96;
    const DiskModel model(p);
    ExperimentConfig config;
    config.schemes = {{Proposal::pseudorandom, Resampling::residual},
                      {Proposal::lattice, Resampling::residual}};
    config.particle_counts = {16, 256};
    config.trials = 30;
    config.steps = 10;
    config.seed = 31;
    const auto report = run_rmse(model, config);
    for (const char* scheme : {"pf", "lpf"})
        CHECK(report.find(scheme, 256).mean_mse < report.find(scheme, 16).mean_mse);
}

TEST_CASE("toy benchmark counts lost tracks as failed trials") {
    const ToyBinaryModel model;
    ExperimentConfig config;
    config.schemes = {{Proposal::pseudorandom, Resampling::multinomial}};
    config.particle_counts = {10}; // loses track in roughly 2 of 3 trials
    config.trials = 60;
    config.steps = 10;
    config.seed = 4;
    const auto report = run_rmse(model, config);
    const Series& s = report.find("pf", 10);
    CHECK(s.failed_trials > 0);
    CHECK(s.failed_trials < config.trials);
}

TEST_CASE("report serialization round trip") {
    const auto model = make_model("toy", {});
    ExperimentConfig config;
    config.schemes = {{Proposal::pseudorandom, Resampling::multinomial},
                      {Proposal::lattice, Resampling::multinomial}};
    config.generator = 1;
    config.particle_counts = {10};
    config.trials = 12;
    config.steps = 6;
    config.seed = 7;
    auto report = run_rmse(*model, config);
    report.model = "toy";

    const auto dir = std::filesystem::temp_directory_path() / "lpf_report_test";
    std::filesystem::remove_all(dir);
    write_report(report, dir.string());

    const auto parsed = nlohmann::json::parse(std::ifstream(dir / "report.json"));
    CHECK(parsed["model"] == "toy");
    CHECK(parsed["trials"] == 12);
    CHECK(parsed["series"].size() == 2);
    CHECK(parsed["series"][0]["rmse"].size() == 6);
    CHECK(parsed["comparisons"].size() == 2); // both orderings at n=10

    std::ifstream csv(dir / "rmse.csv");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(csv, line))
        ++rows;
    CHECK(rows == 1 + 2 * 6); // header + series x steps

    CHECK(std::filesystem::exists(dir / "plot.gp"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("parallel_for covers every index exactly once") {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, 7, [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits)
        CHECK(h.load() == 1);
}
