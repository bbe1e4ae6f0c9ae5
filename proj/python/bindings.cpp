#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "lpf/experiments.hpp"
#include "lpf/lattice.hpp"
#include "lpf/models.hpp"
#include "lpf/particle_filter.hpp"
#include "lpf/sequence.hpp"
#include "lpf/transforms.hpp"

namespace py = pybind11;

namespace {

lpf::KeyValueConfig config_from_dict(const py::dict& overrides) {
    lpf::KeyValueConfig config;
    for (const auto& item : overrides)
        config.set(py::str(item.first).cast<std::string>(),
                   py::str(item.second).cast<std::string>());
    return config;
}

std::vector<std::vector<double>> korobov_points_py(std::uint64_t n, std::uint64_t generator,
                                                   std::size_t dims,
                                                   std::optional<std::vector<double>> shift) {
    const lpf::LatticeRule rule(n, generator, dims, shift.value_or(std::vector<double>{}));
    const auto flat = lpf::korobov_points(rule);
    std::vector<std::vector<double>> rows(n, std::vector<double>(dims));
    for (std::uint64_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < dims; ++k)
            rows[i][k] = flat[i * dims + k];
    return rows;
}

py::dict run_filter_py(const std::string& model_name, const std::string& scheme,
                       const std::string& resample, std::size_t n, std::size_t steps,
                       std::uint64_t seed, std::optional<std::uint64_t> generator,
                       const py::dict& model_config) {
    const auto model = lpf::make_model(model_name, config_from_dict(model_config));

    lpf::FilterConfig fc;
    fc.n_particles = n;
    fc.proposal = lpf::proposal_from_string(scheme);
    fc.resampling = lpf::resampling_from_string(resample);
    fc.generator = generator;
    fc.seed = lpf::mix_seed(seed, 1);
    fc.validate(model->state_dim());

    lpf::Rng sim_rng(lpf::mix_seed(seed, 0));
    const auto seq = lpf::simulate_sequence(*model, steps + 1, sim_rng);

    std::vector<std::vector<double>> estimates, truth;
    std::vector<double> errors;
    lpf::Filter filter(*model, fc, seq.trajectory.state(0));
    for (std::size_t t = 1; t <= steps; ++t) {
        const auto& particles = filter.step(seq.observations.at_time(t));
        const auto mean = lpf::weighted_mean(particles);
        const auto x = seq.trajectory.state(t);
        double sq = 0.0;
        for (std::size_t k = 0; k < mean.size(); ++k)
            sq += (mean[k] - x[k]) * (mean[k] - x[k]);
        estimates.push_back(mean);
        truth.emplace_back(x.begin(), x.end());
        errors.push_back(std::sqrt(sq));
    }

    py::dict out;
    out["estimates"] = estimates;
    out["truth"] = truth;
    out["errors"] = errors;
    return out;
}

std::string run_bench_json(const std::string& model_name, const std::vector<std::size_t>& counts,
                           std::size_t trials, std::size_t steps, std::uint64_t seed,
                           const std::string& schemes, const std::string& resample,
                           std::optional<std::uint64_t> generator, unsigned threads,
                           const py::dict& model_config) {
    const auto model = lpf::make_model(model_name, config_from_dict(model_config));
    lpf::ExperimentConfig config;
    config.particle_counts = counts;
    config.trials = trials;
    config.steps = steps;
    config.seed = seed;
    config.threads = threads;
    config.generator = generator;
    std::stringstream in(schemes);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty())
            config.schemes.push_back(
                {lpf::proposal_from_string(item), lpf::resampling_from_string(resample)});
    auto report = lpf::run_rmse(*model, config);
    report.model = model_name;
    return lpf::report_to_json(report);
}

std::pair<std::vector<double>, std::vector<double>>
kalman_filter_py(const std::vector<double>& observations, double trans_std, double obs_std,
                 double init_state, double init_std) {
    const lpf::LinearGaussianModel model(trans_std, obs_std, init_state, init_std);
    const auto result = lpf::kalman_filter(observations, model);
    return {result.means, result.variances};
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Korobov-lattice and Monte Carlo particle filtering";

    m.def("generator_for", &lpf::generator_for, py::arg("n"), py::arg("state_dim"),
          "Tabulated Korobov generator for a sample count and state dimension");
    m.def("korobov_points", &korobov_points_py, py::arg("n"), py::arg("generator"),
          py::arg("dims"), py::arg("shift") = std::nullopt,
          "Points of the shifted Korobov rule, as n rows of dims coordinates");
    m.def("inv_normal_cdf", &lpf::inv_normal_cdf, py::arg("u"));
    m.def("normal_cdf", &lpf::normal_cdf, py::arg("z"));
    m.def(
        "gaussian_step",
        [](const std::vector<double>& u, const std::vector<double>& x_prev,
           const std::vector<double>& sigma) { return lpf::gaussian_step(u, x_prev, sigma); },
        py::arg("u"), py::arg("x_prev"), py::arg("sigma"));
    m.def("toy_loss_probability", &lpf::toy_loss_probability, py::arg("k"), py::arg("n"),
          py::arg("p"));
    m.def("kalman_filter", &kalman_filter_py, py::arg("observations"), py::arg("trans_std"),
          py::arg("obs_std"), py::arg("init_state") = 0.0, py::arg("init_std") = 0.0,
          "Per-step posterior means and variances of the 1-D linear-Gaussian model");
    m.def(
        "body_forward_kinematics",
        [](const std::vector<double>& angles) {
            const lpf::BodyModel model;
            const auto markers = model.forward_kinematics(angles);
            return std::vector<std::array<double, 3>>(markers.begin(), markers.end());
        },
        py::arg("angles"), "Marker positions of the default articulated lower body");
    m.def("project", &lpf::project, py::arg("marker"), py::arg("camera_center"));
    m.def("run_filter", &run_filter_py, py::arg("model"), py::arg("scheme") = "pf",
          py::arg("resample") = "residual", py::arg("n") = 64, py::arg("steps") = 40,
          py::arg("seed") = 0, py::arg("generator") = std::nullopt,
          py::arg("model_config") = py::dict(),
          "Simulate a sequence and run one filter; returns estimates, truth and errors");
    m.def("run_bench_json", &run_bench_json, py::arg("model"), py::arg("n"), py::arg("trials"),
          py::arg("steps"), py::arg("seed") = 0, py::arg("schemes") = "pf,lpf",
          py::arg("resample") = "residual", py::arg("generator") = std::nullopt,
          py::arg("threads") = 0, py::arg("model_config") = py::dict(),
          "Multi-trial RMSE benchmark; returns the report as a JSON string");
}
