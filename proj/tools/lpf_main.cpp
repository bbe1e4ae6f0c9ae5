#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lpf/config.hpp"
#include "lpf/experiments.hpp"
#include "lpf/lattice.hpp"
#include "lpf/models.hpp"
#include "lpf/particle_filter.hpp"
#include "lpf/sequence.hpp"

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool looks_numeric(const std::string& s) {
    if (s.empty())
        return false;
    try {
        std::size_t pos = 0;
        (void)std::stod(s, &pos);
        return pos == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

// flag > config file > built-in default
struct Resolved {
    std::map<std::string, std::string> values;

    void set(const std::string& key, const std::string& v) { values[key] = v; }
    void set(const std::string& key, std::uint64_t v) { values[key] = std::to_string(v); }
    void set(const std::string& key, std::int64_t v) { values[key] = std::to_string(v); }
    void set(const std::string& key, double v) { values[key] = fmt17(v); }

    void write(const std::filesystem::path& directory) const {
        std::filesystem::create_directories(directory);
        std::ofstream out(directory / "resolved_config.json", std::ios::binary);
        out << "{\n";
        bool first = true;
        for (const auto& [key, value] : values) {
            if (!first)
                out << ",\n";
            first = false;
            out << "  \"" << key << "\": ";
            if (looks_numeric(value))
                out << value;
            else
                out << '"' << value << '"';
        }
        out << "\n}\n";
    }
};

std::vector<std::size_t> parse_count_list(const std::string& text) {
    std::vector<std::size_t> counts;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty())
            continue;
        counts.push_back(static_cast<std::size_t>(std::stoull(item)));
    }
    if (counts.empty())
        throw CLI::ValidationError("--n", "expected a comma-separated list of particle counts");
    return counts;
}

lpf::KeyValueConfig load_config_arg(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config")
            return lpf::KeyValueConfig::load(argv[i + 1]);
    return {};
}

int cmd_lattice_gen(const lpf::KeyValueConfig& file_config, std::uint64_t n, std::size_t dim,
                    std::optional<std::uint64_t> generator, std::optional<std::uint64_t> shift_seed,
                    const std::string& out_path) {
    const std::uint64_t a = generator ? *generator : lpf::generator_for(n, dim);
    std::vector<double> shift;
    if (shift_seed) {
        lpf::Rng rng(*shift_seed);
        shift = lpf::draw_shift(dim, rng);
    }
    const lpf::LatticeRule rule(n, a, dim, std::move(shift));
    const std::vector<double> points = lpf::korobov_points(rule);

    std::ofstream out(out_path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write to '" + out_path + "'");
    for (std::uint64_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < dim; ++k)
            out << (k ? "," : "") << fmt17(points[i * dim + k]);
        out << '\n';
    }

    Resolved resolved;
    for (const auto& [key, value] : file_config.values())
        resolved.set(key, value);
    resolved.set("subcommand", std::string("lattice gen"));
    resolved.set("n", n);
    resolved.set("dim", static_cast<std::uint64_t>(dim));
    resolved.set("generator", a);
    if (shift_seed)
        resolved.set("shift_seed", *shift_seed);
    resolved.set("out", out_path);
    resolved.write(std::filesystem::path(out_path).parent_path().empty()
                       ? "."
                       : std::filesystem::path(out_path).parent_path());
    return 0;
}

int cmd_run_filter(const lpf::KeyValueConfig& file_config, const std::string& model_name,
                   const std::string& scheme, const std::string& resample, std::size_t n,
                   std::size_t steps, std::uint64_t seed, std::optional<std::uint64_t> generator,
                   const std::string& out_path) {
    const auto model = lpf::make_model(model_name, file_config);

    lpf::FilterConfig fc;
    fc.n_particles = n;
    fc.proposal = lpf::proposal_from_string(scheme);
    fc.resampling = lpf::resampling_from_string(resample);
    fc.generator = generator;
    fc.seed = lpf::mix_seed(seed, 1);
    fc.validate(model->state_dim());

    lpf::Rng sim_rng(lpf::mix_seed(seed, 0));
    const lpf::SimulatedSequence seq = lpf::simulate_sequence(*model, steps + 1, sim_rng);

    std::ofstream out(out_path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write to '" + out_path + "'");
    const std::size_t dim = model->state_dim();
    out << "t";
    for (std::size_t k = 0; k < dim; ++k)
        out << ",est_" << k;
    for (std::size_t k = 0; k < dim; ++k)
        out << ",true_" << k;
    out << ",error\n";

    lpf::Filter filter(*model, fc, seq.trajectory.state(0));
    for (std::size_t t = 1; t <= steps; ++t) {
        const lpf::ParticleSet& particles = filter.step(seq.observations.at_time(t));
        const std::vector<double> mean = lpf::weighted_mean(particles);
        double sq = 0.0;
        out << t;
        for (std::size_t k = 0; k < dim; ++k)
            out << ',' << fmt17(mean[k]);
        for (std::size_t k = 0; k < dim; ++k) {
            const double truth = seq.trajectory.state(t)[k];
            const double d = mean[k] - truth;
            sq += d * d;
            out << ',' << fmt17(truth);
        }
        out << ',' << fmt17(std::sqrt(sq)) << '\n';
    }

    Resolved resolved;
    for (const auto& [key, value] : file_config.values())
        resolved.set(key, value);
    resolved.set("subcommand", std::string("run-filter"));
    resolved.set("model", model_name);
    resolved.set("scheme", scheme);
    resolved.set("resample", resample);
    resolved.set("n", static_cast<std::uint64_t>(n));
    resolved.set("steps", static_cast<std::uint64_t>(steps));
    resolved.set("seed", seed);
    if (generator)
        resolved.set("generator", *generator);
    resolved.set("out", out_path);
    resolved.write(std::filesystem::path(out_path).parent_path().empty()
                       ? "."
                       : std::filesystem::path(out_path).parent_path());
    return 0;
}

int cmd_bench(const lpf::KeyValueConfig& file_config, const std::string& model_name,
              const std::string& n_list, const std::string& schemes_csv,
              const std::string& resample, std::size_t trials, std::size_t steps,
              std::uint64_t seed, std::optional<std::uint64_t> generator, unsigned threads,
              bool quiet, const std::string& out_dir) {
    const auto model = lpf::make_model(model_name, file_config);

    lpf::ExperimentConfig config;
    config.particle_counts = parse_count_list(n_list);
    config.trials = trials;
    config.steps = steps;
    config.seed = seed;
    config.threads = threads;
    config.generator = generator;
    {
        std::stringstream in(schemes_csv);
        std::string item;
        while (std::getline(in, item, ','))
            if (!item.empty())
                config.schemes.push_back(
                    {lpf::proposal_from_string(item), lpf::resampling_from_string(resample)});
    }

    if (!quiet)
        std::cerr << "bench " << model_name << ": schemes=" << schemes_csv << " n=" << n_list
                  << " trials=" << trials << " steps=" << steps << " seed=" << seed << "\n";

    lpf::ExperimentReport report = lpf::run_rmse(*model, config);
    report.model = model_name;
    lpf::write_report(report, out_dir);

    Resolved resolved;
    for (const auto& [key, value] : file_config.values())
        resolved.set(key, value);
    resolved.set("subcommand", "bench " + model_name);
    resolved.set("model", model_name);
    resolved.set("schemes", schemes_csv);
    resolved.set("resample", resample);
    resolved.set("n", n_list);
    resolved.set("trials", static_cast<std::uint64_t>(trials));
    resolved.set("steps", static_cast<std::uint64_t>(steps));
    resolved.set("seed", seed);
    if (generator)
        resolved.set("generator", *generator);
    resolved.set("threads", static_cast<std::uint64_t>(threads));
    resolved.set("out", out_dir);
    resolved.write(out_dir);

    if (!quiet)
        std::cerr << "wrote " << (std::filesystem::path(out_dir) / "report.json").string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        const lpf::KeyValueConfig file_config = load_config_arg(argc, argv);
        const auto cfg_str = [&](const char* key, const std::string& fallback) {
            return file_config.get_string(key, fallback);
        };
        const auto cfg_u64 = [&](const char* key, std::uint64_t fallback) {
            return static_cast<std::uint64_t>(
                file_config.get_int(key, static_cast<std::int64_t>(fallback)));
        };

        CLI::App app{"Korobov-lattice and Monte Carlo particle filtering benchmarks"};
        app.require_subcommand(1);
        std::string config_path; // consumed up front; registered so CLI11 accepts it

        auto* lattice_cmd = app.add_subcommand("lattice", "lattice point utilities");
        lattice_cmd->require_subcommand(1);
        auto* gen = lattice_cmd->add_subcommand("gen", "write shifted Korobov points as CSV");
        std::uint64_t gen_n = cfg_u64("n", 0);
        std::size_t gen_dim = static_cast<std::size_t>(cfg_u64("dim", 0));
        std::int64_t gen_generator = static_cast<std::int64_t>(cfg_u64("generator", 0));
        std::int64_t gen_shift_seed = -1;
        if (file_config.has("shift_seed"))
            gen_shift_seed = file_config.get_int("shift_seed", -1);
        std::string gen_out = cfg_str("out", "");
        gen->add_option("--n", gen_n, "sample count");
        gen->add_option("--dim", gen_dim, "point dimension");
        gen->add_option("--generator", gen_generator, "generator override (default: table lookup)");
        gen->add_option("--shift-seed", gen_shift_seed, "seed for the random shift (default: zero shift)");
        gen->add_option("--out", gen_out, "output CSV path");
        gen->add_option("--config", config_path, "key=value or JSON configuration file");

        auto* runf = app.add_subcommand("run-filter", "run one filter over a simulated sequence");
        std::string rf_model = cfg_str("model", "");
        std::string rf_scheme = cfg_str("scheme", "pf");
        std::string rf_resample = cfg_str("resample", "residual");
        std::uint64_t rf_n = cfg_u64("n", 64);
        std::uint64_t rf_steps = cfg_u64("steps", 40);
        std::uint64_t rf_seed = cfg_u64("seed", 0);
        std::int64_t rf_generator = static_cast<std::int64_t>(cfg_u64("generator", 0));
        std::string rf_out = cfg_str("out", "");
        runf->add_option("--model", rf_model, "toy | lingauss | disk | body");
        runf->add_option("--scheme", rf_scheme, "pf | lpf");
        runf->add_option("--resample", rf_resample, "multinomial | residual");
        runf->add_option("--n", rf_n, "particle count");
        runf->add_option("--steps", rf_steps, "filter updates to run");
        runf->add_option("--seed", rf_seed, "base seed");
        runf->add_option("--generator", rf_generator, "lattice generator override");
        runf->add_option("--out", rf_out, "output CSV path");
        runf->add_option("--config", config_path, "key=value or JSON configuration file");

        auto* bench = app.add_subcommand("bench", "multi-trial benchmark experiments");
        bench->require_subcommand(1);
        struct BenchDefaults {
            std::string n;
            std::uint64_t trials, steps;
            std::string generator; // empty = table lookup
        };
        const std::map<std::string, BenchDefaults> bench_defaults = {
            {"disk", {"64", 200, 40, ""}},
            {"toy", {"10", 200, 20, "1"}},
            {"lingauss", {"512", 200, 20, ""}},
            {"body", {"256", 100, 40, ""}},
        };
        struct BenchArgs {
            std::string n, schemes, resample, out;
            std::uint64_t trials = 0, steps = 0, seed = 0;
            std::int64_t generator = 0;
            unsigned threads = 0;
            bool quiet = false;
            CLI::App* cmd = nullptr;
        };
        std::map<std::string, BenchArgs> bench_args;
        for (const auto& [name, defaults] : bench_defaults) {
            BenchArgs& args = bench_args[name];
            args.n = cfg_str("n", defaults.n);
            args.schemes = cfg_str("schemes", "pf,lpf");
            args.resample = cfg_str("resample", "residual");
            args.trials = cfg_u64("trials", defaults.trials);
            args.steps = cfg_u64("steps", defaults.steps);
            args.seed = cfg_u64("seed", 0);
            args.generator = static_cast<std::int64_t>(
                cfg_u64("generator", defaults.generator.empty()
                                         ? 0
                                         : std::stoull(defaults.generator)));
            args.threads = static_cast<unsigned>(cfg_u64("threads", 0));
            args.out = cfg_str("out", "");
            args.cmd = bench->add_subcommand(name, "benchmark the " + name + " model");
            args.cmd->add_option("--n", args.n, "comma-separated particle counts");
            args.cmd->add_option("--schemes", args.schemes, "comma-separated schemes (pf,lpf)");
            args.cmd->add_option("--resample", args.resample, "multinomial | residual");
            args.cmd->add_option("--trials", args.trials, "independent trials");
            args.cmd->add_option("--steps", args.steps, "filter updates per trial");
            args.cmd->add_option("--seed", args.seed, "base seed");
            args.cmd->add_option("--generator", args.generator, "lattice generator override");
            args.cmd->add_option("--threads", args.threads, "worker cap (0 = machine parallelism)");
            args.cmd->add_flag("--quiet", args.quiet, "suppress progress output");
            args.cmd->add_option("--out", args.out, "output directory");
            args.cmd->add_option("--config", config_path, "key=value or JSON configuration file");
        }

        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            if (e.get_exit_code() == 0) { // --help
                return app.exit(e);
            }
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }

        if (gen->parsed()) {
            if (gen_n == 0 || gen_dim == 0)
                throw std::invalid_argument("lattice gen requires --n and --dim");
            if (gen_out.empty())
                throw std::invalid_argument("lattice gen requires --out");
            return cmd_lattice_gen(file_config, gen_n, gen_dim,
                                   gen_generator > 0
                                       ? std::optional<std::uint64_t>(gen_generator)
                                       : std::nullopt,
                                   gen_shift_seed >= 0
                                       ? std::optional<std::uint64_t>(gen_shift_seed)
                                       : std::nullopt,
                                   gen_out);
        }
        if (runf->parsed()) {
            if (rf_model.empty())
                throw std::invalid_argument("run-filter requires --model");
            if (rf_out.empty())
                throw std::invalid_argument("run-filter requires --out");
            return cmd_run_filter(file_config, rf_model, rf_scheme, rf_resample,
                                  static_cast<std::size_t>(rf_n),
                                  static_cast<std::size_t>(rf_steps), rf_seed,
                                  rf_generator > 0
                                      ? std::optional<std::uint64_t>(rf_generator)
                                      : std::nullopt,
                                  rf_out);
        }
        for (auto& [name, args] : bench_args) {
            if (!args.cmd->parsed())
                continue;
            if (args.out.empty())
                throw std::invalid_argument("bench requires --out");
            return cmd_bench(file_config, name, args.n, args.schemes, args.resample,
                             static_cast<std::size_t>(args.trials),
                             static_cast<std::size_t>(args.steps), args.seed,
                             args.generator > 0
                                 ? std::optional<std::uint64_t>(args.generator)
                                 : std::nullopt,
                             args.threads, args.quiet, args.out);
        }
        std::cerr << "error: no subcommand given\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
