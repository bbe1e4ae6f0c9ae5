#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

#include "lpf/models/lingauss.hpp"
#include "lpf/models/toy.hpp"
#include "lpf/particle_filter.hpp"
#include "oracles.hpp"

using namespace lpf;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log-likelihood equals the state's first component; transform passes the
// uniform vector through
class ScoreModel : public StateSpaceModel {
public:
    explicit ScoreModel(std::size_t dim = 1) : dim_(dim) {}
    std::size_t state_dim() const override { return dim_; }
    std::size_t obs_dim() const override { return 1; }
    std::vector<double> initial_state() const override { return std::vector<double>(dim_, 0.0); }
    void transform(std::span<const double> u, std::span<const double>,
                   std::span<double> x_out) const override {
        std::copy(u.begin(), u.end(), x_out.begin());
    }
    double log_likelihood(const PreparedObservation&, std::span<const double> x) const override {
        return x[0];
    }
    void simulate_transition(std::span<const double> x, std::span<double> out,
                             Rng&) const override {
        std::copy(x.begin(), x.end(), out.begin());
    }
    void simulate_observation(std::span<const double>, std::span<double> out,
                              Rng&) const override {
        out[0] = 0.0;
    }

private:
    std::size_t dim_;
};

// transform ignores the uniforms and keeps the ancestor state
class IdentityModel : public ScoreModel {
public:
    explicit IdentityModel(std::size_t dim = 1) : ScoreModel(dim) {}
    void transform(std::span<const double>, std::span<const double> x_prev,
                   std::span<double> x_out) const override {
        std::copy(x_prev.begin(), x_prev.end(), x_out.begin());
    }
    double log_likelihood(const PreparedObservation&, std::span<const double>) const override {
        return 0.0;
    }
};

ParticleSet set_with(std::vector<double> states, std::vector<double> weights) {
    ParticleSet ps(weights.size(), states.size() / weights.size());
    ps.states = std::move(states);
    ps.weights = std::move(weights);
    return ps;
}

} // namespace

TEST_CASE("reweight normalizes likelihood ratios") {
    const ScoreModel model;
    const double y[1] = {0.0};

    SUBCASE("equal likelihoods") {
        const auto out = reweight(set_with({0.3, 0.3}, {0.9, 0.1}), std::span<const double>(y), model);
        CHECK(out.weights[0] == 0.5);
        CHECK(out.weights[1] == 0.5);
    }
    SUBCASE("impossible particle gets zero weight") {
        const auto out = reweight(set_with({0.0, -kInf}, {0.5, 0.5}), std::span<const double>(y), model);
        CHECK(out.weights[0] == 1.0);
        CHECK(out.weights[1] == 0.0);
    }
    SUBCASE("log-likelihood gap of ln 3") {
        const auto out =
            reweight(set_with({0.0, std::log(3.0)}, {0.5, 0.5}), std::span<const double>(y), model);
        CHECK(out.weights[0] == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(out.weights[1] == doctest::Approx(0.75).epsilon(1e-14));
    }
    SUBCASE("all impossible raises degenerate weights") {
        CHECK_THROWS_AS(reweight(set_with({-kInf, -kInf}, {0.5, 0.5}), std::span<const double>(y), model),
                        DegenerateWeightsError);
    }
    SUBCASE("huge log-likelihoods do not overflow") {
        const auto out =
            reweight(set_with({5000.0, 5000.0 + std::log(3.0)}, {0.5, 0.5}),
                     std::span<const double>(y), model);
        CHECK(out.weights[0] == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(out.weights[1] == doctest::Approx(0.75).epsilon(1e-12));
    }
}

TEST_CASE("reweight keeps weights summing to one") {
    const ScoreModel model;
    Rng rng(55);
    const double y[1] = {0.0};
    for (int rep = 0; rep < 50; ++rep) {
        ParticleSet ps(37, 1);
        for (std::size_t i = 0; i < 37; ++i)
            ps.state(i)[0] = -50.0 * rng.uniform();
        const auto out = reweight(ps, std::span<const double>(y), model);
        double sum = 0.0;
        for (const double w : out.weights)
            sum += w;
        CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("multinomial resampling") {
    Rng rng(10);
    SUBCASE("degenerate weights select one ancestor") {
        const auto idx = multinomial_resample(set_with({0, 0, 0}, {1.0, 0.0, 0.0}), rng);
        for (const auto i : idx)
            CHECK(i == 0);
    }
    SUBCASE("single particle") {
        const auto idx = multinomial_resample(set_with({0.0}, {1.0}), rng);
        CHECK(idx == std::vector<std::uint32_t>{0});
    }
    SUBCASE("frequencies follow the weights") {
        const auto ps = set_with({0, 0}, {0.5, 0.5});
        std::size_t first = 0, total = 0;
        for (int rep = 0; rep < 5000; ++rep)
            for (const auto i : multinomial_resample(ps, rng)) {
                first += i == 0;
                ++total;
            }
        CHECK(std::fabs(static_cast<double>(first) / total - 0.5) < 0.015);
    }
}

TEST_CASE("residual resampling") {
    Rng rng(20);
    SUBCASE("integer expectations are deterministic") {
        auto idx = residual_resample(set_with({0, 0, 0, 0}, {0.5, 0.5, 0.0, 0.0}), rng);
        std::sort(idx.begin(), idx.end());
        CHECK(idx == std::vector<std::uint32_t>{0, 0, 1, 1});

        auto idx2 = residual_resample(set_with({0, 0, 0, 0, 0, 0, 0, 0},
                                               {0.25, 0.25, 0.5, 0, 0, 0, 0, 0}),
                                      rng);
        CHECK(std::count(idx2.begin(), idx2.end(), 0u) == 2);
        CHECK(std::count(idx2.begin(), idx2.end(), 1u) == 2);
        CHECK(std::count(idx2.begin(), idx2.end(), 2u) == 4);
    }
    SUBCASE("all mass on one particle") {
        const auto idx = residual_resample(set_with({0, 0, 0}, {1.0, 0.0, 0.0}), rng);
        for (const auto i : idx)
            CHECK(i == 0);
    }
    SUBCASE("fractional remainder is drawn multinomially") {
        const auto ps = set_with({0, 0}, {0.75, 0.25});
        std::size_t second_zero = 0;
        const int reps = 20000;
        for (int rep = 0; rep < reps; ++rep) {
            const auto idx = residual_resample(ps, rng);
            REQUIRE(idx.size() == 2);
            CHECK(idx[0] == 0); // floor(2 * 0.75) = 1 deterministic copy
            second_zero += idx[1] == 0;
        }
        CHECK(std::fabs(static_cast<double>(second_zero) / reps - 0.5) < 0.011);
    }
}

TEST_CASE("both resamplers are unbiased") {
    const std::vector<double> weights = {0.05, 0.3, 0.15, 0.25, 0.05, 0.2};
    const auto ps = set_with(std::vector<double>(6, 0.0), weights);
    const std::size_t reps = 10000;
    for (const bool residual : {false, true}) {
        Rng rng(residual ? 6060 : 7070);
        std::vector<double> counts(6, 0.0);
        for (std::size_t rep = 0; rep < reps; ++rep) {
            const auto idx =
                residual ? residual_resample(ps, rng) : multinomial_resample(ps, rng);
            for (const auto i : idx)
                counts[i] += 1.0;
        }
        for (std::size_t j = 0; j < 6; ++j) {
            const double expected = 6.0 * weights[j];
            // multinomial per-rep count std, conservative for residual too
            const double bound =
                3.0 * std::sqrt(6.0 * weights[j] * (1.0 - weights[j]) / static_cast<double>(reps));
            CHECK(std::fabs(counts[j] / static_cast<double>(reps) - expected) < bound + 1e-9);
        }
    }
}

TEST_CASE("propagate maps ancestors through the transform") {
    SUBCASE("identity transform permutes states") {
        const IdentityModel model;
        const auto ps = set_with({1.0, 2.0, 3.0}, {0.2, 0.3, 0.5});
        const std::vector<std::uint32_t> idx = {2, 0, 2};
        const auto out = propagate(ps, idx, {0.1, 0.2, 0.3}, model);
        CHECK(out.state(0)[0] == 3.0);
        CHECK(out.state(1)[0] == 1.0);
        CHECK(out.state(2)[0] == 3.0);
        for (const double w : out.weights)
            CHECK(w == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("gaussian median keeps the ancestor") {
        const LinearGaussianModel model(2.0, 1.0);
        const auto ps = set_with({4.0, -1.0}, {0.5, 0.5});
        const auto out = propagate(ps, std::vector<std::uint32_t>{1, 0}, {0.5, 0.5}, model);
        CHECK(out.state(0)[0] == -1.0);
        CHECK(out.state(1)[0] == 4.0);
    }
    SUBCASE("disk-style step: sigma times the 0.975 quantile") {
        const LinearGaussianModel model(5.0, 1.0);
        const auto ps = set_with({10.0}, {1.0});
        const auto out = propagate(ps, std::vector<std::uint32_t>{0}, {0.975}, model);
        CHECK(out.state(0)[0] == doctest::Approx(10.0 + 9.79981992270027).epsilon(1e-9));
    }
}

TEST_CASE("pf_step on a deterministic model keeps all particles at the truth") {
    const IdentityModel model;
    FilterConfig config;
    config.n_particles = 8;
    Rng rng(1);
    const auto start = ParticleSet::filled(8, std::vector<double>{3.25});
    const double y[1] = {0.0};
    const auto out = pf_step(start, std::span<const double>(y), model, config, rng);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(out.state(i)[0] == 3.25);
        CHECK(out.weights[i] == doctest::Approx(0.125));
    }
}

TEST_CASE("pf_step with one particle is a weighted random walk") {
    const LinearGaussianModel model(1.0, 1.0);
    FilterConfig config;
    config.n_particles = 1;
    Rng rng(2);
    auto ps = ParticleSet::filled(1, std::vector<double>{0.0});
    const double y[1] = {0.0};
    for (int t = 0; t < 10; ++t) {
        ps = pf_step(ps, std::span<const double>(y), model, config, rng);
        CHECK(ps.weights[0] == 1.0);
    }
}

TEST_CASE("lpf_step uses exactly the shifted lattice point set") {
    const ScoreModel model(2); // records the uniforms in the state
    FilterConfig config;
    config.n_particles = 16;
    config.proposal = Proposal::lattice;
    const LatticeRule rule(16, 3, 2);

    Rng rng(77);
    Rng probe(77); // replay the step's draw order: resample, shift, permutation
    const auto start = ParticleSet::filled(16, std::vector<double>{0.0, 0.0});
    for (std::size_t i = 0; i < 16; ++i)
        (void)probe.uniform(); // multinomial resampling consumes n draws
    const auto shift = draw_shift(2, probe);

    const double y[1] = {0.0};
    const auto out = lpf_step(start, std::span<const double>(y), model, config, rule, rng);

    std::set<std::pair<double, double>> expected, got;
    const auto pts = korobov_points(rule.with_shift(shift));
    for (std::size_t i = 0; i < 16; ++i) {
        expected.emplace(pts[2 * i], pts[2 * i + 1]);
        got.emplace(out.state(i)[0], out.state(i)[1]);
    }
    CHECK(expected == got);
}

TEST_CASE("lpf_step validates rule agreement") {
    const ScoreModel model(2);
    FilterConfig config;
    config.n_particles = 16;
    config.proposal = Proposal::lattice;
    Rng rng(1);
    const auto start = ParticleSet::filled(16, std::vector<double>{0.0, 0.0});
    const double y[1] = {0.0};
    CHECK_THROWS_AS(
        lpf_step(start, std::span<const double>(y), model, config, LatticeRule(32, 3, 2), rng),
        std::invalid_argument);
    CHECK_THROWS_AS(
        lpf_step(start, std::span<const double>(y), model, config, LatticeRule(16, 3, 3), rng),
        std::invalid_argument);
}

TEST_CASE("equidistant lattice proposals always cover the toy trigger region") {
    const ToyBinaryModel model;
    FilterConfig config;
    config.n_particles = 10;
    config.proposal = Proposal::lattice;
    config.generator = 1;
    config.resampling = Resampling::multinomial;
    const LatticeRule rule(10, 1, 1);
    Rng rng(123);
    const double y[1] = {1.0};
    auto ps = ParticleSet::filled(10, std::vector<double>{0.1});
    for (int t = 0; t < 50; ++t) {
        ps = lpf_step(ps, std::span<const double>(y), model, config, rule, rng);
        int covered = 0;
        for (std::size_t i = 0; i < 10; ++i)
            covered += ps.state(i)[0] < 0.2;
        CHECK(covered == 2);
    }
}

TEST_CASE("estimate is a self-normalized weighted average") {
    SUBCASE("uniform weights give the arithmetic mean") {
        const auto ps = set_with({1.0, 2.0, 6.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
        const auto m = estimate(ps, [](std::span<const double> x) {
            return std::vector<double>{x[0]};
        });
        CHECK(m[0] == doctest::Approx(3.0).epsilon(1e-15));
    }
    SUBCASE("weighted two-point example") {
        const auto ps = set_with({0.0, 4.0}, {0.25, 0.75});
        const auto m = estimate(ps, [](std::span<const double> x) {
            return std::vector<double>{x[0]};
        });
        CHECK(m[0] == 3.0);
        CHECK(weighted_mean(ps)[0] == 3.0);
    }
    SUBCASE("indicator over the surviving support is exactly one") {
        const ToyBinaryModel model;
        // 10 particles, 3 inside the trigger region
        ParticleSet ps(10, 1);
        for (std::size_t i = 0; i < 10; ++i)
            ps.state(i)[0] = i < 3 ? 0.05 + 0.01 * static_cast<double>(i) : 0.3 + 0.07 * static_cast<double>(i);
        const double y[1] = {1.0};
        const auto post = reweight(ps, std::span<const double>(y), model);
        const auto p = estimate(post, [](std::span<const double> x) {
            return std::vector<double>{x[0] < 0.2 ? 1.0 : 0.0};
        });
        CHECK(p[0] == 1.0); // exact
    }
}

TEST_CASE("filter runner validates lattice configurations") {
    const ToyBinaryModel model;
    FilterConfig config;
    config.n_particles = 10;
    config.proposal = Proposal::lattice;
    CHECK_THROWS_AS(Filter(model, config), std::invalid_argument); // 10 not tabulated
    config.generator = 2;                                          // gcd(2,10) = 2
    CHECK_THROWS_AS(Filter(model, config), std::invalid_argument);
    config.generator = 1;
    CHECK_NOTHROW(Filter(model, config));
}

TEST_CASE("degenerate weights error carries the failing step") {
    const ToyBinaryModel model;
    FilterConfig config;
    config.n_particles = 2; // loses track quickly
    config.seed = 5;
    Filter filter(model, config);
    const double y[1] = {1.0};
    long failed_at = 0;
    try {
        for (int t = 1; t <= 200; ++t)
            filter.step(std::span<const double>(y));
    } catch (const DegenerateWeightsError& e) {
        failed_at = e.time_step();
    }
    CHECK(failed_at >= 1);
    CHECK(failed_at == filter.time());
}

TEST_CASE("pf and lpf-machinery with iid points agree on the linear-Gaussian model") {
    const LinearGaussianModel model(1.0, 1.0, 0.0);
    // fixed observation sequence
    Rng sim(404);
    std::vector<double> obs(6);
    double x = 0.0;
    for (auto& y : obs) {
        double nx;
        model.simulate_transition({&x, 1}, {&nx, 1}, sim);
        x = nx;
        double yo;
        model.simulate_observation({&x, 1}, {&yo, 1}, sim);
        y = yo;
    }

    const std::size_t runs = 150, n = 64;
    std::vector<double> final_pf, final_iid;
    for (std::size_t r = 0; r < runs; ++r) {
        FilterConfig config;
        config.n_particles = n;
        config.seed = mix_seed(1000, r);
        Filter filter(model, config);
        for (const double y : obs)
            filter.step(std::span<const double>(&y, 1));
        final_pf.push_back(weighted_mean(filter.particles())[0]);
    }
    for (std::size_t r = 0; r < runs; ++r) {
        FilterConfig config;
        config.n_particles = n;
        config.seed = mix_seed(2000, r);
        Filter filter(model, config);
        Rng points_rng(mix_seed(3000, r));
        for (const double y : obs) {
            std::vector<double> points(n);
            for (auto& p : points)
                p = points_rng.uniform();
            filter.step_with_points(std::span<const double>(&y, 1), points);
        }
        final_iid.push_back(weighted_mean(filter.particles())[0]);
    }
    const double se = std::sqrt(oracle::variance_of(final_pf) / runs +
                                oracle::variance_of(final_iid) / runs);
    CHECK(std::fabs(oracle::mean_of(final_pf) - oracle::mean_of(final_iid)) < 4.0 * se);
}

TEST_CASE("particle set construction") {
    CHECK_THROWS_AS(ParticleSet(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(ParticleSet(4, 0), std::invalid_argument);
    const auto ps = ParticleSet::filled(3, std::vector<double>{1.0, 2.0});
    CHECK(ps.size() == 3);
    CHECK(ps.dim == 2);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(ps.state(i)[0] == 1.0);
        CHECK(ps.state(i)[1] == 2.0);
    }
}
