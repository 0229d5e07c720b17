#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "cmex/cmex.hpp"
#include "oracles.hpp"

using namespace cmex;

namespace {

// empirical pmf over 0..max from repeated single-species draws
std::vector<double> empirical(const std::vector<std::int64_t>& draws, std::int64_t max) {
  std::vector<double> pmf(static_cast<std::size_t>(max) + 1, 0.0);
  for (std::int64_t d : draws)
    if (d >= 0 && d <= max) pmf[static_cast<std::size_t>(d)] += 1.0;
  for (double& v : pmf) v /= static_cast<double>(draws.size());
  return pmf;
}

ReactionModel isomer_small(std::vector<int> caps, double rate) {
  return ReactionModel({"A", "B"}, std::move(caps), {{-1, 1}, {1, -1}},
                       {PropensitySpec{rate, {{0, 1}}}, PropensitySpec{rate, {{1, 1}}}});
}

}  // namespace

TEST_CASE("rng streams are reproducible and id-separated") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  bool all_equal_c = true;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t va = a.next_u64();
    REQUIRE(va == b.next_u64());
    all_equal_c = all_equal_c && va == c.next_u64();
  }
  REQUIRE_FALSE(all_equal_c);
}

TEST_CASE("poisson sampler") {
  RngStream rng(1234, 0);

  SECTION("mean zero always returns zero") {
    for (int i = 0; i < 100; ++i) REQUIRE(sample_poisson(rng, 0.0) == 0);
  }

  SECTION("invalid means are rejected") {
    REQUIRE_THROWS_AS(sample_poisson(rng, -1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_poisson(rng, std::numeric_limits<double>::infinity()),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(sample_poisson(rng, std::numeric_limits<double>::quiet_NaN()),
                      std::invalid_argument);
  }

  SECTION("mean 4: sample mean and variance inside 3-sigma CLT bands at 1e6 draws") {
    const std::int64_t n = 1000000;
    double sum = 0.0, sumsq = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double k = static_cast<double>(sample_poisson(rng, 4.0));
      sum += k;
      sumsq += k * k;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = sumsq / static_cast<double>(n) - mean * mean;
    REQUIRE_THAT(mean, Catch::Matchers::WithinAbs(4.0, 0.006));
    REQUIRE_THAT(var, Catch::Matchers::WithinAbs(4.0, 0.02));
  }

  SECTION("mean 1e4 exercises the large-mean path: mean inside 1e4 +- 0.95 at 1e5 draws") {
    const std::int64_t n = 100000;
    double sum = 0.0;
    for (std::int64_t i = 0; i < n; ++i) sum += static_cast<double>(sample_poisson(rng, 1e4));
    REQUIRE_THAT(sum / static_cast<double>(n), Catch::Matchers::WithinAbs(1e4, 0.95));
  }

  SECTION("transformed-rejection branch matches the analytic pmf in TV") {
    const std::int64_t n = 100000;
    std::vector<std::int64_t> draws(static_cast<std::size_t>(n));
    for (auto& d : draws) d = sample_poisson(rng, 15.0);
    const auto emp = empirical(draws, 60);
    std::vector<double> pmf(61);
    for (int k = 0; k <= 60; ++k) pmf[static_cast<std::size_t>(k)] = oracle::poisson_pmf(k, 15.0);
    REQUIRE(tv_distance(emp, pmf) < 0.01);
  }
}

TEST_CASE("ssa") {
  SECTION("all rates zero freezes the state") {
    const ReactionModel model({"A"}, {5}, {{1}}, {PropensitySpec{0.0, {}}});
    RngStream rng(9, 0);
    const TrajectoryResult res = ssa_run(model, State{3}, 2.0, rng);
    REQUIRE(res.final_state == State{3});
    REQUIRE(res.steps_taken == 0);
  }

  SECTION("isomer conservation holds after every event") {
    const BuiltinSystem sys = builtin_isomer();
    RngStream rng(5, 0);
    State x = sys.init.state;
    double t = 0.0;
    std::vector<double> buf;
    int events = 0;
    while (t < 0.2) {
      if (ssa_step(sys.model, x, t, 0.2, rng, buf)) ++events;
      REQUIRE(x[0] + x[1] == 80);
    }
    REQUIRE(events > 50);
  }

  SECTION("a fixed (seed, id) pair reproduces the trajectory bit for bit") {
    const BuiltinSystem sys = builtin_isomer();
    RngStream r1(77, 3), r2(77, 3);
    const TrajectoryResult a = ssa_run(sys.model, sys.init.state, 1.0, r1);
    const TrajectoryResult b = ssa_run(sys.model, sys.init.state, 1.0, r2);
    REQUIRE(a.final_state == b.final_state);
    REQUIRE(a.steps_taken == b.steps_taken);
  }

  SECTION("empirical marginal approaches the exact density") {
    const ReactionModel model = isomer_small({10, 10}, 10.0);
    const StateSpace space({10, 10});
    const auto exact = exact_solution(model, space, State{5, 5}, 5.0);
    const auto exact_marg = marginal(exact, space, 0);
    const EnsembleResult ens =
        run_ensemble(SampleMethod::ssa, model, State{5, 5}, 5.0, 0.0, 3000, 2024);
    REQUIRE(tv_distance(marginal(ens, 0), exact_marg) < 0.05);
  }
}

TEST_CASE("tau-leap") {
  SECTION("zero propensities leave the state unchanged") {
    const ReactionModel model({"A"}, {5}, {{-1}}, {PropensitySpec{1.0, {{0, 1}}}});
    RngStream rng(3, 0);
    std::vector<double> buf;
    State x{0};  // death channel with nothing to consume
    REQUIRE(tau_leap_step(model, x, 0.5, rng, buf) == 0);
    REQUIRE(x == State{0});
  }

  SECTION("tau must be positive") {
    const BuiltinSystem sys = builtin_isomer();
    RngStream rng(3, 0);
    std::vector<double> buf;
    State x = sys.init.state;
    REQUIRE_THROWS_AS(tau_leap_step(sys.model, x, 0.0, rng, buf), std::invalid_argument);
  }

  SECTION("isomer conservation holds after every leap") {
    const BuiltinSystem sys = builtin_isomer();
    RngStream rng(11, 0);
    std::vector<double> buf;
    State x = sys.init.state;
    for (int step = 0; step < 200; ++step) {
      tau_leap_step(sys.model, x, 0.01, rng, buf);
      REQUIRE(x[0] + x[1] == 80);
    }
  }

  SECTION("one leap of a single channel is the analytic Poisson image") {
    // constant-rate birth: X after one leap is x0 + K, K ~ Poisson(3)
    const ReactionModel model({"A"}, {60}, {{1}}, {PropensitySpec{3.0, {}}});
    RngStream rng(21, 0);
    std::vector<double> buf;
    std::vector<std::int64_t> finals(100000);
    for (auto& f : finals) {
      State x{0};
      tau_leap_step(model, x, 1.0, rng, buf);
      f = x[0];
    }
    const auto emp = empirical(finals, 30);
    std::vector<double> pmf(31);
    for (int k = 0; k <= 30; ++k) pmf[static_cast<std::size_t>(k)] = oracle::poisson_pmf(k, 3.0);
    REQUIRE(tv_distance(emp, pmf) < 0.01);
  }

  SECTION("negative populations are clamped and counted") {
    const ReactionModel model({"A"}, {900}, {{-1}}, {PropensitySpec{50.0, {{0, 1}}}});
    RngStream rng(8, 0);
    std::vector<double> buf;
    State x{2};
    const std::uint64_t clamps = tau_leap_step(model, x, 10.0, rng, buf);
    REQUIRE(clamps == 1);
    REQUIRE(x == State{0});
  }
}

TEST_CASE("accelerated tau-leap") {
  SECTION("single channel is bit-identical to the plain leap") {
    const ReactionModel model({"A"}, {200}, {{1}}, {PropensitySpec{7.0, {}}});
    for (std::uint64_t id = 0; id < 50; ++id) {
      RngStream r1(99, id), r2(99, id);
      std::vector<double> buf;
      State a{5}, b{5};
      tau_leap_step(model, a, 0.8, r1, buf);
      accelerated_step(model, b, 0.8, r2);
      REQUIRE(a == b);
    }
  }

  SECTION("zero-propensity intermediates pass through unchanged") {
    const ReactionModel model({"A", "B"}, {5, 5}, {{-1, 0}, {0, -1}},
                              {PropensitySpec{1.0, {{0, 1}}}, PropensitySpec{1.0, {{1, 1}}}});
    RngStream rng(12, 0);
    State x{0, 0};
    REQUIRE(accelerated_step(model, x, 1.0, rng) == 0);
    REQUIRE(x == State{0, 0});
  }

  SECTION("isomer conservation holds across accelerated steps") {
    const BuiltinSystem sys = builtin_isomer();
    RngStream rng(13, 0);
    State x = sys.init.state;
    for (int step = 0; step < 200; ++step) {
      accelerated_step(sys.model, x, 0.01, rng);
      REQUIRE(x[0] + x[1] == 80);
    }
  }

  SECTION("with constant propensities one step matches the reaction-product density") {
    const ReactionModel model({"A"}, {80}, {{1}, {2}},
                              {PropensitySpec{2.0, {}}, PropensitySpec{3.0, {}}});
    const StateSpace space({80});
    const double tau = 1.0;
    const auto density = reaction_product_density(model, space, State{0}, tau);
    std::vector<double> density_x(static_cast<std::size_t>(space.size()));
    for (std::int64_t i = 0; i < space.size(); ++i) density_x[static_cast<std::size_t>(i)] = density[i];

    RngStream rng(31, 0);
    std::vector<std::int64_t> finals(100000);
    for (auto& f : finals) {
      State x{0};
      accelerated_step(model, x, tau, rng);
      f = x[0];
    }
    REQUIRE(tv_distance(empirical(finals, 80), density_x) < 0.01);
  }
}

TEST_CASE("half-split accelerated tau-leap") {
  SECTION("M=1 falls back to the accelerated step, bit for bit") {
    const ReactionModel model({"A"}, {200}, {{1}}, {PropensitySpec{7.0, {}}});
    RngStream r1(55, 0), r2(55, 0);
    State a{5}, b{5};
    accelerated_half_split_step(model, a, 0.8, r1);
    accelerated_step(model, b, 0.8, r2);
    REQUIRE(a == b);
  }

  SECTION("M=2: both blocks freeze at the start state, matching one plain leap in distribution") {
    const ReactionModel model = isomer_small({40, 40}, 1.0);
    const StateSpace space({40, 40});
    RngStream r1(66, 0), r2(67, 0);
    std::vector<double> buf;
    std::map<std::int64_t, double> h_split, h_leap;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      State a{20, 20}, b{20, 20};
      accelerated_half_split_step(model, a, 0.1, r1);
      tau_leap_step(model, b, 0.1, r2, buf);
      h_split[space.index_of(a)] += 1.0 / n;
      h_leap[space.index_of(b)] += 1.0 / n;
    }
    std::vector<double> va(static_cast<std::size_t>(space.size()), 0.0);
    std::vector<double> vb(static_cast<std::size_t>(space.size()), 0.0);
    for (const auto& [k, v] : h_split) va[static_cast<std::size_t>(k - 1)] = v;
    for (const auto& [k, v] : h_leap) vb[static_cast<std::size_t>(k - 1)] = v;
    REQUIRE(tv_distance(va, vb) < 0.01);
  }

  SECTION("state-independent propensities match one plain leap in distribution (M=4)") {
    const ReactionModel model({"A"}, {300}, {{1}, {2}, {3}, {1}},
                              {PropensitySpec{2.0, {}}, PropensitySpec{1.0, {}},
                               PropensitySpec{0.5, {}}, PropensitySpec{3.0, {}}});
    RngStream r1(14, 0), r2(15, 0);
    std::vector<double> buf;
    const int n = 50000;
    std::vector<std::int64_t> fa(n), fb(n);
    for (int i = 0; i < n; ++i) {
      State a{0}, b{0};
      accelerated_half_split_step(model, a, 1.0, r1);
      tau_leap_step(model, b, 1.0, r2, buf);
      fa[static_cast<std::size_t>(i)] = a[0];
      fb[static_cast<std::size_t>(i)] = b[0];
    }
    REQUIRE(tv_distance(empirical(fa, 60), empirical(fb, 60)) < 0.015);
  }
}

TEST_CASE("symmetric accelerated tau-leap") {
  SECTION("M=1 is two half-leaps with the propensity re-evaluated between them") {
    const ReactionModel model({"A"}, {400}, {{1}}, {PropensitySpec{6.0, {{0, 1}}}});
    RngStream r1(70, 0), r2(70, 0);
    State a{10};
    symmetric_accelerated_step(model, a, 0.2, r1);

    State b{10};
    const std::int64_t k1 = sample_poisson(r2, model.propensity(0, b) * 0.1);
    b[0] += static_cast<int>(k1);
    const std::int64_t k2 = sample_poisson(r2, model.propensity(0, b) * 0.1);
    b[0] += static_cast<int>(k2);
    REQUIRE(a == b);
  }

  SECTION("isomer conservation holds across symmetric steps") {
    const BuiltinSystem sys = builtin_isomer();
    RngStream rng(17, 0);
    State x = sys.init.state;
    for (int step = 0; step < 200; ++step) {
      symmetric_accelerated_step(sys.model, x, 0.01, rng);
      REQUIRE(x[0] + x[1] == 80);
    }
  }

  SECTION("large tau: symmetric stays near the true moments while plain accelerated drifts") {
    const BuiltinSystem sys = builtin_isomer();
    const EnsembleResult sym = run_ensemble(SampleMethod::symmetric, sys.model, sys.init.state,
                                            10.0, 0.1, 1000, 404);
    const EnsembleResult acc = run_ensemble(SampleMethod::accelerated, sys.model, sys.init.state,
                                            10.0, 0.1, 1000, 404);
    const Moments ms = moments(marginal(sym, 0));
    const Moments ma = moments(marginal(acc, 0));
    REQUIRE(std::abs(ms.mean - 40.0) <= std::abs(ma.mean - 40.0));
    REQUIRE(std::abs(ms.variance - 20.0) <= std::abs(ma.variance - 20.0));
  }
}

TEST_CASE("ensembles") {
  const ReactionModel model = isomer_small({20, 20}, 5.0);

  SECTION("identical seeds give bit-identical histograms") {
    const auto a = run_ensemble(SampleMethod::tau_leap, model, State{10, 10}, 1.0, 0.01, 500, 7);
    const auto b = run_ensemble(SampleMethod::tau_leap, model, State{10, 10}, 1.0, 0.01, 500, 7);
    REQUIRE(a.histogram == b.histogram);
    REQUIRE(a.diagnostics.negative_clamps == b.diagnostics.negative_clamps);
  }

  SECTION("thread count does not affect the result") {
    const auto a = run_ensemble(SampleMethod::ssa, model, State{10, 10}, 1.0, 0.0, 400, 7, 1);
    const auto b = run_ensemble(SampleMethod::ssa, model, State{10, 10}, 1.0, 0.0, 400, 7, 4);
    const auto c = run_ensemble(SampleMethod::ssa, model, State{10, 10}, 1.0, 0.0, 400, 7, 3);
    REQUIRE(a.histogram == b.histogram);
    REQUIRE(a.histogram == c.histogram);
  }

  SECTION("single sample puts all mass on one state") {
    const auto a = run_ensemble(SampleMethod::ssa, model, State{10, 10}, 0.5, 0.0, 1, 3);
    REQUIRE(a.histogram.size() == 1);
    REQUIRE(a.histogram.begin()->second == 1);
  }

  SECTION("counts always sum to the sample count") {
    const auto a = run_ensemble(SampleMethod::symmetric, model, State{10, 10}, 1.0, 0.05, 333, 5);
    std::uint64_t total = 0;
    for (const auto& [idx, c] : a.histogram) total += c;
    REQUIRE(total == 333);
  }

  SECTION("isomer mean stays in the CLT band") {
    const BuiltinSystem sys = builtin_isomer();
    const auto ens = run_ensemble(SampleMethod::ssa, sys.model, sys.init.state, 10.0, 0.0, 2000, 1);
    const Moments m = moments(marginal(ens, 0));
    REQUIRE_THAT(m.mean, Catch::Matchers::WithinAbs(40.0, 0.3));  // 3 sigma = 3*sqrt(20/2000)
  }

  SECTION("all five samplers keep the isomer conservation law in every histogram state") {
    const BuiltinSystem sys = builtin_isomer();
    const StateSpace space(sys.model.caps());
    for (SampleMethod m : {SampleMethod::ssa, SampleMethod::tau_leap, SampleMethod::accelerated,
                           SampleMethod::accelerated_split, SampleMethod::symmetric}) {
      const auto ens = run_ensemble(m, sys.model, sys.init.state, 1.0, 0.01, 200, 99);
      for (const auto& [idx, count] : ens.histogram) {
        const State x = space.state_of(idx);
        REQUIRE(x[0] + x[1] == 80);
      }
    }
  }

  SECTION("invalid configurations are rejected") {
    REQUIRE_THROWS_AS(run_ensemble(SampleMethod::ssa, model, State{10, 10}, 1.0, 0.0, 0, 7),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(run_ensemble(SampleMethod::tau_leap, model, State{10, 10}, 1.0, 0.0, 5, 7),
                      std::invalid_argument);
  }
}
