#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "smcsim/tuning.hpp"
#include "support.hpp"

using namespace smcsim;

namespace {

SwarmConfig box(double lo, double hi, int particles, int iterations) {
  SwarmConfig c;
  c.lower.assign(3, lo);
  c.upper.assign(3, hi);
  c.particle_count = particles;
  c.iterations = iterations;
  return c;
}

double sphere(std::span<const double> x) {
  const double c[3] = {1.5, -2.0, 3.0};
  double s = 0.0;
  for (int d = 0; d < 3; ++d) s += (x[d] - c[d]) * (x[d] - c[d]);
  return s;
}

}  // namespace

TEST_SUITE("tuning") {
  TEST_CASE("sphere optimum") {
    const PsoResult r = pso_tune(sphere, box(-10.0, 10.0, 30, 100));
    CHECK(std::abs(r.best_params[0] - 1.5) < 1e-3);
    CHECK(std::abs(r.best_params[1] + 2.0) < 1e-3);
    CHECK(std::abs(r.best_params[2] - 3.0) < 1e-3);
    CHECK(r.history.size() == 101);
    CHECK(r.evaluations == 30u * 101u);
    CHECK(r.best_cost == r.history.back());
  }

  TEST_CASE("history is monotone and positions stay in bounds") {
    SwarmConfig c = box(-1.0, 4.0, 12, 40);
    c.rng_seed = 9;
    bool inside = true;
    const Objective f = [&](std::span<const double> x) {
      for (double v : x) inside = inside && v >= -1.0 && v <= 4.0;
      // Optimum outside the box pushes particles into the clamp.
      return std::abs(x[0] - 10.0) + std::sin(5.0 * x[1]) + x[2] * x[2];
    };
    const PsoResult r = pso_tune(f, c);
    CHECK(inside);
    for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] <= r.history[k - 1]);
    CHECK(r.best_params[0] == 4.0);
  }

  TEST_CASE("particle zero starts at the initial point") {
    SwarmConfig c = box(0.1, 500.0, 5, 0);
    std::vector<std::vector<double>> seen;
    const PsoResult r = pso_tune([&](std::span<const double> x) {
      seen.emplace_back(x.begin(), x.end());
      return 0.0;
    }, c);
    REQUIRE(seen.size() == 5);
    CHECK(seen[0] == std::vector<double>{1.0, 1.0, 1.0});
    // Equal costs keep the lowest index.
    CHECK(r.best_params == seen[0]);
  }

  TEST_CASE("fixed seed is deterministic across thread counts") {
    SwarmConfig c = box(-5.0, 5.0, 10, 20);
    c.rng_seed = 4;
    const PsoResult a = pso_tune(sphere, c);
    const PsoResult b = pso_tune(sphere, c);
    c.threads = 3;
    const PsoResult d = pso_tune(sphere, c);
    CHECK(a.history == b.history);
    CHECK(a.best_params == b.best_params);
    CHECK(a.history == d.history);
    CHECK(a.history_params == d.history_params);
  }

  TEST_CASE("non-finite objective") {
    const Objective nan = [](std::span<const double>) { return std::numeric_limits<double>::quiet_NaN(); };
    CHECK_THROWS_AS(pso_tune(nan, box(0.0, 1.0, 4, 3)), TuningError);
    const Objective partial = [](std::span<const double> x) {
      return x[0] > 0.5 ? std::numeric_limits<double>::infinity() : x[0];
    };
    const PsoResult r = pso_tune(partial, box(0.0, 1.0, 8, 10));
    CHECK(std::isfinite(r.best_cost));
  }

  TEST_CASE("config validation") {
    CHECK_THROWS_AS(pso_tune(sphere, box(0.0, 1.0, 1, 3)), TuningError);
    CHECK_THROWS_AS(pso_tune(sphere, box(1.0, 1.0, 4, 3)), TuningError);
    SwarmConfig c = box(0.0, 1.0, 4, 3);
    c.inertia = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(pso_tune(sphere, c), TuningError);
    CHECK_THROWS_AS(CostWeights({0.0, 0.0, 0.0}).validate(), TuningError);
    CHECK_THROWS_AS(CostWeights({-1.0, 0.0, 0.0}).validate(), TuningError);
  }

  TEST_CASE("tracking cost") {
    SimulationLog log;
    log.dt = 1e-3;
    for (int k = 0; k < 20; ++k) {
      LogRow r;
      r.t = k * 1e-3;
      r.q = r.q_desired = r.qd = r.qd_desired = r.tau = r.sigma = JointVector::Zero(2);
      log.rows.push_back(r);
    }
    CHECK(tracking_cost(log, CostWeights{}) == 0.0);

    const SimulationLog run = run_scenario(testing::short_scenario(0.2), ControllerKind::pid);
    const CostWeights w{1.0, 1e-3, 1e-7};
    const CostWeights w3{3.0, 3e-3, 3e-7};
    CHECK(tracking_cost(run, w3) == doctest::Approx(3.0 * tracking_cost(run, w)).epsilon(1e-12));

    SimulationLog diverged = run;
    diverged.diverged = true;
    CHECK(tracking_cost(diverged, w) == kDivergencePenalty);
  }

  TEST_CASE("history csv") {
    const PsoResult r = pso_tune(sphere, box(-1.0, 1.0, 4, 2));
    std::ostringstream out;
    write_history_csv(out, r);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "iteration,gbest_cost,gbest_p1,gbest_p2,gbest_p3");
    int rows = 0;
    for (std::string l; std::getline(in, l);) ++rows;
    CHECK(rows == 3);
  }

  TEST_CASE("tuning a short scenario improves on the initial point") {
    const Scenario s = testing::short_scenario(0.2);
    SwarmConfig c = default_swarm(ControllerKind::mbsmc);
    c.particle_count = 6;
    c.iterations = 4;
    const TuneResult a = tune_controller(s, ControllerKind::mbsmc, CostWeights{}, c);
    const double start = tracking_cost(run_scenario(with_gains(s, ControllerKind::mbsmc, std::vector{1.0, 1.0, 1.0})),
                                       CostWeights{});
    CHECK(a.pso.history.front() <= start);
    CHECK(a.pso.best_cost < start);
    for (std::size_t d = 0; d < 3; ++d) {
      CHECK(a.gains[d] >= c.lower[d]);
      CHECK(a.gains[d] <= c.upper[d]);
    }
    CHECK(a.tuned.mbsmc.p1[0] == a.gains[0]);
    const TuneResult b = tune_controller(s, ControllerKind::mbsmc, CostWeights{}, c);
    CHECK(a.gains == b.gains);
  }

  TEST_CASE("tuned pid completes without divergence") {
    const Scenario s = testing::short_scenario(0.2);
    SwarmConfig c = default_swarm(ControllerKind::pid);
    c.particle_count = 6;
    c.iterations = 3;
    const TuneResult r = tune_controller(s, ControllerKind::pid, CostWeights{}, c);
    CHECK_FALSE(run_scenario(r.tuned, ControllerKind::pid).diverged);
  }

  TEST_CASE("invalid scenario is rejected") {
    Scenario s = testing::short_scenario(0.2);
    s.dt = -1.0;
    CHECK_THROWS_AS(tune_controller(s, ControllerKind::mbsmc, CostWeights{}, default_swarm(ControllerKind::mbsmc)),
                    ScenarioError);
  }
}
