#include "smcsim/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <thread>

#include "csv_util.hpp"

namespace smcsim {

namespace {

using Point = std::vector<double>;

double finite_or_inf(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::infinity(); }

void evaluate_all(const Objective& objective, const std::vector<Point>& x, std::vector<double>& cost,
                  unsigned threads) {
  const std::size_t count = x.size();
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) cost[i] = finite_or_inf(objective(x[i]));
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) cost[i] = finite_or_inf(objective(x[i]));
    });
  for (std::thread& t : pool) t.join();
}

// Lowest index wins ties.
std::size_t argmin(const std::vector<double>& cost) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < cost.size(); ++i)
    if (cost[i] < cost[best]) best = i;
  return best;
}

}  // namespace

void SwarmConfig::validate() const {
  if (particle_count < 2) throw TuningError("particle_count must be at least 2");
  if (iterations < 0) throw TuningError("iterations must be non-negative");
  if (lower.empty() || lower.size() != upper.size()) throw TuningError("bounds must be non-empty and equal in length");
  for (std::size_t d = 0; d < lower.size(); ++d)
    if (!std::isfinite(lower[d]) || !std::isfinite(upper[d]) || !(lower[d] < upper[d]))
      throw TuningError("bound " + std::to_string(d) + ": min must be below max");
  for (double c : {inertia, cognitive, social})
    if (!std::isfinite(c)) throw TuningError("swarm coefficients must be finite");
  if (!initial_point.empty() && initial_point.size() != lower.size())
    throw TuningError("initial_point dimension differs from bounds");
}

void CostWeights::validate() const {
  for (double w : {w_rmse, w_smooth, w_effort})
    if (!(w >= 0.0) || !std::isfinite(w)) throw TuningError("cost weights must be finite and non-negative");
  if (w_rmse == 0.0 && w_smooth == 0.0 && w_effort == 0.0) throw TuningError("at least one cost weight must be positive");
}

double tracking_cost(const SimulationLog& log, const CostWeights& weights) {
  weights.validate();
  if (log.diverged || log.rows.size() < 5) return kDivergencePenalty;
  const JointVector rmse = rmse_joint(log);
  const SmoothnessMetrics smooth = smoothness_metrics(log);
  const double cost = weights.w_rmse * rmse.sum() + weights.w_smooth * (smooth.jerk.sum() + smooth.snap.sum()) +
                      weights.w_effort * control_effort(log);
  return std::isfinite(cost) ? cost : kDivergencePenalty;
}

PsoResult pso_tune(const Objective& objective, const SwarmConfig& config) {
  config.validate();
  const std::size_t n = config.dimension();
  const auto count = static_cast<std::size_t>(config.particle_count);
  std::mt19937_64 rng(config.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Point> x(count, Point(n)), v(count, Point(n));
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t d = 0; d < n; ++d) {
      const double range = config.upper[d] - config.lower[d];
      x[i][d] = config.lower[d] + unit(rng) * range;
      v[i][d] = (2.0 * unit(rng) - 1.0) * 0.1 * range;
    }
  for (std::size_t d = 0; d < n; ++d) {
    const double start = config.initial_point.empty() ? 1.0 : config.initial_point[d];
    x[0][d] = std::clamp(start, config.lower[d], config.upper[d]);
  }

  std::vector<double> cost(count);
  evaluate_all(objective, x, cost, config.threads);
  if (std::none_of(cost.begin(), cost.end(), [](double c) { return std::isfinite(c); }))
    throw TuningError("objective is non-finite for every initial particle");

  std::vector<Point> pbest = x;
  std::vector<double> pbest_cost = cost;
  std::size_t g = argmin(pbest_cost);
  Point gbest = pbest[g];
  double gbest_cost = pbest_cost[g];

  PsoResult result;
  result.evaluations = count;
  result.history.push_back(gbest_cost);
  result.history_params.push_back(gbest);

  for (int it = 0; it < config.iterations; ++it) {
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t d = 0; d < n; ++d) {
        const double range = config.upper[d] - config.lower[d];
        const double r1 = unit(rng);
        const double r2 = unit(rng);
        double vel = config.inertia * v[i][d] + config.cognitive * r1 * (pbest[i][d] - x[i][d]) +
                     config.social * r2 * (gbest[d] - x[i][d]);
        vel = std::clamp(vel, -range, range);
        v[i][d] = vel;
        x[i][d] = std::clamp(x[i][d] + vel, config.lower[d], config.upper[d]);
      }
    evaluate_all(objective, x, cost, config.threads);
    result.evaluations += count;
    for (std::size_t i = 0; i < count; ++i)
      if (cost[i] < pbest_cost[i]) {
        pbest_cost[i] = cost[i];
        pbest[i] = x[i];
      }
    g = argmin(pbest_cost);
    if (pbest_cost[g] < gbest_cost) {
      gbest_cost = pbest_cost[g];
      gbest = pbest[g];
    }
    result.history.push_back(gbest_cost);
    result.history_params.push_back(gbest);
  }

  result.best_params = gbest;
  result.best_cost = gbest_cost;
  return result;
}

SwarmConfig default_swarm(ControllerKind kind) {
  SwarmConfig config;
  switch (kind) {
    case ControllerKind::mbsmc:
    case ControllerKind::nmbsmc:
      config.lower = {0.1, 0.1, 0.1};
      config.upper = {500.0, 10.0, 200.0};
      break;
    case ControllerKind::pid:
      // Brackets the discrete-time stability limits of the lightest joint
      // (kd < 2 M / dt, kp < 4 M / dt^2) at dt = 1 ms.
      config.lower = {0.1, 0.1, 0.01};
      config.upper = {500.0, 100.0, 1.0};
      break;
  }
  return config;
}

Scenario with_gains(Scenario scenario, ControllerKind kind, std::span<const double> gains) {
  if (gains.size() != 3) throw TuningError("expected three gains");
  const int n = scenario.model.dof();
  switch (kind) {
    case ControllerKind::mbsmc:
      scenario.mbsmc = SlidingParams::uniform(n, gains[0], gains[1], gains[2]);
      break;
    case ControllerKind::nmbsmc:
      scenario.nmbsmc = SlidingParams::uniform(n, gains[0], gains[1], gains[2]);
      break;
    case ControllerKind::pid:
      scenario.pid = PidGains::uniform(n, gains[0], gains[1], gains[2]);
      break;
  }
  scenario.controller = kind;
  return scenario;
}

TuneResult tune_controller(const Scenario& scenario, ControllerKind kind, const CostWeights& weights,
                           const SwarmConfig& config) {
  weights.validate();
  const auto problems = validate_scenario(scenario);
  if (!problems.empty()) throw ScenarioError("invalid scenario '" + scenario.name + "': " + problems.front());
  const JointTrajectory reference = build_reference(scenario);

  const Objective objective = [&](std::span<const double> gains) {
    try {
      const Scenario candidate = with_gains(scenario, kind, gains);
      return tracking_cost(run_scenario(candidate, kind, reference), weights);
    } catch (const std::exception&) {
      return kDivergencePenalty;
    }
  };

  TuneResult out;
  out.kind = kind;
  out.pso = pso_tune(objective, config);
  if (!(out.pso.best_cost < kDivergencePenalty)) throw TuningError("every tuning evaluation diverged");
  out.gains = out.pso.best_params;
  out.tuned = with_gains(scenario, kind, out.gains);
  return out;
}

void write_history_csv(std::ostream& out, const PsoResult& result) {
  const std::size_t n = result.best_params.size();
  out << "iteration,gbest_cost";
  for (std::size_t d = 1; d <= n; ++d) out << ",gbest_p" << d;
  out << '\n';
  for (std::size_t k = 0; k < result.history.size(); ++k) {
    out << k << ',' << csv::format(result.history[k]);
    for (double p : result.history_params[k]) out << ',' << csv::format(p);
    out << '\n';
  }
}

}  // namespace smcsim
