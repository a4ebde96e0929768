#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "smcsim/controllers.hpp"
#include "smcsim/harness.hpp"
#include "smcsim/metrics.hpp"

namespace smcsim {

class TuningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDivergencePenalty = 1e9;

struct SwarmConfig {
  int particle_count = 30;
  int iterations = 100;
  double inertia = 0.72;
  double cognitive = 1.49;
  double social = 1.49;
  std::vector<double> lower;
  std::vector<double> upper;
  std::uint64_t rng_seed = 0;
  /// Particle 0 starts here (clamped into the box). Empty means all ones.
  std::vector<double> initial_point;
  /// Worker threads for particle evaluation; results do not depend on it.
  unsigned threads = 1;

  std::size_t dimension() const { return lower.size(); }
  void validate() const;
};

struct CostWeights {
  double w_rmse = 1.0;
  double w_smooth = 1e-3;
  double w_effort = 1e-7;

  void validate() const;
};

/// w_rmse * sum(rmse) + w_smooth * sum(jerk + snap) + w_effort * effort, or
/// kDivergencePenalty when the run diverged or the cost is not finite.
double tracking_cost(const SimulationLog& log, const CostWeights& weights);

struct PsoResult {
  std::vector<double> best_params;
  double best_cost = 0.0;
  /// Entry 0 is the initial swarm, entry k the swarm after iteration k.
  std::vector<double> history;
  std::vector<std::vector<double>> history_params;
  std::size_t evaluations = 0;
};

using Objective = std::function<double(std::span<const double>)>;

/// Global-best PSO. Non-finite objective values count as +inf.
PsoResult pso_tune(const Objective& objective, const SwarmConfig& config);

/// Default search box for the (P1, P2, P3) or (Kp, Ki, Kd) triple of each controller.
SwarmConfig default_swarm(ControllerKind kind);

/// Writes the triple into the scenario as gains shared by every joint.
Scenario with_gains(Scenario scenario, ControllerKind kind, std::span<const double> gains);

struct TuneResult {
  ControllerKind kind = ControllerKind::mbsmc;
  std::vector<double> gains;
  PsoResult pso;
  Scenario tuned;
};

TuneResult tune_controller(const Scenario& scenario, ControllerKind kind, const CostWeights& weights,
                           const SwarmConfig& config);

/// Columns: iteration, gbest_cost, gbest_p1.. (one per tuned gain).
void write_history_csv(std::ostream& out, const PsoResult& result);

}  // namespace smcsim
