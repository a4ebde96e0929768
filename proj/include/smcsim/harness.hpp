#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "smcsim/controllers.hpp"
#include "smcsim/metrics.hpp"
#include "smcsim/robot_model.hpp"
#include "smcsim/trajectory.hpp"

namespace smcsim {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrajectorySpec {
  enum class Kind { waypoints, cartesian };
  Kind kind = Kind::waypoints;

  // Kind::waypoints
  std::vector<JointVector> waypoints;
  BlendProfile profile = BlendProfile::quintic;

  // Kind::cartesian
  CartesianPath path;
  JointVector ik_seed;

  std::vector<double> durations;
};

/// One closed-loop experiment: plant, reference, controller gains and run settings.
struct Scenario {
  std::string name = "scenario";
  std::string model_source = "ur5e_like";
  RobotModel model;
  TrajectorySpec trajectory;

  ControllerKind controller = ControllerKind::mbsmc;
  SlidingParams mbsmc;
  SlidingParams nmbsmc;
  PidGains pid;

  double dt = 1e-3;
  double duration = 0.0;  // 0 means "trajectory duration"
  bool torque_saturation = true;
  /// Applied to the simulated plant only; controllers keep the nominal model.
  double mass_scale = 1.0;
  std::uint64_t rng_seed = 0;
  /// Added to the reference start position to form the initial state.
  JointVector initial_offset;
  /// Standard deviation (rad) of Gaussian noise on the initial position.
  double initial_noise = 0.0;
};

/// Parses a scenario document. Relative model paths resolve against base_dir.
Scenario load_scenario(const nlohmann::json& document, const std::filesystem::path& base_dir = {});
Scenario load_scenario_file(const std::filesystem::path& path);
nlohmann::json scenario_to_json(const Scenario& scenario);

/// Empty when the scenario is runnable.
std::vector<std::string> validate_scenario(const Scenario& scenario, const JointTrajectory* reference = nullptr);

JointTrajectory build_reference(const Scenario& scenario);

/// Fixed-step loop: sample the reference, compute torque, saturate, RK4-step the
/// plant and log every step. A non-finite state ends the run with the
/// divergence flag set and the log truncated at the failing step.
SimulationLog run_scenario(const Scenario& scenario);
SimulationLog run_scenario(const Scenario& scenario, ControllerKind kind);
SimulationLog run_scenario(const Scenario& scenario, ControllerKind kind, const JointTrajectory& reference);

/// FNV-1a over the scenario document without its controller selection.
std::string scenario_hash(const Scenario& scenario);
/// FNV-1a over the raw bytes of every reference sample.
std::string reference_hash(const JointTrajectory& reference);

struct ComparisonEntry {
  std::string name;
  ControllerKind kind = ControllerKind::mbsmc;
  SimulationLog log;
  std::optional<MetricsReport> report;
  std::optional<ThresholdResult> thresholds;
  bool diverged = false;
  std::string error;
  std::string reference_hash;
};

struct ComparisonTable {
  std::string scenario_hash;
  std::string reference_hash;
  int dof = 0;
  std::vector<ComparisonEntry> entries;

  const ComparisonEntry& at(ControllerKind kind) const;
};

/// Runs every controller on the same reference. Per-run failures are recorded
/// in the entry instead of being thrown.
ComparisonTable compare_controllers(const Scenario& scenario, const std::vector<ControllerKind>& controllers);

/// Log CSV: t, q1..qn, qd1..qdn, tau1..taun, sigma1..sigman, V, qref1..qrefn, qdref1..qdrefn.
/// `dof` names the columns when the log is empty.
void write_log_csv(std::ostream& out, const SimulationLog& log, int dof = -1);
SimulationLog read_log_csv(std::istream& in);

/// Table rows in the order: RMSE of joint motions, Velocity Continuity,
/// Acceleration Profile, Jerk Profile, Snap Profile, Steady state error,
/// RMSE (Trajectory Error), Control effort.
void write_table_csv(std::ostream& out, const ComparisonTable& table);
nlohmann::json table_to_json(const ComparisonTable& table);

void export_log(const SimulationLog& log, const std::filesystem::path& path, int dof = -1);
void export_table(const ComparisonTable& table, const std::filesystem::path& csv_path,
                  const std::filesystem::path& json_path);

}  // namespace smcsim
