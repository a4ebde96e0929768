#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smcsim/harness.hpp"
#include "smcsim/kinematics.hpp"
#include "smcsim/robot_model.hpp"
#include "smcsim/tuning.hpp"

namespace fs = std::filesystem;
using namespace smcsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitDiverged = 2;

struct Options {
  std::string scenario;
  std::string model;
  std::string out = ".";
  std::string controller;
  std::string controllers = "mbsmc,nmbsmc,pid";
  bool logs = false;
  std::uint64_t seed = 0;
  int particles = 30;
  int iterations = 100;
  unsigned threads = 1;
  CostWeights weights;
  std::size_t samples = 1000000;
  double voxel = 0.05;
  std::string voxel_csv;
};

void write_json(const fs::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::vector<ControllerKind> parse_list(const std::string& text) {
  std::vector<ControllerKind> kinds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) kinds.push_back(parse_controller_kind(item));
  return kinds;
}

int cmd_simulate(const Options& o) {
  Scenario s = load_scenario_file(o.scenario);
  if (!o.controller.empty()) s.controller = parse_controller_kind(o.controller);
  fs::create_directories(o.out);
  const SimulationLog log = run_scenario(s);
  export_log(log, fs::path(o.out) / "log.csv", s.model.dof());
  nlohmann::json summary = {{"scenario", s.name},
                            {"controller", std::string(to_string(s.controller))},
                            {"scenario_hash", scenario_hash(s)},
                            {"steps", log.rows.size()},
                            {"diverged", log.diverged}};
  if (log.diverged) {
    summary["divergence_step"] = *log.divergence_step;
    summary["divergence_message"] = log.divergence_message;
  } else {
    const double span = log.rows.back().t - log.rows.front().t;
    const MetricsReport report = compute_report(s.model, log, std::min(kDefaultSteadyStateWindow, span));
    summary["metrics"] = report_to_json(report);
    summary["thresholds"] = thresholds_to_json(threshold_report(report));
  }
  write_json(fs::path(o.out) / "metrics.json", summary);
  std::cout << summary.dump(2) << '\n';
  if (log.diverged) {
    std::cerr << "diverged: " << log.divergence_message << '\n';
    return kExitDiverged;
  }
  return kExitOk;
}

int cmd_compare(const Options& o) {
  const Scenario s = load_scenario_file(o.scenario);
  const ComparisonTable table = compare_controllers(s, parse_list(o.controllers));
  fs::create_directories(o.out);
  export_table(table, fs::path(o.out) / "table.csv", fs::path(o.out) / "table.json");
  if (o.logs)
    for (const ComparisonEntry& e : table.entries) export_log(e.log, fs::path(o.out) / (e.name + "_log.csv"), table.dof);
  write_table_csv(std::cout, table);
  bool diverged = false;
  for (const ComparisonEntry& e : table.entries) {
    if (!e.error.empty()) std::cerr << e.name << ": " << e.error << '\n';
    diverged = diverged || e.diverged;
  }
  return diverged ? kExitDiverged : kExitOk;
}

int cmd_tune(const Options& o) {
  std::ifstream in(o.scenario);
  if (!in) throw ScenarioError("cannot open scenario file " + o.scenario);
  nlohmann::json doc = nlohmann::json::parse(in);
  const Scenario s = load_scenario(doc, fs::path(o.scenario).parent_path());
  const ControllerKind kind = o.controller.empty() ? s.controller : parse_controller_kind(o.controller);

  SwarmConfig config = default_swarm(kind);
  config.particle_count = o.particles;
  config.iterations = o.iterations;
  config.rng_seed = o.seed;
  config.threads = o.threads;
  const TuneResult result = tune_controller(s, kind, o.weights, config);

  fs::create_directories(o.out);
  {
    std::ofstream history(fs::path(o.out) / "history.csv");
    write_history_csv(history, result.pso);
  }
  const bool pid = kind == ControllerKind::pid;
  const auto& g = result.gains;
  const nlohmann::json gains = pid ? nlohmann::json{{"kp", g[0]}, {"ki", g[1]}, {"kd", g[2]}}
                                   : nlohmann::json{{"p1", g[0]}, {"p2", g[1]}, {"p3", g[2]}};
  doc["gains"][std::string(to_string(kind))] = gains;
  write_json(fs::path(o.out) / "tuned_scenario.json", doc);
  const nlohmann::json summary = {{"controller", std::string(to_string(kind))},
                                  {"gains", gains},
                                  {"cost", result.pso.best_cost},
                                  {"initial_cost", result.pso.history.front()},
                                  {"evaluations", result.pso.evaluations},
                                  {"seed", o.seed},
                                  {"weights", {{"w_rmse", o.weights.w_rmse},
                                               {"w_smooth", o.weights.w_smooth},
                                               {"w_effort", o.weights.w_effort}}}};
  write_json(fs::path(o.out) / "gains.json", summary);
  std::cout << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_workspace(const Options& o) {
  const RobotModel model = resolve_model(o.model.empty() ? "ur5e_like" : o.model);
  const WorkspaceEstimate w = estimate_workspace(model, o.samples, o.voxel, o.seed, !o.voxel_csv.empty());
  if (!o.voxel_csv.empty()) {
    std::ofstream out(o.voxel_csv);
    if (!out) throw std::runtime_error("cannot write " + o.voxel_csv);
    write_voxel_csv(out, w);
  }
  std::cout << nlohmann::json{{"model", model.name},
                              {"samples", o.samples},
                              {"voxel_size", w.voxel_size},
                              {"occupied_voxels", w.occupied_voxels},
                              {"volume_m3", w.volume}}
                   .dump(2)
            << '\n';
  return kExitOk;
}

int cmd_validate(const Options& o) {
  if (!o.scenario.empty()) {
    const Scenario s = load_scenario_file(o.scenario);
    const auto problems = validate_scenario(s);
    for (const std::string& p : problems) std::cerr << p << '\n';
    if (!problems.empty()) return kExitInvalid;
    std::cout << "scenario " << s.name << ": ok\n";
    return kExitOk;
  }
  const RobotModel model = resolve_model(o.model);
  std::cout << "model " << model.name << ": ok (" << model.dof() << " joints)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manipulator sliding-mode control simulator"};
  app.require_subcommand(1);
  Options o;

  auto* simulate = app.add_subcommand("simulate", "Run one closed-loop scenario");
  simulate->add_option("--scenario", o.scenario, "Scenario file")->required();
  simulate->add_option("--out", o.out, "Output directory");
  simulate->add_option("--controller", o.controller, "Override the scenario controller");

  auto* compare = app.add_subcommand("compare", "Run several controllers on one scenario");
  compare->add_option("--scenario", o.scenario, "Scenario file")->required();
  compare->add_option("--controllers", o.controllers, "Comma-separated controller list");
  compare->add_option("--out", o.out, "Output directory");
  compare->add_flag("--logs", o.logs, "Also write per-controller logs");

  auto* tune = app.add_subcommand("tune", "PSO gain tuning");
  tune->add_option("--scenario", o.scenario, "Scenario file")->required();
  tune->add_option("--controller", o.controller, "mbsmc, nmbsmc or pid");
  tune->add_option("--seed", o.seed, "Swarm RNG seed");
  tune->add_option("--out", o.out, "Output directory");
  tune->add_option("--particles", o.particles, "Swarm size");
  tune->add_option("--iterations", o.iterations, "Swarm iterations");
  tune->add_option("--threads", o.threads, "Evaluation threads");
  tune->add_option("--w-rmse", o.weights.w_rmse, "RMSE weight");
  tune->add_option("--w-smooth", o.weights.w_smooth, "Jerk and snap weight");
  tune->add_option("--w-effort", o.weights.w_effort, "Control effort weight");

  auto* workspace = app.add_subcommand("workspace", "Monte-Carlo workspace volume");
  workspace->add_option("--model", o.model, "Model file or built-in name");
  workspace->add_option("--samples", o.samples, "Joint samples");
  workspace->add_option("--voxel", o.voxel, "Voxel edge (m)");
  workspace->add_option("--seed", o.seed, "RNG seed");
  workspace->add_option("--csv", o.voxel_csv, "Write occupied voxel centres");

  auto* validate = app.add_subcommand("validate", "Check a model or scenario file");
  auto* model_opt = validate->add_option("--model", o.model, "Model file or built-in name");
  auto* scenario_opt = validate->add_option("--scenario", o.scenario, "Scenario file");
  model_opt->excludes(scenario_opt);
  validate->callback([&] {
    if (o.model.empty() && o.scenario.empty()) throw CLI::RequiredError("--model or --scenario");
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(o);
    if (compare->parsed()) return cmd_compare(o);
    if (tune->parsed()) return cmd_tune(o);
    if (workspace->parsed()) return cmd_workspace(o);
    if (validate->parsed()) return cmd_validate(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}
