#include "smcsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "csv_util.hpp"
#include "smcsim/dynamics.hpp"
#include "smcsim/kinematics.hpp"

namespace smcsim {

namespace {

using nlohmann::json;

JointVector joint_vector(const json& v, const std::string& where) {
  if (!v.is_array()) throw ScenarioError(where + " must be an array");
  JointVector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ScenarioError(where + " must contain numbers");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

// A gain is either one scalar for every joint or a per-joint array.
JointVector gain(const json& section, const char* key, double fallback, int n, const std::string& where) {
  if (!section.contains(key)) return JointVector::Constant(n, fallback);
  const json& v = section.at(key);
  if (v.is_number()) return JointVector::Constant(n, v.get<double>());
  JointVector out = joint_vector(v, where + "." + key);
  if (out.size() != n) throw ScenarioError(where + "." + key + " needs " + std::to_string(n) + " entries");
  return out;
}

json vector_json(const JointVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json gain_json(const JointVector& v) {
  if (v.size() > 0 && (v.array() == v[0]).all()) return v[0];
  return vector_json(v);
}

Pose pose_from_json(const json& w, const std::string& where) {
  if (!w.contains("position")) throw ScenarioError(where + ": missing position");
  const JointVector p = joint_vector(w.at("position"), where + ".position");
  if (p.size() != 3) throw ScenarioError(where + ".position must have 3 entries");
  Quaterniond orientation = Quaterniond::Identity();
  if (w.contains("rpy")) {
    const JointVector rpy = joint_vector(w.at("rpy"), where + ".rpy");
    if (rpy.size() != 3) throw ScenarioError(where + ".rpy must have 3 entries");
    orientation = Eigen::AngleAxisd(rpy[2], Vector3d::UnitZ()) * Eigen::AngleAxisd(rpy[1], Vector3d::UnitY()) *
                  Eigen::AngleAxisd(rpy[0], Vector3d::UnitX());
  } else if (w.contains("quaternion")) {
    const JointVector wxyz = joint_vector(w.at("quaternion"), where + ".quaternion");
    if (wxyz.size() != 4) throw ScenarioError(where + ".quaternion must have 4 entries (w, x, y, z)");
    orientation = Quaterniond(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
  }
  return Pose(Vector3d(p[0], p[1], p[2]), orientation);
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 1469598103934665603ULL) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex(std::uint64_t h) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

void write_row(std::ostream& out, const std::string& label, const std::vector<std::vector<std::string>>& cells) {
  out << '"' << label << '"';
  for (const auto& block : cells)
    for (const auto& c : block) out << ',' << c;
  out << '\n';
}

std::vector<std::string> format_cells(const JointVector& v, std::size_t width) {
  std::vector<std::string> cells(width);
  for (Eigen::Index i = 0; i < v.size() && static_cast<std::size_t>(i) < width; ++i) cells[i] = csv::format(v[i]);
  return cells;
}

}  // namespace

Scenario load_scenario(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ScenarioError("scenario document must be an object");
  try {
    Scenario s;
    s.name = doc.value("name", std::string("scenario"));

    const json& model = doc.contains("model") ? doc.at("model") : json("ur5e_like");
    if (model.is_string()) {
      s.model_source = model.get<std::string>();
      const bool builtin = s.model_source == "ur5e_like" || s.model_source == "pendulum1" || s.model_source == "planar2";
      const auto path = std::filesystem::path(s.model_source);
      try {
        s.model = resolve_model(builtin || path.is_absolute() || base_dir.empty() ? s.model_source
                                                                                  : (base_dir / path).string());
      } catch (const std::exception& e) {
        throw ScenarioError(std::string("model: ") + e.what());
      }
    } else {
      s.model_source = "inline";
      s.model = load_model(model);
    }
    const int n = s.model.dof();

    s.dt = doc.value("dt", 1e-3);
    s.duration = doc.value("duration", 0.0);
    s.torque_saturation = doc.value("torque_saturation", true);
    s.mass_scale = doc.value("mass_scale", 1.0);
    s.rng_seed = doc.value("rng_seed", std::uint64_t{0});
    s.initial_noise = doc.value("initial_noise", 0.0);
    s.initial_offset = doc.contains("initial_offset") ? joint_vector(doc.at("initial_offset"), "initial_offset")
                                                      : JointVector::Zero(n);
    if (s.initial_offset.size() != n) throw ScenarioError("initial_offset needs one entry per joint");

    if (!doc.contains("trajectory")) throw ScenarioError("scenario is missing 'trajectory'");
    const json& traj = doc.at("trajectory");
    const std::string type = traj.value("type", std::string("waypoints"));
    if (traj.contains("durations")) s.trajectory.durations = traj.at("durations").get<std::vector<double>>();
    if (type == "waypoints") {
      s.trajectory.kind = TrajectorySpec::Kind::waypoints;
      s.trajectory.profile = parse_blend_profile(traj.value("profile", std::string("quintic")));
      const json& wps = traj.at("waypoints");
      for (std::size_t i = 0; i < wps.size(); ++i)
        s.trajectory.waypoints.push_back(joint_vector(wps[i], "trajectory.waypoints[" + std::to_string(i) + "]"));
    } else if (type == "cartesian") {
      s.trajectory.kind = TrajectorySpec::Kind::cartesian;
      s.trajectory.ik_seed = joint_vector(traj.at("seed"), "trajectory.seed");
      const json& wps = traj.at("waypoints");
      for (std::size_t i = 0; i < wps.size(); ++i)
        s.trajectory.path.waypoints.push_back(pose_from_json(wps[i], "trajectory.waypoints[" + std::to_string(i) + "]"));
      s.trajectory.path.segment_durations = s.trajectory.durations;
    } else {
      throw ScenarioError("unknown trajectory type '" + type + "'");
    }

    s.controller = parse_controller_kind(doc.value("controller", std::string("mbsmc")));
    const json gains = doc.value("gains", json::object());
    const json empty = json::object();
    const json& mb = gains.contains("mbsmc") ? gains.at("mbsmc") : empty;
    const json& nmb = gains.contains("nmbsmc") ? gains.at("nmbsmc") : empty;
    const json& pid = gains.contains("pid") ? gains.at("pid") : empty;
    s.mbsmc = {gain(mb, "p1", 100.0, n, "gains.mbsmc"), gain(mb, "p2", 1.0, n, "gains.mbsmc"),
               gain(mb, "p3", 60.0, n, "gains.mbsmc")};
    s.nmbsmc = {gain(nmb, "p1", 100.0, n, "gains.nmbsmc"), gain(nmb, "p2", 1.0, n, "gains.nmbsmc"),
                gain(nmb, "p3", 60.0, n, "gains.nmbsmc")};
    s.pid = {gain(pid, "kp", 100.0, n, "gains.pid"), gain(pid, "ki", 10.0, n, "gains.pid"),
             gain(pid, "kd", 10.0, n, "gains.pid")};
    return s;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario field error: ") + e.what());
  }
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError("scenario parse failure in " + path.string() + ": " + e.what());
  }
  return load_scenario(doc, path.parent_path());
}

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["name"] = s.name;
  doc["model"] = model_to_json(s.model);
  doc["dt"] = s.dt;
  doc["duration"] = s.duration;
  doc["torque_saturation"] = s.torque_saturation;
  doc["mass_scale"] = s.mass_scale;
  doc["rng_seed"] = s.rng_seed;
  doc["initial_offset"] = vector_json(s.initial_offset);
  doc["initial_noise"] = s.initial_noise;

  json traj;
  traj["durations"] = s.trajectory.durations;
  if (s.trajectory.kind == TrajectorySpec::Kind::waypoints) {
    traj["type"] = "waypoints";
    traj["profile"] = std::string(to_string(s.trajectory.profile));
    traj["waypoints"] = json::array();
    for (const JointVector& w : s.trajectory.waypoints) traj["waypoints"].push_back(vector_json(w));
  } else {
    traj["type"] = "cartesian";
    traj["seed"] = vector_json(s.trajectory.ik_seed);
    traj["waypoints"] = json::array();
    for (const Pose& p : s.trajectory.path.waypoints) {
      const Quaterniond& o = p.orientation;
      traj["waypoints"].push_back({{"position", {p.position.x(), p.position.y(), p.position.z()}},
                                   {"quaternion", {o.w(), o.x(), o.y(), o.z()}}});
    }
  }
  doc["trajectory"] = traj;
  doc["controller"] = std::string(to_string(s.controller));
  doc["gains"] = {{"mbsmc", {{"p1", gain_json(s.mbsmc.p1)}, {"p2", gain_json(s.mbsmc.p2)}, {"p3", gain_json(s.mbsmc.p3)}}},
                  {"nmbsmc",
                   {{"p1", gain_json(s.nmbsmc.p1)}, {"p2", gain_json(s.nmbsmc.p2)}, {"p3", gain_json(s.nmbsmc.p3)}}},
                  {"pid", {{"kp", gain_json(s.pid.kp)}, {"ki", gain_json(s.pid.ki)}, {"kd", gain_json(s.pid.kd)}}}};
  return doc;
}

std::vector<std::string> validate_scenario(const Scenario& s, const JointTrajectory* reference) {
  std::vector<std::string> problems = validate_model(s.model);
  const int n = s.model.dof();
  if (!(s.dt > 0.0)) problems.emplace_back("dt must be positive");
  if (!(s.mass_scale > 0.0)) problems.emplace_back("mass_scale must be positive");
  if (!(s.duration >= 0.0)) problems.emplace_back("duration must be non-negative");
  if (!(s.initial_noise >= 0.0)) problems.emplace_back("initial_noise must be non-negative");
  if (s.initial_offset.size() != n) problems.emplace_back("initial_offset needs one entry per joint");
  for (const JointVector& w : s.trajectory.waypoints)
    if (w.size() != n) problems.emplace_back("trajectory waypoint dimension differs from the model");
  try {
    s.mbsmc.validate(n);
    s.nmbsmc.validate(n);
    s.pid.validate(n);
  } catch (const std::exception& e) {
    problems.emplace_back(e.what());
  }
  double planned = 0.0;
  for (double d : s.trajectory.durations) planned += d;
  if (reference) planned = reference->duration();
  if (s.duration > 0.0 && s.duration + 1e-9 < planned) problems.emplace_back("duration is shorter than the trajectory");
  return problems;
}

JointTrajectory build_reference(const Scenario& s) {
  if (s.trajectory.kind == TrajectorySpec::Kind::cartesian)
    return cartesian_to_joint(s.model, s.trajectory.path, s.trajectory.ik_seed, s.dt);
  if (s.trajectory.waypoints.size() == 1) {
    // A single waypoint is a hold: one sample, zero length.
    JointTrajectory hold;
    hold.dt = s.dt;
    const JointVector& w = s.trajectory.waypoints.front();
    hold.samples.push_back({0.0, w, JointVector::Zero(w.size()), JointVector::Zero(w.size())});
    return hold;
  }
  return waypoint_trajectory(s.trajectory.waypoints, s.trajectory.durations, s.dt, s.trajectory.profile);
}

SimulationLog run_scenario(const Scenario& scenario) { return run_scenario(scenario, scenario.controller); }

SimulationLog run_scenario(const Scenario& scenario, ControllerKind kind) {
  return run_scenario(scenario, kind, build_reference(scenario));
}

SimulationLog run_scenario(const Scenario& s, ControllerKind kind, const JointTrajectory& reference) {
  const auto problems = validate_scenario(s, &reference);
  if (!problems.empty()) throw ScenarioError("invalid scenario '" + s.name + "': " + problems.front());
  if (std::abs(reference.dt - s.dt) > 1e-15 && reference.samples.size() > 1)
    throw ScenarioError("reference sample interval differs from scenario dt");

  const int n = s.model.dof();
  const double end_time = std::max(s.duration, reference.duration());
  const auto steps = static_cast<std::size_t>(std::llround(end_time / s.dt));

  const bool perturbed = s.mass_scale != 1.0;
  DynamicsEvaluator controller_model(s.model);
  std::optional<DynamicsEvaluator> perturbed_plant;
  if (perturbed) perturbed_plant.emplace(scale_masses(s.model, s.mass_scale));
  DynamicsEvaluator& plant = perturbed ? *perturbed_plant : controller_model;

  const Reference start = sample(reference, reference.start_time());
  JointState state;
  state.q = start.position + s.initial_offset;
  if (s.initial_noise > 0.0) {
    std::mt19937_64 rng(s.rng_seed);
    std::normal_distribution<double> noise(0.0, s.initial_noise);
    for (int i = 0; i < n; ++i) state.q[i] += noise(rng);
  }
  state.qd = start.velocity;
  state.t = 0.0;

  const JointVector limits = s.model.torque_limits();
  JointVector integral = JointVector::Zero(n);
  const Reference final_hold = Reference::hold(reference.samples.back().position);

  SimulationLog log;
  log.dt = s.dt;
  log.rows.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * s.dt;
    state.t = t;
    const Reference ref = t <= reference.end_time() + 1e-9 * s.dt ? sample(reference, reference.start_time() + t)
                                                                 : final_hold;
    const TrackingError err = tracking_error(state, ref);

    JointVector tau;
    JointVector sigma;
    switch (kind) {
      case ControllerKind::mbsmc: {
        const ControlOutput out = mbsmc_torque(controller_model.terms(state.q, state.qd), state, ref, s.mbsmc);
        tau = out.tau;
        sigma = out.diagnostics.sigma;
        break;
      }
      case ControllerKind::nmbsmc: {
        const ControlOutput out = nmbsmc_torque(err.e, err.ed, s.nmbsmc);
        tau = out.tau;
        sigma = out.diagnostics.sigma;
        break;
      }
      case ControllerKind::pid:
        tau = pid_torque(err.e, integral, err.ed, s.pid);
        integral = integrate_error(integral, err.e, s.dt);
        // PID has no surface of its own; log the MBSMC surface for comparability.
        sigma = sliding_surface(err.e, err.ed, s.mbsmc);
        break;
    }
    if (s.torque_saturation) tau = tau.cwiseMax(-limits).cwiseMin(limits);

    log.rows.push_back({t, state.q, state.qd, tau, sigma, lyapunov_value(sigma), ref.position, ref.velocity});

    if (!tau.allFinite()) {
      log.diverged = true;
      log.divergence_step = k;
      log.divergence_message = "non-finite torque at t = " + std::to_string(t);
      break;
    }
    if (k == steps) break;
    try {
      state = plant.step(state, tau, s.dt);
    } catch (const DivergenceError& e) {
      log.diverged = true;
      log.divergence_step = k;
      log.divergence_message = e.what();
      break;
    } catch (const SingularInertiaError& e) {
      log.diverged = true;
      log.divergence_step = k;
      log.divergence_message = e.what();
      break;
    }
  }
  return log;
}

std::string scenario_hash(const Scenario& s) {
  json doc = scenario_to_json(s);
  doc.erase("controller");
  const std::string text = doc.dump();
  return hex(fnv1a(text.data(), text.size()));
}

std::string reference_hash(const JointTrajectory& reference) {
  std::uint64_t h = fnv1a(&reference.dt, sizeof(double));
  for (const TrajectorySample& s : reference.samples) {
    h = fnv1a(&s.t, sizeof(double), h);
    for (const JointVector* v : {&s.position, &s.velocity, &s.acceleration})
      h = fnv1a(v->data(), sizeof(double) * static_cast<std::size_t>(v->size()), h);
  }
  return hex(h);
}

const ComparisonEntry& ComparisonTable::at(ControllerKind kind) const {
  for (const ComparisonEntry& e : entries)
    if (e.kind == kind) return e;
  throw std::out_of_range("comparison table has no entry for " + std::string(to_string(kind)));
}

ComparisonTable compare_controllers(const Scenario& scenario, const std::vector<ControllerKind>& controllers) {
  if (controllers.size() < 2) throw ScenarioError("compare_controllers needs at least two controllers");
  const JointTrajectory reference = build_reference(scenario);

  ComparisonTable table;
  table.scenario_hash = scenario_hash(scenario);
  table.reference_hash = reference_hash(reference);
  table.dof = scenario.model.dof();
  for (ControllerKind kind : controllers) {
    ComparisonEntry entry;
    entry.kind = kind;
    entry.name = std::string(to_string(kind));
    entry.reference_hash = reference_hash(reference);
    try {
      entry.log = run_scenario(scenario, kind, reference);
      entry.diverged = entry.log.diverged;
      if (entry.diverged) {
        entry.error = "diverged: " + entry.log.divergence_message;
      } else {
        const double span = entry.log.rows.back().t - entry.log.rows.front().t;
        entry.report = compute_report(scenario.model, entry.log, std::min(kDefaultSteadyStateWindow, span));
        entry.thresholds = threshold_report(*entry.report);
      }
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    table.entries.push_back(std::move(entry));
  }
  return table;
}

void write_log_csv(std::ostream& out, const SimulationLog& log, int dof) {
  const int n = dof >= 0 ? dof : log.dof();
  out << 't';
  for (const char* prefix : {"q", "qd", "tau", "sigma"})
    for (int i = 1; i <= n; ++i) out << ',' << prefix << i;
  out << ",V";
  for (const char* prefix : {"qref", "qdref"})
    for (int i = 1; i <= n; ++i) out << ',' << prefix << i;
  out << '\n';
  for (const LogRow& r : log.rows) {
    out << csv::format(r.t);
    for (const JointVector* v : {&r.q, &r.qd, &r.tau, &r.sigma})
      for (int i = 0; i < n; ++i) out << ',' << csv::format((*v)[i]);
    out << ',' << csv::format(r.V);
    for (const JointVector* v : {&r.q_desired, &r.qd_desired})
      for (int i = 0; i < n; ++i) out << ',' << csv::format((*v)[i]);
    out << '\n';
  }
}

SimulationLog read_log_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("log csv: missing header");
  const auto header = csv::split(line);
  if (header.size() < 2 || header.front() != "t" || (header.size() - 2) % 6 != 0)
    throw std::runtime_error("log csv: unexpected header");
  const int n = static_cast<int>((header.size() - 2) / 6);

  SimulationLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != header.size()) throw std::runtime_error("log csv: row width differs from header");
    LogRow r;
    r.t = csv::parse(f[0]);
    std::size_t col = 1;
    for (JointVector* v : {&r.q, &r.qd, &r.tau, &r.sigma}) {
      v->resize(n);
      for (int i = 0; i < n; ++i) (*v)[i] = csv::parse(f[col++]);
    }
    r.V = csv::parse(f[col++]);
    for (JointVector* v : {&r.q_desired, &r.qd_desired}) {
      v->resize(n);
      for (int i = 0; i < n; ++i) (*v)[i] = csv::parse(f[col++]);
    }
    log.rows.push_back(std::move(r));
  }
  if (log.rows.size() >= 2) log.dt = log.rows[1].t - log.rows[0].t;
  return log;
}

void write_table_csv(std::ostream& out, const ComparisonTable& table) {
  const std::size_t width = static_cast<std::size_t>(std::max(table.dof, 6));
  out << "Metric";
  for (const ComparisonEntry& e : table.entries)
    for (std::size_t i = 1; i <= width; ++i) out << ',' << e.name << ".theta" << i;
  out << '\n';

  using Getter = JointVector (*)(const MetricsReport&);
  const std::vector<std::pair<std::string, Getter>> joint_rows = {
      {"RMSE of joint motions", [](const MetricsReport& r) { return r.rmse; }},
      {"Velocity Continuity", [](const MetricsReport& r) { return r.smoothness.velocity_continuity; }},
      {"Acceleration Profile", [](const MetricsReport& r) { return r.smoothness.acceleration_profile; }},
      {"Jerk Profile", [](const MetricsReport& r) { return r.smoothness.jerk; }},
      {"Snap Profile", [](const MetricsReport& r) { return r.smoothness.snap; }},
      {"Steady state error", [](const MetricsReport& r) { return r.steady_state_error; }},
  };

  auto blocks = [&](auto&& cells_for) {
    std::vector<std::vector<std::string>> cells;
    for (const ComparisonEntry& e : table.entries) {
      if (!e.report) {
        cells.emplace_back(width, e.diverged ? "diverged" : "error");
      } else {
        cells.push_back(cells_for(*e.report));
      }
    }
    return cells;
  };

  for (const auto& [label, get] : joint_rows)
    write_row(out, label, blocks([&](const MetricsReport& r) { return format_cells(get(r), width); }));

  write_row(out, "RMSE (Trajectory Error)", blocks([&](const MetricsReport& r) {
              std::vector<std::string> cells(width);
              for (std::size_t i = 0; i < 6; ++i) cells[i] = csv::format(r.cartesian.values[i]);
              return cells;
            }));
  write_row(out, "Control effort", blocks([&](const MetricsReport& r) {
              std::vector<std::string> cells(width);
              cells[0] = csv::format(r.control_effort);
              return cells;
            }));
}

json table_to_json(const ComparisonTable& table) {
  json doc;
  doc["scenario_hash"] = table.scenario_hash;
  doc["reference_hash"] = table.reference_hash;
  doc["controllers"] = json::array();
  for (const ComparisonEntry& e : table.entries) {
    json entry = {{"name", e.name}, {"diverged", e.diverged}, {"reference_hash", e.reference_hash}};
    if (!e.error.empty()) entry["error"] = e.error;
    if (e.report) entry["metrics"] = report_to_json(*e.report);
    if (e.thresholds) entry["thresholds"] = thresholds_to_json(*e.thresholds);
    doc["controllers"].push_back(entry);
  }
  return doc;
}

void export_log(const SimulationLog& log, const std::filesystem::path& path, int dof) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_log_csv(out, log, dof);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void export_table(const ComparisonTable& table, const std::filesystem::path& csv_path,
                  const std::filesystem::path& json_path) {
  std::ofstream csv_out(csv_path);
  if (!csv_out) throw std::runtime_error("cannot write " + csv_path.string());
  write_table_csv(csv_out, table);
  std::ofstream json_out(json_path);
  if (!json_out) throw std::runtime_error("cannot write " + json_path.string());
  json_out << table_to_json(table).dump(2) << '\n';
}

}  // namespace smcsim
