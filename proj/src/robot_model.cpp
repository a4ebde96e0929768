#include "smcsim/robot_model.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace smcsim {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

LinkInertia make_link(double mass, Vector3d com, Vector3d principal) {
  LinkInertia link;
  link.mass = mass;
  link.center_of_mass = com;
  link.inertia_tensor = principal.asDiagonal();
  return link;
}

bool finite(const Vector3d& v) { return v.allFinite(); }

std::string joint_label(std::size_t i) { return "joint " + std::to_string(i + 1); }

std::string link_label(std::size_t i) { return "link " + std::to_string(i + 1); }

double number_at(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ModelError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

Vector3d vec3_at(const json& obj, const char* key, const Vector3d& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 3) throw ModelError(where + ": field '" + key + "' must be a 3-element array");
  Vector3d out;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) throw ModelError(where + ": field '" + key + "' must contain numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

Matrix3d mat3_at(const json& obj, const char* key, const Matrix3d& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 3) throw ModelError(where + ": field '" + key + "' must be a 3x3 array");
  Matrix3d out;
  for (int r = 0; r < 3; ++r) {
    if (!v[r].is_array() || v[r].size() != 3) throw ModelError(where + ": field '" + key + "' must be a 3x3 array");
    for (int c = 0; c < 3; ++c) {
      if (!v[r][c].is_number()) throw ModelError(where + ": field '" + key + "' must contain numbers");
      out(r, c) = v[r][c].get<double>();
    }
  }
  return out;
}

const json& array_at(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_array()) throw ModelError(std::string("field '") + key + "' must be an array");
  return v;
}

json vec3_json(const Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

json mat3_json(const Matrix3d& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

}  // namespace

JointVector RobotModel::torque_limits() const {
  JointVector out(limits.count());
  for (int i = 0; i < limits.count(); ++i) out[i] = limits.joints[i].torque_max;
  return out;
}

JointVector RobotModel::position_min() const {
  JointVector out(limits.count());
  for (int i = 0; i < limits.count(); ++i) out[i] = limits.joints[i].position_min;
  return out;
}

JointVector RobotModel::position_max() const {
  JointVector out(limits.count());
  for (int i = 0; i < limits.count(); ++i) out[i] = limits.joints[i].position_max;
  return out;
}

std::vector<std::string> validate_model(const RobotModel& model) {
  std::vector<std::string> diagnostics;
  const std::size_t n = model.dh.joints.size();

  if (n == 0) diagnostics.emplace_back("dh: at least one joint is required");
  if (n > static_cast<std::size_t>(kMaxJoints))
    diagnostics.emplace_back("dh: " + std::to_string(n) + " joints exceeds the supported maximum of " +
                             std::to_string(kMaxJoints));
  if (model.links.size() != n)
    diagnostics.emplace_back("links: expected " + std::to_string(n) + " entries to match dh, found " +
                             std::to_string(model.links.size()));
  if (model.limits.joints.size() != n)
    diagnostics.emplace_back("limits: expected " + std::to_string(n) + " entries to match dh, found " +
                             std::to_string(model.limits.joints.size()));
  if (!finite(model.gravity)) diagnostics.emplace_back("gravity: must be finite");

  for (std::size_t i = 0; i < n; ++i) {
    const DHJoint& j = model.dh.joints[i];
    if (!std::isfinite(j.a) || !std::isfinite(j.d)) diagnostics.push_back("dh " + joint_label(i) + ": lengths must be finite");
    for (auto [label, angle] : {std::pair{"alpha", j.alpha}, std::pair{"theta_offset", j.theta_offset}}) {
      if (!std::isfinite(angle) || angle <= -kPi || angle > kPi)
        diagnostics.push_back("dh " + joint_label(i) + ": " + label + " must lie in (-pi, pi]");
    }
  }

  for (std::size_t i = 0; i < model.links.size(); ++i) {
    const LinkInertia& link = model.links[i];
    if (!(link.mass > 0.0) || !std::isfinite(link.mass))
      diagnostics.push_back(link_label(i) + ": mass must be positive (got " + std::to_string(link.mass) + ")");
    if (!finite(link.center_of_mass)) diagnostics.push_back(link_label(i) + ": center_of_mass must be finite");
    const Matrix3d& I = link.inertia_tensor;
    if (!I.allFinite()) {
      diagnostics.push_back(link_label(i) + ": inertia_tensor must be finite");
    } else if ((I - I.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, I.cwiseAbs().maxCoeff())) {
      diagnostics.push_back(link_label(i) + ": inertia_tensor must be symmetric");
    } else if (Eigen::SelfAdjointEigenSolver<Matrix3d>(I).eigenvalues().minCoeff() <= 0.0) {
      diagnostics.push_back(link_label(i) + ": inertia_tensor must be positive definite");
    }
  }

  for (std::size_t i = 0; i < model.limits.joints.size(); ++i) {
    const JointLimit& l = model.limits.joints[i];
    if (!(l.position_min < l.position_max))
      diagnostics.push_back("limits " + joint_label(i) + ": position_min must be below position_max");
    if (!(l.velocity_max > 0.0)) diagnostics.push_back("limits " + joint_label(i) + ": velocity_max must be positive");
    if (!(l.torque_max > 0.0)) diagnostics.push_back("limits " + joint_label(i) + ": torque_max must be positive");
  }
  return diagnostics;
}

RobotModel load_model(const json& doc) {
  if (!doc.is_object()) throw ModelError("model document must be an object");
  const RobotModel defaults = ur5e_like();
  RobotModel model;
  model.name = doc.contains("name") ? doc.at("name").get<std::string>() : defaults.name;
  model.gravity = vec3_at(doc, "gravity", defaults.gravity, "model");

  if (doc.contains("dh")) {
    const json& rows = array_at(doc, "dh");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string where = "dh " + joint_label(i);
      const DHJoint fallback = i < defaults.dh.joints.size() ? defaults.dh.joints[i] : DHJoint{};
      DHJoint j;
      j.a = number_at(rows[i], "a", fallback.a, where);
      j.d = number_at(rows[i], "d", fallback.d, where);
      j.alpha = number_at(rows[i], "alpha", fallback.alpha, where);
      j.theta_offset = number_at(rows[i], "theta_offset", fallback.theta_offset, where);
      model.dh.joints.push_back(j);
    }
  } else {
    model.dh = defaults.dh;
  }

  if (doc.contains("links")) {
    const json& rows = array_at(doc, "links");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string where = link_label(i);
      const LinkInertia fallback = i < defaults.links.size() ? defaults.links[i] : LinkInertia{};
      LinkInertia link;
      link.mass = number_at(rows[i], "mass", fallback.mass, where);
      link.center_of_mass = vec3_at(rows[i], "center_of_mass", fallback.center_of_mass, where);
      link.inertia_tensor = mat3_at(rows[i], "inertia_tensor", fallback.inertia_tensor, where);
      model.links.push_back(link);
    }
  } else {
    model.links = defaults.links;
  }

  if (doc.contains("limits")) {
    const json& rows = array_at(doc, "limits");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string where = "limits " + joint_label(i);
      const JointLimit fallback = i < defaults.limits.joints.size() ? defaults.limits.joints[i] : JointLimit{};
      JointLimit l;
      l.position_min = number_at(rows[i], "position_min", fallback.position_min, where);
      l.position_max = number_at(rows[i], "position_max", fallback.position_max, where);
      l.velocity_max = number_at(rows[i], "velocity_max", fallback.velocity_max, where);
      l.torque_max = number_at(rows[i], "torque_max", fallback.torque_max, where);
      model.limits.joints.push_back(l);
    }
  } else {
    model.limits = defaults.limits;
  }

  const auto diagnostics = validate_model(model);
  if (!diagnostics.empty()) {
    std::string message = "invalid model '" + model.name + "': " + diagnostics.front();
    for (std::size_t i = 1; i < diagnostics.size(); ++i) message += "; " + diagnostics[i];
    throw ModelError(message);
  }
  return model;
}

RobotModel load_model_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("model parse failure: ") + e.what());
  }
  try {
    return load_model(doc);
  } catch (const json::exception& e) {
    throw ModelError(std::string("model field type error: ") + e.what());
  }
}

RobotModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_model_text(buffer.str());
}

json model_to_json(const RobotModel& model) {
  json doc;
  doc["name"] = model.name;
  doc["gravity"] = vec3_json(model.gravity);
  doc["dh"] = json::array();
  for (const DHJoint& j : model.dh.joints)
    doc["dh"].push_back({{"a", j.a}, {"d", j.d}, {"alpha", j.alpha}, {"theta_offset", j.theta_offset}});
  doc["links"] = json::array();
  for (const LinkInertia& l : model.links)
    doc["links"].push_back({{"mass", l.mass},
                            {"center_of_mass", vec3_json(l.center_of_mass)},
                            {"inertia_tensor", mat3_json(l.inertia_tensor)}});
  doc["limits"] = json::array();
  for (const JointLimit& l : model.limits.joints)
    doc["limits"].push_back({{"position_min", l.position_min},
                             {"position_max", l.position_max},
                             {"velocity_max", l.velocity_max},
                             {"torque_max", l.torque_max}});
  return doc;
}

std::string serialize_model(const RobotModel& model) { return model_to_json(model).dump(2) + "\n"; }

RobotModel resolve_model(const std::string& name_or_path) {
  if (name_or_path == "ur5e_like") return ur5e_like();
  if (name_or_path == "pendulum1") return pendulum1();
  if (name_or_path == "planar2") return planar2();
  return load_model_file(name_or_path);
}

RobotModel ur5e_like() {
  RobotModel m;
  m.name = "ur5e_like";
  m.dh.joints = {
      {0.0, 0.1625, kPi / 2, 0.0},   {-0.425, 0.0, 0.0, 0.0},      {-0.3922, 0.0, 0.0, 0.0},
      {0.0, 0.1333, kPi / 2, 0.0},   {0.0, 0.0997, -kPi / 2, 0.0}, {0.0, 0.0996, 0.0, 0.0},
  };
  m.links = {
      make_link(3.761, {0.0, -0.02561, 0.00193}, {0.0084, 0.0064, 0.0084}),
      make_link(8.058, {0.2125, 0.0, 0.11336}, {0.0078, 0.21, 0.21}),
      make_link(2.846, {0.15, 0.0, 0.0265}, {0.0016, 0.0462, 0.0462}),
      make_link(1.37, {0.0, -0.0018, 0.01634}, {0.0016, 0.0016, 0.0009}),
      make_link(1.3, {0.0, 0.0018, 0.01634}, {0.0016, 0.0016, 0.0009}),
      make_link(0.365, {0.0, 0.0, -0.001159}, {0.0001, 0.0001, 0.0001}),
  };
  const double two_pi = 2.0 * kPi;
  m.limits.joints = {
      {-two_pi, two_pi, kPi, 150.0}, {-two_pi, two_pi, kPi, 150.0}, {-kPi, kPi, kPi, 150.0},
      {-two_pi, two_pi, kPi, 28.0},  {-two_pi, two_pi, kPi, 28.0},  {-two_pi, two_pi, kPi, 28.0},
  };
  return m;
}

RobotModel pendulum1() {
  RobotModel m;
  m.name = "pendulum1";
  m.gravity = Vector3d(0.0, -9.81, 0.0);
  m.dh.joints = {{1.0, 0.0, 0.0, 0.0}};
  m.links = {make_link(1.0, Vector3d::Zero(), {1e-3, 1e-3, 1e-3})};
  m.limits.joints = {{-kPi, kPi, 10.0, 50.0}};
  return m;
}

RobotModel planar2() {
  RobotModel m;
  m.name = "planar2";
  m.gravity = Vector3d(0.0, -9.81, 0.0);
  m.dh.joints = {{0.5, 0.0, 0.0, 0.0}, {0.4, 0.0, 0.0, 0.0}};
  m.links = {
      make_link(2.0, {-0.25, 0.0, 0.0}, {1e-3, 2.0 * 0.25 / 12.0, 2.0 * 0.25 / 12.0}),
      make_link(1.0, {-0.2, 0.0, 0.0}, {1e-3, 1.0 * 0.16 / 12.0, 1.0 * 0.16 / 12.0}),
  };
  m.limits.joints = {{-kPi, kPi, 10.0, 100.0}, {-kPi, kPi, 10.0, 100.0}};
  return m;
}

RobotModel scale_masses(const RobotModel& model, double factor) {
  if (!(factor > 0.0)) throw ModelError("mass scale factor must be positive");
  RobotModel scaled = model;
  for (LinkInertia& link : scaled.links) {
    link.mass *= factor;
    link.inertia_tensor *= factor;
  }
  return scaled;
}

}  // namespace smcsim
