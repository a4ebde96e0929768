#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "smcsim/types.hpp"

namespace smcsim {

/// Standard Denavit-Hartenberg row: Rz(theta + theta_offset) Tz(d) Tx(a) Rx(alpha).
struct DHJoint {
  double a = 0.0;
  double d = 0.0;
  double alpha = 0.0;
  double theta_offset = 0.0;

  bool operator==(const DHJoint&) const = default;
};

struct DHParameters {
  std::vector<DHJoint> joints;

  int count() const { return static_cast<int>(joints.size()); }
  bool operator==(const DHParameters&) const = default;
};

/// Rigid-body parameters of one link, expressed in that link's DH frame.
/// The inertia tensor is taken about the centre of mass.
struct LinkInertia {
  double mass = 0.0;
  Vector3d center_of_mass = Vector3d::Zero();
  Matrix3d inertia_tensor = Matrix3d::Zero();

  bool operator==(const LinkInertia&) const = default;
};

struct JointLimit {
  double position_min = 0.0;
  double position_max = 0.0;
  double velocity_max = 0.0;
  double torque_max = 0.0;

  bool operator==(const JointLimit&) const = default;
};

struct JointLimits {
  std::vector<JointLimit> joints;

  int count() const { return static_cast<int>(joints.size()); }
  bool operator==(const JointLimits&) const = default;
};

/// Kinematic and inertial description of a serial arm with revolute joints.
/// Treated as immutable once constructed.
struct RobotModel {
  std::string name;
  DHParameters dh;
  std::vector<LinkInertia> links;
  JointLimits limits;
  Vector3d gravity{0.0, 0.0, -9.81};

  int dof() const { return dh.count(); }
  bool operator==(const RobotModel&) const = default;

  JointVector torque_limits() const;
  JointVector position_min() const;
  JointVector position_max() const;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One diagnostic per violated invariant; empty when the model is valid.
std::vector<std::string> validate_model(const RobotModel& model);

/// Parses a model document. Absent sections fall back to the ur5e_like
/// defaults; absent per-joint entries fall back to the default joint of the
/// same index. Throws ModelError naming the offending field.
RobotModel load_model(const nlohmann::json& document);
RobotModel load_model_text(std::string_view text);
RobotModel load_model_file(const std::filesystem::path& path);

nlohmann::json model_to_json(const RobotModel& model);
std::string serialize_model(const RobotModel& model);

/// Resolves "ur5e_like", "pendulum1" and "planar2" to the built-in models and
/// anything else to a file path.
RobotModel resolve_model(const std::string& name_or_path);

/// Approximate UR5e-class arm assembled from published manufacturer figures.
RobotModel ur5e_like();
/// One 1 m link, 1 kg point mass at the tip, gravity along -y.
RobotModel pendulum1();
/// Two-link planar arm moving in the vertical x-y plane.
RobotModel planar2();

/// Copy of `model` with every link mass and inertia tensor multiplied by `factor`.
RobotModel scale_masses(const RobotModel& model, double factor);

}  // namespace smcsim
