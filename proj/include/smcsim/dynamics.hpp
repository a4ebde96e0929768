#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smcsim/robot_model.hpp"
#include "smcsim/types.hpp"

namespace smcsim {

/// Joint positions (rad), velocities (rad/s) and time (s).
struct JointState {
  JointVector q;
  JointVector qd;
  double t = 0.0;
};

/// M(q) qdd + C(q, qd) qd + G(q) = tau
struct DynamicsTerms {
  JointMatrix M;
  JointMatrix C;
  JointVector G;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, JointState state) : std::runtime_error(what), state_(std::move(state)) {}
  const JointState& state() const { return state_; }

 private:
  JointState state_;
};

class SingularInertiaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

JointMatrix inertia_matrix(const RobotModel& model, const JointVector& q);

/// dM/dq_k for k = 0..n-1, differentiated in closed form through the link Jacobians.
std::vector<JointMatrix> inertia_partials(const RobotModel& model, const JointVector& q);

/// C_kj = sum_i c_ijk qd_i with Christoffel symbols
/// c_ijk = (dM_kj/dq_i + dM_ki/dq_j - dM_ij/dq_k) / 2, so that Mdot - 2C is skew.
JointMatrix christoffel_coriolis(const std::vector<JointMatrix>& partials, const JointVector& qd);

JointMatrix coriolis_matrix(const RobotModel& model, const JointVector& q, const JointVector& qd);

/// G(q) = dP/dq.
JointVector gravity_vector(const RobotModel& model, const JointVector& q);

double potential_energy(const RobotModel& model, const JointVector& q);
double kinetic_energy(const RobotModel& model, const JointVector& q, const JointVector& qd);

DynamicsTerms dynamics_terms(const RobotModel& model, const JointVector& q, const JointVector& qd);

/// qdd = M^-1 (tau - C qd - G), solved through a Cholesky factorisation of M.
JointVector forward_dynamics(const DynamicsTerms& terms, const JointVector& qd, const JointVector& tau);
JointVector forward_dynamics(const RobotModel& model, const JointState& state, const JointVector& tau);

/// Evaluates the dynamics of one model, memoising M, dM/dq and G for the most
/// recent configuration. One instance per simulation run; not thread-safe.
class DynamicsEvaluator {
 public:
  explicit DynamicsEvaluator(const RobotModel& model);

  const RobotModel& model() const { return model_; }
  DynamicsTerms terms(const JointVector& q, const JointVector& qd);
  JointVector acceleration(const JointVector& q, const JointVector& qd, const JointVector& tau);

  /// One classical RK4 step of (q, qd) with tau held constant over dt.
  JointState step(const JointState& state, const JointVector& tau, double dt);

 private:
  void refresh(const JointVector& q);

  RobotModel model_;
  std::optional<JointVector> cached_q_;
  JointMatrix M_;
  std::vector<JointMatrix> partials_;
  JointVector G_;
};

JointState step(const RobotModel& model, const JointState& state, const JointVector& tau, double dt);

}  // namespace smcsim
