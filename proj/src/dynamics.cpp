#include "smcsim/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "smcsim/kinematics.hpp"

namespace smcsim {

namespace {

// Link frames plus world-frame centre-of-mass positions for one configuration.
struct LinkGeometry {
  std::vector<Isometry3d> frames;
  std::vector<Vector3d> com;
};

LinkGeometry link_geometry(const RobotModel& model, const JointVector& q) {
  LinkGeometry g;
  g.frames = link_frames(model, q);
  g.com.reserve(model.dof());
  for (int i = 0; i < model.dof(); ++i) g.com.push_back(g.frames[i + 1] * model.links[i].center_of_mass);
  return g;
}

void check_state(const RobotModel& model, const JointVector& q, const JointVector& qd, const char* what) {
  require_joint_count(model, q, what);
  require_joint_count(model, qd, what);
}

std::string describe(const JointState& s) {
  std::ostringstream out;
  out << "t=" << s.t << " q=[" << s.q.transpose() << "] qd=[" << s.qd.transpose() << "]";
  return out.str();
}

}  // namespace

JointMatrix inertia_matrix(const RobotModel& model, const JointVector& q) {
  const int n = model.dof();
  const LinkGeometry g = link_geometry(model, q);
  JointMatrix M = JointMatrix::Zero(n, n);
  LinearJacobian Jv(3, n), Jw(3, n);
  for (int i = 0; i < n; ++i) {
    Jv.setZero();
    Jw.setZero();
    for (int j = 0; j <= i; ++j) {
      const Vector3d z = g.frames[j].linear().col(2);
      Jv.col(j) = z.cross(g.com[i] - g.frames[j].translation());
      Jw.col(j) = z;
    }
    const Matrix3d R = g.frames[i + 1].linear();
    const Matrix3d I_world = R * model.links[i].inertia_tensor * R.transpose();
    M.noalias() += model.links[i].mass * Jv.transpose() * Jv;
    M.noalias() += Jw.transpose() * I_world * Jw;
  }
  return 0.5 * (M + M.transpose());
}

std::vector<JointMatrix> inertia_partials(const RobotModel& model, const JointVector& q) {
  require_joint_count(model, q, "inertia_partials");
  const int n = model.dof();
  const LinkGeometry g = link_geometry(model, q);
  std::vector<JointMatrix> partials(n, JointMatrix::Zero(n, n));
  LinearJacobian Jv(3, n), Jw(3, n), dJv(3, n), dJw(3, n);
  for (int i = 0; i < n; ++i) {
    const Vector3d& pc = g.com[i];
    Jv.setZero();
    Jw.setZero();
    for (int j = 0; j <= i; ++j) {
      const Vector3d z = g.frames[j].linear().col(2);
      Jv.col(j) = z.cross(pc - g.frames[j].translation());
      Jw.col(j) = z;
    }
    const Matrix3d R = g.frames[i + 1].linear();
    const Matrix3d A = R * model.links[i].inertia_tensor * R.transpose();
    const double m = model.links[i].mass;

    // Joint k rotates every frame after it about z_k through o_k.
    for (int k = 0; k <= i; ++k) {
      const Vector3d zk = g.frames[k].linear().col(2);
      const Vector3d ok = g.frames[k].translation();
      const Vector3d dpc = zk.cross(pc - ok);
      Matrix3d Zk;
      Zk << 0, -zk.z(), zk.y(), zk.z(), 0, -zk.x(), -zk.y(), zk.x(), 0;
      const Matrix3d dA = Zk * A - A * Zk;
      dJv.setZero();
      dJw.setZero();
      for (int j = 0; j <= i; ++j) {
        const Vector3d z = g.frames[j].linear().col(2);
        const Vector3d o = g.frames[j].translation();
        const Vector3d dz = k < j ? Vector3d(zk.cross(z)) : Vector3d::Zero();
        const Vector3d dO = k < j ? Vector3d(zk.cross(o - ok)) : Vector3d::Zero();
        dJv.col(j) = dz.cross(pc - o) + z.cross(dpc - dO);
        dJw.col(j) = dz;
      }
      JointMatrix& dM = partials[k];
      dM.noalias() += m * (dJv.transpose() * Jv + Jv.transpose() * dJv);
      dM.noalias() += dJw.transpose() * A * Jw + Jw.transpose() * dA * Jw + Jw.transpose() * A * dJw;
    }
  }
  for (JointMatrix& dM : partials) dM = 0.5 * (dM + dM.transpose()).eval();
  return partials;
}

JointMatrix christoffel_coriolis(const std::vector<JointMatrix>& partials, const JointVector& qd) {
  const int n = static_cast<int>(partials.size());
  JointMatrix C = JointMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) sum += (partials[i](k, j) + partials[j](k, i) - partials[k](i, j)) * qd[i];
      C(k, j) = 0.5 * sum;
    }
  }
  return C;
}

JointMatrix coriolis_matrix(const RobotModel& model, const JointVector& q, const JointVector& qd) {
  check_state(model, q, qd, "coriolis_matrix");
  return christoffel_coriolis(inertia_partials(model, q), qd);
}

JointVector gravity_vector(const RobotModel& model, const JointVector& q) {
  const int n = model.dof();
  const LinkGeometry g = link_geometry(model, q);
  JointVector G = JointVector::Zero(n);
  for (int j = 0; j < n; ++j) {
    const Vector3d z = g.frames[j].linear().col(2);
    const Vector3d o = g.frames[j].translation();
    double sum = 0.0;
    for (int i = j; i < n; ++i) sum += model.links[i].mass * z.cross(g.com[i] - o).dot(model.gravity);
    G[j] = -sum;
  }
  return G;
}

double potential_energy(const RobotModel& model, const JointVector& q) {
  const LinkGeometry g = link_geometry(model, q);
  double P = 0.0;
  for (int i = 0; i < model.dof(); ++i) P -= model.links[i].mass * model.gravity.dot(g.com[i]);
  return P;
}

double kinetic_energy(const RobotModel& model, const JointVector& q, const JointVector& qd) {
  check_state(model, q, qd, "kinetic_energy");
  return 0.5 * qd.dot(inertia_matrix(model, q) * qd);
}

DynamicsTerms dynamics_terms(const RobotModel& model, const JointVector& q, const JointVector& qd) {
  check_state(model, q, qd, "dynamics_terms");
  return {inertia_matrix(model, q), coriolis_matrix(model, q, qd), gravity_vector(model, q)};
}

JointVector forward_dynamics(const DynamicsTerms& terms, const JointVector& qd, const JointVector& tau) {
  if (tau.size() != terms.M.rows()) throw DimensionError("forward_dynamics: torque dimension mismatch");
  const Eigen::LLT<JointMatrix> llt(terms.M);
  if (llt.info() != Eigen::Success) throw SingularInertiaError("forward_dynamics: inertia matrix is not positive definite");
  return llt.solve(tau - terms.C * qd - terms.G);
}

JointVector forward_dynamics(const RobotModel& model, const JointState& state, const JointVector& tau) {
  require_joint_count(model, tau, "forward_dynamics");
  return forward_dynamics(dynamics_terms(model, state.q, state.qd), state.qd, tau);
}

DynamicsEvaluator::DynamicsEvaluator(const RobotModel& model) : model_(model) {}

void DynamicsEvaluator::refresh(const JointVector& q) {
  if (cached_q_ && *cached_q_ == q) return;
  require_joint_count(model_, q, "DynamicsEvaluator");
  M_ = inertia_matrix(model_, q);
  partials_ = inertia_partials(model_, q);
  G_ = gravity_vector(model_, q);
  cached_q_ = q;
}

DynamicsTerms DynamicsEvaluator::terms(const JointVector& q, const JointVector& qd) {
  require_joint_count(model_, qd, "DynamicsEvaluator");
  refresh(q);
  return {M_, christoffel_coriolis(partials_, qd), G_};
}

JointVector DynamicsEvaluator::acceleration(const JointVector& q, const JointVector& qd, const JointVector& tau) {
  return forward_dynamics(terms(q, qd), qd, tau);
}

JointState DynamicsEvaluator::step(const JointState& state, const JointVector& tau, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  require_joint_count(model_, tau, "step");
  const JointVector& q = state.q;
  const JointVector& v = state.qd;

  const JointVector a1 = acceleration(q, v, tau);
  const JointVector q2 = q + 0.5 * dt * v, v2 = v + 0.5 * dt * a1;
  const JointVector a2 = acceleration(q2, v2, tau);
  const JointVector q3 = q + 0.5 * dt * v2, v3 = v + 0.5 * dt * a2;
  const JointVector a3 = acceleration(q3, v3, tau);
  const JointVector q4 = q + dt * v3, v4 = v + dt * a3;
  const JointVector a4 = acceleration(q4, v4, tau);

  JointState next;
  next.q = q + (dt / 6.0) * (v + 2.0 * v2 + 2.0 * v3 + v4);
  next.qd = v + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  next.t = state.t + dt;
  if (!next.q.allFinite() || !next.qd.allFinite())
    throw DivergenceError("non-finite state after RK4 step from " + describe(state), next);
  return next;
}

JointState step(const RobotModel& model, const JointState& state, const JointVector& tau, double dt) {
  DynamicsEvaluator evaluator(model);
  return evaluator.step(state, tau, dt);
}

}  // namespace smcsim
