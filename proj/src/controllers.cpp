#include "smcsim/controllers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "smcsim/kinematics.hpp"

namespace smcsim {

namespace {

void require_size(const JointVector& v, Eigen::Index n, const char* what) {
  if (v.size() != n)
    throw DimensionError(std::string(what) + ": expected " + std::to_string(n) + " entries, got " +
                         std::to_string(v.size()));
}

JointVector tanh_of(const JointVector& v) { return v.array().tanh().matrix(); }

}  // namespace

SlidingParams SlidingParams::uniform(int n, double p1, double p2, double p3) {
  return {JointVector::Constant(n, p1), JointVector::Constant(n, p2), JointVector::Constant(n, p3)};
}

void SlidingParams::validate(int n) const {
  require_size(p1, n, "SlidingParams.p1");
  require_size(p2, n, "SlidingParams.p2");
  require_size(p3, n, "SlidingParams.p3");
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(p1[i]) || !(p1[i] > 0.0)) throw GainError("P1 must be positive on joint " + std::to_string(i + 1));
    // p2 scales M^-1 in L_g(sigma); zero would break transversality.
    if (!std::isfinite(p2[i]) || !(p2[i] > 0.0))
      throw GainError("P2 must be positive on joint " + std::to_string(i + 1) + " (transversality)");
    if (!std::isfinite(p3[i]) || !(p3[i] > 0.0)) throw GainError("P3 must be positive on joint " + std::to_string(i + 1));
  }
}

PidGains PidGains::uniform(int n, double kp, double ki, double kd) {
  return {JointVector::Constant(n, kp), JointVector::Constant(n, ki), JointVector::Constant(n, kd)};
}

void PidGains::validate(int n) const {
  require_size(kp, n, "PidGains.kp");
  require_size(ki, n, "PidGains.ki");
  require_size(kd, n, "PidGains.kd");
  for (const JointVector* g : {&kp, &ki, &kd})
    if (!g->allFinite() || (g->array() < 0.0).any()) throw GainError("PID gains must be finite and non-negative");
}

Reference Reference::hold(const JointVector& position) {
  return {position, JointVector::Zero(position.size()), JointVector::Zero(position.size())};
}

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::mbsmc:
      return "mbsmc";
    case ControllerKind::nmbsmc:
      return "nmbsmc";
    case ControllerKind::pid:
      return "pid";
  }
  return "unknown";
}

ControllerKind parse_controller_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "mbsmc") return ControllerKind::mbsmc;
  if (lower == "nmbsmc") return ControllerKind::nmbsmc;
  if (lower == "pid") return ControllerKind::pid;
  throw std::invalid_argument("unknown controller '" + std::string(name) + "'");
}

TrackingError tracking_error(const JointState& state, const Reference& ref) {
  require_size(ref.position, state.q.size(), "tracking_error");
  require_size(ref.velocity, state.qd.size(), "tracking_error");
  return {state.q - ref.position, state.qd - ref.velocity};
}

JointVector sliding_surface(const JointVector& e, const JointVector& ed, const SlidingParams& params) {
  require_size(ed, e.size(), "sliding_surface");
  require_size(params.p1, e.size(), "sliding_surface");
  require_size(params.p2, e.size(), "sliding_surface");
  return params.p1.cwiseProduct(e) + params.p2.cwiseProduct(ed);
}

double lyapunov_value(const JointVector& sigma) { return 0.5 * sigma.squaredNorm(); }

double reaching_time_bound(double sigma0, double p3) {
  if (!(p3 > 0.0)) throw GainError("reaching_time_bound: P3 must be positive");
  return std::abs(sigma0) / p3;
}

JointVector equivalent_control(const DynamicsTerms& terms, const JointState& state, const Reference& ref,
                               const SlidingParams& params) {
  const auto err = tracking_error(state, ref);
  require_size(ref.acceleration, state.q.size(), "equivalent_control");
  const JointVector ratio = params.p1.cwiseQuotient(params.p2);
  return terms.C * state.qd + terms.G + terms.M * ref.acceleration - terms.M * ratio.cwiseProduct(err.ed);
}

JointVector switching_control(const DynamicsTerms& terms, const JointVector& sigma, const SlidingParams& params) {
  return -(terms.M * params.p3.cwiseQuotient(params.p2).cwiseProduct(tanh_of(sigma)));
}

ControlOutput mbsmc_torque(const DynamicsTerms& terms, const JointState& state, const Reference& ref,
                           const SlidingParams& params) {
  const int n = static_cast<int>(state.q.size());
  params.validate(n);
  const auto err = tracking_error(state, ref);
  const JointVector sigma = sliding_surface(err.e, err.ed, params);
  ControlOutput out;
  out.tau = equivalent_control(terms, state, ref, params) + switching_control(terms, sigma, params);
  if (!out.tau.allFinite()) throw std::domain_error("mbsmc_torque: non-finite torque");
  out.diagnostics = {sigma, lyapunov_value(sigma), err.e, out.tau};
  return out;
}

ControlOutput mbsmc_torque(const RobotModel& model, const JointState& state, const Reference& ref,
                           const SlidingParams& params) {
  require_joint_count(model, state.q, "mbsmc_torque");
  return mbsmc_torque(dynamics_terms(model, state.q, state.qd), state, ref, params);
}

ControlOutput nmbsmc_torque(const JointVector& e, const JointVector& ed, const SlidingParams& params) {
  params.validate(static_cast<int>(e.size()));
  const JointVector sigma = sliding_surface(e, ed, params);
  ControlOutput out;
  out.tau = -(params.p1.cwiseProduct(e) + params.p3.cwiseProduct(tanh_of(sigma)));
  out.diagnostics = {sigma, lyapunov_value(sigma), e, out.tau};
  return out;
}

JointVector pid_torque(const JointVector& e, const JointVector& e_integral, const JointVector& ed,
                       const PidGains& gains) {
  require_size(e_integral, e.size(), "pid_torque");
  require_size(ed, e.size(), "pid_torque");
  require_size(gains.kp, e.size(), "pid_torque");
  return -(gains.kp.cwiseProduct(e) + gains.ki.cwiseProduct(e_integral) + gains.kd.cwiseProduct(ed));
}

JointVector integrate_error(const JointVector& e_integral, const JointVector& e, double dt, double clamp) {
  require_size(e, e_integral.size(), "integrate_error");
  return (e_integral + dt * e).cwiseMax(-clamp).cwiseMin(clamp);
}

}  // namespace smcsim
