#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "smcsim/dynamics.hpp"
#include "smcsim/robot_model.hpp"
#include "smcsim/types.hpp"

namespace smcsim {

class GainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sliding-surface gains, one entry per joint.
///   sigma = p1 * e + p2 * edot, switching magnitude p3.
struct SlidingParams {
  JointVector p1;
  JointVector p2;
  JointVector p3;

  /// Same three scalars on every joint.
  static SlidingParams uniform(int n, double p1, double p2, double p3);
  /// Throws GainError unless every gain is finite and strictly positive.
  void validate(int n) const;
};

struct PidGains {
  JointVector kp;
  JointVector ki;
  JointVector kd;

  static PidGains uniform(int n, double kp, double ki, double kd);
  /// Throws GainError unless every gain is finite and non-negative.
  void validate(int n) const;
};

/// Desired joint position, velocity and acceleration at one instant.
struct Reference {
  JointVector position;
  JointVector velocity;
  JointVector acceleration;

  static Reference hold(const JointVector& position);
};

struct TrackingError {
  JointVector e;   // q - q_desired
  JointVector ed;  // qd - qd_desired
};

struct ControlDiagnostics {
  JointVector sigma;
  double V = 0.0;
  JointVector e;
  JointVector tau;
};

struct ControlOutput {
  JointVector tau;
  ControlDiagnostics diagnostics;
};

enum class ControllerKind { mbsmc, nmbsmc, pid };

std::string_view to_string(ControllerKind kind);
/// Accepts "mbsmc", "nmbsmc" and "pid" (case-insensitive).
ControllerKind parse_controller_kind(std::string_view name);

/// Width of the band |sigma| <= epsilon treated as the sliding phase in diagnostics.
inline constexpr double kBoundaryLayer = 0.05;

/// Clamp for the PID error integral, rad*s per joint.
inline constexpr double kIntegralClamp = 2.0;

TrackingError tracking_error(const JointState& state, const Reference& ref);

JointVector sliding_surface(const JointVector& e, const JointVector& ed, const SlidingParams& params);

/// V = 0.5 * |sigma|^2
double lyapunov_value(const JointVector& sigma);

/// Upper bound |sigma0| / p3 on the time to reach sigma = 0 under ideal switching.
double reaching_time_bound(double sigma0, double p3);

/// Torque that makes the closed loop tangent to sigma = 0:
///   C qd + G + M qdd_ref - (p1 / p2) M edot.
JointVector equivalent_control(const DynamicsTerms& terms, const JointState& state, const Reference& ref,
                               const SlidingParams& params);

/// Smoothed switching torque -(M / p2) p3 tanh(sigma).
JointVector switching_control(const DynamicsTerms& terms, const JointVector& sigma, const SlidingParams& params);

/// Model-based sliding-mode torque, equivalent plus switching control.
ControlOutput mbsmc_torque(const DynamicsTerms& terms, const JointState& state, const Reference& ref,
                           const SlidingParams& params);
ControlOutput mbsmc_torque(const RobotModel& model, const JointState& state, const Reference& ref,
                           const SlidingParams& params);

/// Non-model-based sliding-mode torque -(p1 e + p3 tanh(sigma)).
ControlOutput nmbsmc_torque(const JointVector& e, const JointVector& ed, const SlidingParams& params);

/// -(kp e + ki * integral + kd edot)
JointVector pid_torque(const JointVector& e, const JointVector& e_integral, const JointVector& ed,
                       const PidGains& gains);

/// Rectangle-rule update of the error integral with the anti-windup clamp.
JointVector integrate_error(const JointVector& e_integral, const JointVector& e, double dt,
                            double clamp = kIntegralClamp);

}  // namespace smcsim
