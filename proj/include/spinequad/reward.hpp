#pragma once

#include <array>
#include <cmath>
#include <string>

#include "spinequad/errors.hpp"
#include "spinequad/robot.hpp"

namespace spinequad {

// Hyperparameters of the gait-shaping, spine-undulation, spine-steering and
// tracking rewards. Everything here is configurable; the defaults below are
// the repo's documented choices, with rationale next to each.
struct RewardConfig {
  // Gait shaping: touchdown phase offsets are measured in stride-cycle
  // fractions [0,1) and pulled toward per-pair targets by a Gaussian kernel.
  //
  // sigma = 0.05 keeps the kernel selective enough that a synchronous pair
  // (bound, offset 0) scores many orders of magnitude below the target
  // offset; 0.08 would leave the gap at only ~1e3.
  double sigma = 0.05;               // kernel width, cycle fraction
  double delta_front_target = 0.15;  // desired LF-vs-RF touchdown offset
  double delta_rear_target = 0.15;   // desired LH-vs-RH touchdown offset

  // Spine undulation (pitch DOF). alpha scales the phase-score argument;
  // theta_ext / theta_flex are the useful amplitude caps for dorsal
  // extension and ventral flexion. Flexion gets twice the extension range,
  // matching the anatomical asymmetry this reward is meant to exploit.
  double alpha = 1.0;       // s/rad^2 phase-score sensitivity
  double theta_flex = 0.6;  // rad, flexion amplitude cap (ventral)
  double theta_ext = 0.3;   // rad, extension amplitude cap (dorsal)
  double w_e = 5.0;         // over-rotation penalty weight
  double w_b = 2.0;         // amplitude boost weight

  // Spine steering (yaw DOF).
  double k = 2.0;          // steering reward scale
  double omega_th = 0.1;   // rad/s command dead-zone half-width

  // Velocity tracking kernel width and air-time cap.
  double sigma_v = 0.25;      // m/s (also used for rad/s angular channel)
  double air_time_cap = 0.5;  // s, per-foot swing-time credit cap

  // Weighted mixing of the per-term values into the scalar training reward.
  // Penalty terms (torque, action_rate, orientation) store raw magnitudes
  // and carry negative weights here.
  struct TermWeights {
    double gait = 0.5;
    double spine_undulation = 0.3;
    double spine_steering = 0.3;
    double lin_vel_tracking = 1.0;
    double ang_vel_tracking = 0.5;
    double air_time = 0.25;
    double torque = -2e-5;
    double action_rate = -0.01;
    double orientation = -1.0;
  } term_weights;
};

inline void validate_reward_config(const RewardConfig& cfg) {
  auto fail = [](const std::string& what) {
    throw ValidationError("reward config: " + what);
  };
  if (!(cfg.sigma > 0.0)) fail("sigma must be > 0");
  if (!(cfg.theta_ext > 0.0)) fail("theta_ext must be > 0");
  if (!(cfg.theta_flex > cfg.theta_ext))
    fail("theta_flex must exceed theta_ext");
  if (!(cfg.omega_th > 0.0)) fail("omega_th must be > 0");
  if (!(cfg.delta_front_target > 0.0 && cfg.delta_front_target <= 0.5))
    fail("delta_front_target must lie in (0, 0.5]");
  if (!(cfg.delta_rear_target > 0.0 && cfg.delta_rear_target <= 0.5))
    fail("delta_rear_target must lie in (0, 0.5]");
  if (!(cfg.sigma_v > 0.0)) fail("sigma_v must be > 0");
  if (!(cfg.w_e >= 0.0)) fail("w_e must be >= 0");
  if (!(cfg.air_time_cap >= 0.0)) fail("air_time_cap must be >= 0");
}

// Per-term reward values plus their weighted sum. Penalty terms are stored
// as non-negative magnitudes; their weights are negative.
struct RewardBreakdown {
  double gait = 0.0;
  double spine_undulation = 0.0;
  double spine_steering = 0.0;
  double lin_vel_tracking = 0.0;
  double ang_vel_tracking = 0.0;
  double air_time = 0.0;
  double torque = 0.0;
  double action_rate = 0.0;
  double orientation = 0.0;
  double total = 0.0;
};

// Canonical term order used everywhere the breakdown is summed or
// serialized, so `total` is reproducible bit-for-bit.
inline const std::array<std::string, 9>& reward_term_names() {
  static const std::array<std::string, 9> names = {
      "gait",           "spine_undulation", "spine_steering",
      "lin_vel_tracking", "ang_vel_tracking", "air_time",
      "torque",         "action_rate",      "orientation"};
  return names;
}

inline double reward_term_value(const RewardBreakdown& b, const std::string& name) {
  if (name == "gait") return b.gait;
  if (name == "spine_undulation") return b.spine_undulation;
  if (name == "spine_steering") return b.spine_steering;
  if (name == "lin_vel_tracking") return b.lin_vel_tracking;
  if (name == "ang_vel_tracking") return b.ang_vel_tracking;
  if (name == "air_time") return b.air_time;
  if (name == "torque") return b.torque;
  if (name == "action_rate") return b.action_rate;
  if (name == "orientation") return b.orientation;
  throw ArgumentError("unknown reward term: " + name);
}

inline double reward_term_weight(const RewardConfig& cfg, const std::string& name) {
  const auto& w = cfg.term_weights;
  if (name == "gait") return w.gait;
  if (name == "spine_undulation") return w.spine_undulation;
  if (name == "spine_steering") return w.spine_steering;
  if (name == "lin_vel_tracking") return w.lin_vel_tracking;
  if (name == "ang_vel_tracking") return w.ang_vel_tracking;
  if (name == "air_time") return w.air_time;
  if (name == "torque") return w.torque;
  if (name == "action_rate") return w.action_rate;
  if (name == "orientation") return w.orientation;
  throw ArgumentError("unknown reward term: " + name);
}

// Sums weight_i * term_i in the canonical term order and stores the result
// in b.total (also returned).
inline double finalize_total(RewardBreakdown& b, const RewardConfig& cfg) {
  double total = 0.0;
  for (const auto& name : reward_term_names())
    total += reward_term_weight(cfg, name) * reward_term_value(b, name);
  b.total = total;
  return total;
}

// --- Gait shaping -----------------------------------------------------------

// Shortest circular distance between two phases measured in cycle fractions,
// i.e. min over integer k of |measured - target + k|. Always in [0, 0.5].
inline double phase_distance(double measured, double target) {
  double d = std::fmod(measured - target, 1.0);
  if (d < 0.0) d += 1.0;   // now in [0, 1)
  return std::min(d, 1.0 - d);
}

// Gaussian kernel on the phase distance: exp(-(delta/sigma)^2). One factor
// per foot pair.
inline double gait_pair_reward(double delta, double sigma) {
  if (!(sigma > 0.0))
    throw ArgumentError("gait_pair_reward: sigma must be > 0");
  const double z = delta / sigma;
  return std::exp(-z * z);
}

// Product of the front-pair and rear-pair kernels against their respective
// target offsets. Front and rear phases are deliberately uncoupled: any
// combination hitting both targets scores 1, so the reward shapes *within*
// pair timing without dictating the front-rear relationship.
inline double gait_reward(double front_offset, double rear_offset,
                          const RewardConfig& cfg) {
  const double rf = gait_pair_reward(
      phase_distance(front_offset, cfg.delta_front_target), cfg.sigma);
  const double rr = gait_pair_reward(
      phase_distance(rear_offset, cfg.delta_rear_target), cfg.sigma);
  return rf * rr;
}

// --- Spine undulation --------------------------------------------------------

// Mean of the rear thigh velocities and the sign-inverted front thigh
// velocities. Positive values mean the legs are sweeping in the pattern that
// wants spinal extension; negative means flexion is due.
inline double effective_leg_velocity(const RobotState& state) {
  return (state.qd[kLHThigh] + state.qd[kRHThigh] - state.qd[kLFThigh] -
          state.qd[kRFThigh]) /
         4.0;
}

// tanh(pitch_rate * v_leg * alpha): positive when the spine pitch is moving
// in the direction the legs currently call for, negative when it fights them.
inline double spine_phase_score(double pitch_rate, double v_leg, double alpha) {
  return std::tanh(pitch_rate * v_leg * alpha);
}

struct SpineAmplitude {
  double r_amp = 0.0;     // signed amplitude along the expected direction
  double clamped = 0.0;   // r_amp clamped to [0, theta_th]
  double theta_th = 0.0;  // active amplitude cap (ext or flex)
};

// Directional amplitude measure: s = +1 during expected extension
// (v_leg > 0), -1 otherwise; r_amp = s * theta_pitch. The useful amplitude is
// clamped to [0, theta_th] where theta_th switches between the extension and
// flexion caps.
inline SpineAmplitude spine_amplitude_reward(double theta_pitch, double v_leg,
                                             const RewardConfig& cfg) {
  SpineAmplitude out;
  const double s = v_leg > 0.0 ? 1.0 : -1.0;
  out.r_amp = s * theta_pitch;
  out.theta_th = s > 0.0 ? cfg.theta_ext : cfg.theta_flex;
  out.clamped = clamp(out.r_amp, 0.0, out.theta_th);
  return out;
}

// Quadratic penalty on amplitude beyond the cap: w_e * max(0, r_amp - th)^2.
inline double excess_penalty(double r_amp, double theta_th, double w_e) {
  if (!(w_e >= 0.0))
    throw ArgumentError("excess_penalty: w_e must be >= 0");
  const double over = std::max(0.0, r_amp - theta_th);
  return w_e * over * over;
}

// Combined undulation reward: r_phase * (1 + w_b * clamped_amp) - penalty.
// Deliberately composed from the three primitives above so the composition
// is bit-identical to evaluating them separately.
inline double spine_undulation_reward(const RobotState& state,
                                      const RewardConfig& cfg) {
  const double v_leg = effective_leg_velocity(state);
  const double r_phase =
      spine_phase_score(state.qd[kSpinePitch], v_leg, cfg.alpha);
  const SpineAmplitude amp =
      spine_amplitude_reward(state.q[kSpinePitch], v_leg, cfg);
  const double p = excess_penalty(amp.r_amp, amp.theta_th, cfg.w_e);
  return r_phase * (1.0 + cfg.w_b * amp.clamped) - p;
}

// --- Spine steering ----------------------------------------------------------

// Dead-zoned steering reward: exactly 0 while the commanded yaw rate is
// inside the dead zone, otherwise tanh(k * (-theta_yaw / wz_cmd)). The
// command sits in the denominator, so its sign selects which yaw deflection
// direction is rewarded; deflection against the turn comes out negative.
inline double spine_steering_reward(double theta_yaw, double wz_cmd,
                                    const RewardConfig& cfg) {
  if (std::abs(wz_cmd) < cfg.omega_th) return 0.0;
  return std::tanh((-theta_yaw / wz_cmd) * cfg.k);
}

// --- Tracking and regularizers -----------------------------------------------

// Fills the tracking, air-time and regularizer terms of a breakdown.
// `torques` and `action_delta` may be null when the caller has no actuation
// context (the corresponding penalties are then 0). Gait/spine terms are left
// untouched; callers with phase measurements set those separately and then
// call finalize_total.
inline RewardBreakdown auxiliary_rewards(
    const RobotState& state, const Command& cmd,
    const std::array<double, 4>& air_times, const RewardConfig& cfg,
    const JointVector* torques = nullptr,
    const JointVector* action_delta = nullptr) {
  RewardBreakdown b;

  const double evx = state.base_linear_velocity.x() - cmd.vx;
  const double evy = state.base_linear_velocity.y() - cmd.vy;
  b.lin_vel_tracking =
      std::exp(-(evx * evx + evy * evy) / (cfg.sigma_v * cfg.sigma_v));

  const double ewz = state.base_angular_velocity.z() - cmd.wz;
  b.ang_vel_tracking = std::exp(-(ewz * ewz) / (cfg.sigma_v * cfg.sigma_v));

  for (double at : air_times) b.air_time += std::min(at, cfg.air_time_cap);

  auto squared_sum = [](const JointVector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
  };
  if (torques) b.torque = squared_sum(*torques);
  if (action_delta) b.action_rate = squared_sum(*action_delta);

  // How far the body z-axis leans from vertical: squared horizontal part of
  // gravity expressed in the body frame.
  const Vec3 g_body =
      state.base_orientation.conjugate() * Vec3(0.0, 0.0, -1.0);
  b.orientation = g_body.x() * g_body.x() + g_body.y() * g_body.y();

  return b;
}

// Full per-step reward evaluation for callers that have gait phase
// measurements available. Offsets may be NaN while the analyzer warms up;
// the gait term is 0 in that case.
inline RewardBreakdown evaluate_rewards(
    const RobotState& state, const Command& cmd, double front_offset,
    double rear_offset, const std::array<double, 4>& air_times,
    const RewardConfig& cfg, const JointVector* torques = nullptr,
    const JointVector* action_delta = nullptr) {
  RewardBreakdown b =
      auxiliary_rewards(state, cmd, air_times, cfg, torques, action_delta);
  if (std::isfinite(front_offset) && std::isfinite(rear_offset))
    b.gait = gait_reward(front_offset, rear_offset, cfg);
  b.spine_undulation = spine_undulation_reward(state, cfg);
  b.spine_steering =
      spine_steering_reward(state.q[kSpineYaw], cmd.wz, cfg);
  finalize_total(b, cfg);
  return b;
}

}  // namespace spinequad
