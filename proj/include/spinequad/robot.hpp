#pragma once

#include <array>
#include <string>
#include <vector>

#include "spinequad/errors.hpp"
#include "spinequad/geometry.hpp"

namespace spinequad {

inline constexpr int kNumJoints = 15;
inline constexpr int kNumLegs = 4;

using JointVector = std::array<double, kNumJoints>;

// Fixed joint ordering used by every vector in the repo:
// per leg (LF, RF, LH, RH): hip, thigh, calf; then spine yaw, pitch, roll.
enum JointIndex : int {
  kLFHip = 0,
  kLFThigh,
  kLFCalf,
  kRFHip,
  kRFThigh,
  kRFCalf,
  kLHHip,
  kLHThigh,
  kLHCalf,
  kRHHip,
  kRHThigh,
  kRHCalf,
  kSpineYaw,
  kSpinePitch,
  kSpineRoll,
};

// Foot ordering for contact vectors: LF, RF, LH, RH.
enum FootIndex : int { kFootLF = 0, kFootRF, kFootLH, kFootRH };

inline const std::array<std::string, kNumJoints>& canonical_joint_names() {
  static const std::array<std::string, kNumJoints> names = {
      "LF_hip",  "LF_thigh", "LF_calf", "RF_hip",    "RF_thigh",
      "RF_calf", "LH_hip",   "LH_thigh", "LH_calf",  "RH_hip",
      "RH_thigh", "RH_calf", "spine_yaw", "spine_pitch", "spine_roll"};
  return names;
}

// How the total mass is apportioned onto links. Paper gives only the
// aggregate 20 kg; the split is a documented, configurable choice.
struct MassSplit {
  double front_body = 0.40;
  double rear_body = 0.35;
  double legs = 0.25;        // spread evenly over the four legs
  double thigh_share = 0.6;  // thigh fraction of one leg's mass (rest: calf)
};

// Static morphology of the spined quadruped. Immutable after validation;
// shared read-only across workers.
struct RobotSpec {
  std::array<std::string, kNumJoints> joint_names = canonical_joint_names();
  std::array<double, kNumJoints> joint_lower{};
  std::array<double, kNumJoints> joint_upper{};
  std::array<double, kNumJoints> torque_limit{};
  std::array<double, kNumJoints> default_pose{};  // nominal standing targets

  double total_mass = 0.0;       // kg
  double body_length = 0.0;      // m, nose to tail
  double body_width = 0.0;       // m
  double leg_length = 0.0;       // m, thigh + calf
  double standing_height = 0.0;  // m
  double control_rate = 0.0;     // Hz
  int sim_substeps = 0;          // physics steps per control step

  MassSplit mass_split;

  double control_dt() const { return 1.0 / control_rate; }
  double physics_dt() const { return control_dt() / sim_substeps; }
};

// The morphology published for the robot: 20 kg, 625 mm body, 580 mm legs,
// 33.5 N-m leg actuators, 50 N-m spine actuators, spine ranges
// yaw +-1.0 / pitch +-1.5 / roll +-2.0 rad, 50 Hz control.
inline RobotSpec make_canonical_spec() {
  RobotSpec s;
  s.total_mass = 20.0;
  s.body_length = 0.625;
  s.body_width = 0.380;
  s.leg_length = 0.580;
  s.standing_height = 0.440;
  s.control_rate = 50.0;
  s.sim_substeps = 20;

  // Leg limits are not published; these are conventional quadruped ranges.
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const int base = 3 * leg;
    s.joint_lower[base + 0] = -0.8;
    s.joint_upper[base + 0] = 0.8;
    s.joint_lower[base + 1] = -1.2;
    s.joint_upper[base + 1] = 3.2;
    s.joint_lower[base + 2] = -2.7;
    s.joint_upper[base + 2] = 2.7;
    s.torque_limit[base + 0] = 33.5;
    s.torque_limit[base + 1] = 33.5;
    s.torque_limit[base + 2] = 33.5;
  }
  s.joint_lower[kSpineYaw] = -1.0;
  s.joint_upper[kSpineYaw] = 1.0;
  s.joint_lower[kSpinePitch] = -1.5;
  s.joint_upper[kSpinePitch] = 1.5;
  s.joint_lower[kSpineRoll] = -2.0;
  s.joint_upper[kSpineRoll] = 2.0;
  s.torque_limit[kSpineYaw] = 50.0;
  s.torque_limit[kSpinePitch] = 50.0;
  s.torque_limit[kSpineRoll] = 50.0;

  // Nominal stand: feet under hips at standing_height with symmetric knee
  // bend (two equal segments). thigh forward, calf back.
  const double half = s.leg_length / 2.0;
  const double knee_interior = std::acos(
      clamp(1.0 - (s.standing_height * s.standing_height) /
                      (2.0 * half * half),
            -1.0, 1.0));
  const double knee_bend = kPi - knee_interior;  // bend from straight leg
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const int base = 3 * leg;
    s.default_pose[base + 0] = 0.0;
    s.default_pose[base + 1] = knee_bend / 2.0;
    s.default_pose[base + 2] = -knee_bend;
  }
  s.default_pose[kSpineYaw] = 0.0;
  s.default_pose[kSpinePitch] = 0.0;
  s.default_pose[kSpineRoll] = 0.0;
  return s;
}

// Validates every RobotSpec invariant; throws ValidationError naming the
// offending field.
inline void validate_spec(const RobotSpec& s) {
  const auto& names = canonical_joint_names();
  for (int i = 0; i < kNumJoints; ++i) {
    if (s.joint_names[i] != names[i]) {
      throw ValidationError("joint_names[" + std::to_string(i) +
                            "]: expected '" + names[i] + "', got '" +
                            s.joint_names[i] + "' (fixed canonical order)");
    }
  }
  for (int i = 0; i < kNumJoints; ++i) {
    if (!(s.joint_lower[i] < s.joint_upper[i])) {
      throw ValidationError("joint_lower/joint_upper: joint '" +
                            s.joint_names[i] +
                            "' has lower >= upper");
    }
    if (!(s.torque_limit[i] > 0.0)) {
      throw ValidationError("torque_limit: joint '" + s.joint_names[i] +
                            "' must be > 0");
    }
    if (s.default_pose[i] < s.joint_lower[i] ||
        s.default_pose[i] > s.joint_upper[i]) {
      throw ValidationError("default_pose: joint '" + s.joint_names[i] +
                            "' outside joint limits");
    }
  }
  if (!(s.total_mass > 0.0)) throw ValidationError("total_mass: must be > 0");
  if (!(s.body_length > 0.0)) throw ValidationError("body_length: must be > 0");
  if (!(s.body_width > 0.0)) throw ValidationError("body_width: must be > 0");
  if (!(s.leg_length > 0.0)) throw ValidationError("leg_length: must be > 0");
  if (!(s.standing_height > 0.0))
    throw ValidationError("standing_height: must be > 0");
  if (!(s.control_rate > 0.0))
    throw ValidationError("control_rate: must be > 0");
  if (s.sim_substeps < 1) throw ValidationError("sim_substeps: must be >= 1");
  const double split_sum =
      s.mass_split.front_body + s.mass_split.rear_body + s.mass_split.legs;
  if (std::abs(split_sum - 1.0) > 1e-9)
    throw ValidationError("mass_split: fractions must sum to 1");
  if (s.mass_split.thigh_share <= 0.0 || s.mass_split.thigh_share >= 1.0)
    throw ValidationError("mass_split.thigh_share: must be in (0,1)");
}

// Instantaneous dynamic state shared across modules. Base twist is expressed
// in the body frame; base_euler is the intrinsic Z-Y-X readout of
// base_orientation.
struct RobotState {
  double t = 0.0;
  std::array<double, kNumJoints> q{};
  std::array<double, kNumJoints> qd{};
  Vec3 base_position = Vec3::Zero();
  Quat base_orientation = Quat::Identity();
  Vec3 base_linear_velocity = Vec3::Zero();   // body frame
  Vec3 base_angular_velocity = Vec3::Zero();  // body frame
  std::array<bool, kNumLegs> foot_contact{};

  EulerZYX base_euler() const { return euler_zyx_from_quat(base_orientation); }
};

// Velocity command with the acceleration-constrained ramp state. Targets are
// what the curriculum sampled; vx/vy/wz are the ramped values the policy sees.
struct Command {
  double vx_target = 0.0;  // m/s
  double vy_target = 0.0;  // m/s
  double wz_target = 0.0;  // rad/s

  double vx = 0.0;
  double vy = 0.0;
  double wz = 0.0;

  double a_max_linear = 1.0;   // m/s^2, shared by vx and vy
  double a_max_angular = 2.0;  // rad/s^2

  // wz stays at zero and does not ramp until t >= wz_activation_time.
  double wz_activation_time = 0.0;
};

// Clamps each target into [joint_lower, joint_upper]; entries already inside
// pass through unchanged. Idempotent.
inline std::array<double, kNumJoints> clamp_joint_targets(
    const std::array<double, kNumJoints>& q_target, const RobotSpec& spec) {
  std::array<double, kNumJoints> out{};
  for (int i = 0; i < kNumJoints; ++i)
    out[i] = clamp(q_target[i], spec.joint_lower[i], spec.joint_upper[i]);
  return out;
}

}  // namespace spinequad
