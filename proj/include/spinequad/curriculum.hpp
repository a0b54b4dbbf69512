#pragma once

#include <random>
#include <string>

#include "spinequad/errors.hpp"
#include "spinequad/geometry.hpp"
#include "spinequad/robot.hpp"

namespace spinequad {

enum class TaskKind { kLocomotion, kTurning };

// Adaptive velocity-range curriculum: the commanded linear and angular ranges
// start at 10% of the full target ranges and each is widened by `delta` once
// its mean episodic tracking metric clears its threshold (0.8 linear,
// 0.6 angular). The two channels progress independently.
struct CurriculumState {
  double linear_fraction = 0.1;
  double angular_fraction = 0.1;

  double full_linear_min = 0.0;   // m/s
  double full_linear_max = 7.0;   // m/s
  double full_angular_min = -8.0;  // rad/s
  double full_angular_max = 8.0;   // rad/s

  double linear_threshold = 0.8;
  double angular_threshold = 0.6;
  double delta = 0.1;

  // The ramp-rate limit a_max is resampled per command from these ranges.
  double a_max_linear_min = 1.0;   // m/s^2
  double a_max_linear_max = 6.0;   // m/s^2
  double a_max_angular_min = 2.0;  // rad/s^2
  double a_max_angular_max = 10.0;  // rad/s^2

  // Turning task: wz ramp starts a random delay after episode start.
  double turn_delay_min = 0.5;  // s
  double turn_delay_max = 2.0;  // s

  double linear_min() const { return linear_fraction * full_linear_min; }
  double linear_max() const { return linear_fraction * full_linear_max; }
  double angular_min() const { return angular_fraction * full_angular_min; }
  double angular_max() const { return angular_fraction * full_angular_max; }
};

// One step of the acceleration-constrained ramp:
//   next = current + clamp(target - current, -a_max*dt, +a_max*dt).
// Returns the target exactly once the remaining error fits in one step, so
// the ramp never overshoots.
inline double ramp_command(double current, double target, double a_max,
                           double dt) {
  if (!(a_max > 0.0)) throw ArgumentError("ramp_command: a_max must be > 0");
  if (!(dt > 0.0)) throw ArgumentError("ramp_command: dt must be > 0");
  const double max_delta = a_max * dt;
  const double err = target - current;
  if (std::abs(err) <= max_delta) return target;
  double next = current + (err > 0.0 ? max_delta : -max_delta);
  // The final addition rounds, so the realized step can land half an ulp
  // past the bound. Nudge back inside: callers rely on |Δ| ≤ a_max·dt as a
  // floating-point inequality, not just a real-arithmetic one.
  while (std::abs(next - current) > max_delta)
    next = std::nextafter(next, current);
  return next;
}

// Advances all ramped channels of a command by one control step at time t.
// The angular channel holds at zero until its activation time.
inline void step_command(Command& cmd, double t, double dt) {
  cmd.vx = ramp_command(cmd.vx, cmd.vx_target, cmd.a_max_linear, dt);
  cmd.vy = ramp_command(cmd.vy, cmd.vy_target, cmd.a_max_linear, dt);
  if (t >= cmd.wz_activation_time) {
    cmd.wz = ramp_command(cmd.wz, cmd.wz_target, cmd.a_max_angular, dt);
  } else {
    cmd.wz = 0.0;
  }
}

// Samples a fresh command from the fraction-scaled ranges. For the turning
// task the angular target only starts ramping after a random delay past
// `episode_start`, letting the robot settle into forward motion first.
inline Command sample_command(const CurriculumState& curr, std::mt19937_64& rng,
                              TaskKind task, double episode_start = 0.0) {
  std::uniform_real_distribution<double> lin(curr.linear_min(),
                                             curr.linear_max());
  std::uniform_real_distribution<double> ang(curr.angular_min(),
                                             curr.angular_max());
  std::uniform_real_distribution<double> a_lin(curr.a_max_linear_min,
                                               curr.a_max_linear_max);
  std::uniform_real_distribution<double> a_ang(curr.a_max_angular_min,
                                               curr.a_max_angular_max);

  Command cmd;
  cmd.vx_target = lin(rng);
  cmd.vy_target = 0.0;
  cmd.wz_target = ang(rng);
  cmd.a_max_linear = a_lin(rng);
  cmd.a_max_angular = a_ang(rng);
  if (task == TaskKind::kTurning) {
    std::uniform_real_distribution<double> delay(curr.turn_delay_min,
                                                 curr.turn_delay_max);
    cmd.wz_activation_time = episode_start + delay(rng);
  } else {
    cmd.wz_activation_time = episode_start;
  }
  return cmd;
}

// Curriculum progression rule. Metrics are mean episodic tracking rewards
// normalized by their maximum attainable value, in [0,1]. Each fraction grows
// by delta when its metric clears its threshold, capped at 1.0; fractions
// never decrease.
inline CurriculumState update_curriculum(CurriculumState curr,
                                         double mean_linear_tracking,
                                         double mean_angular_tracking) {
  auto check = [](double m, const char* name) {
    if (!(m >= 0.0 && m <= 1.0))
      throw ArgumentError(std::string("update_curriculum: ") + name +
                          " must be in [0,1]");
  };
  check(mean_linear_tracking, "mean_linear_tracking");
  check(mean_angular_tracking, "mean_angular_tracking");

  auto bump = [&](double fraction) {
    fraction = std::min(1.0, fraction + curr.delta);
    if (1.0 - fraction < 1e-12) fraction = 1.0;  // absorb fp residue
    return fraction;
  };
  if (mean_linear_tracking > curr.linear_threshold)
    curr.linear_fraction = bump(curr.linear_fraction);
  if (mean_angular_tracking > curr.angular_threshold)
    curr.angular_fraction = bump(curr.angular_fraction);
  return curr;
}

// Trainers with parallel workers merge per-worker curricula by element-wise
// max fraction.
inline CurriculumState merge_curricula(const CurriculumState& a,
                                       const CurriculumState& b) {
  CurriculumState out = a;
  out.linear_fraction = std::max(a.linear_fraction, b.linear_fraction);
  out.angular_fraction = std::max(a.angular_fraction, b.angular_fraction);
  return out;
}

}  // namespace spinequad
