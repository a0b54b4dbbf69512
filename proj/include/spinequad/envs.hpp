#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "spinequad/curriculum.hpp"
#include "spinequad/errors.hpp"
#include "spinequad/planar_sim.hpp"
#include "spinequad/policy.hpp"
#include "spinequad/reward.hpp"
#include "spinequad/robot.hpp"

// Training environments. Both expose the same duck-typed interface the
// trainer rolls out against:
//   int obs_dim() / act_dim()
//   Eigen::VectorXd reset(seed, curriculum)   — samples a fresh command
//   EnvStep step(action)
// Environments are value types; the trainer copies one prototype per worker.
namespace spinequad {

struct EnvStep {
  Eigen::VectorXd obs;
  double reward = 0.0;
  bool done = false;
  double lin_tracking = 0.0;  // velocity-tracking kernel values, for the
  double ang_tracking = 0.0;  // curriculum update
  RewardBreakdown breakdown;
};

// Double-integrator mass tracking ramped velocity commands: the smallest
// closed loop that exercises command sampling, ramping, the tracking kernel,
// and the curriculum. Action is a single normalized acceleration in [-1, 1].
class Toy1DEnv {
 public:
  struct Config {
    double dt = 0.05;          // s per step
    int episode_len = 100;     // steps (5 s)
    double accel_scale = 8.0;  // m/s^2 at |action| = 1
    double sigma_v = 0.25;     // tracking kernel width, m/s
  };

  Toy1DEnv() : Toy1DEnv(Config()) {}
  explicit Toy1DEnv(Config cfg) : cfg_(cfg) {
    if (!(cfg.dt > 0.0) || cfg.episode_len < 1 || !(cfg.accel_scale > 0.0) ||
        !(cfg.sigma_v > 0.0))
      throw ArgumentError("toy-1d env: bad config");
  }

  int obs_dim() const { return 3; }
  int act_dim() const { return 1; }

  Eigen::VectorXd reset(std::uint64_t seed, const CurriculumState& cur) {
    rng_.seed(seed);
    cmd_ = sample_command(cur, rng_, TaskKind::kLocomotion);
    velocity_ = 0.0;
    t_ = 0.0;
    steps_ = 0;
    return observe();
  }

  EnvStep step(const Eigen::VectorXd& action) {
    if (action.size() != 1) throw ArgumentError("toy-1d env: action size != 1");
    const double accel =
        std::clamp(action[0], -1.0, 1.0) * cfg_.accel_scale;
    velocity_ += accel * cfg_.dt;
    t_ += cfg_.dt;
    ++steps_;

    EnvStep out;
    // Judged against the command the policy acted on; the ramp advances
    // afterwards, for the next observation.
    const double err = velocity_ - cmd_.vx;
    const double kernel = std::exp(-(err * err) / (cfg_.sigma_v * cfg_.sigma_v));
    out.breakdown.lin_vel_tracking = kernel;
    out.breakdown.total = kernel;
    out.reward = kernel;
    out.lin_tracking = kernel;
    out.ang_tracking = 0.0;
    out.done = steps_ >= cfg_.episode_len;
    step_command(cmd_, t_, cfg_.dt);
    out.obs = observe();
    return out;
  }

  const Command& command() const { return cmd_; }
  double velocity() const { return velocity_; }

 private:
  Eigen::VectorXd observe() const {
    Eigen::VectorXd obs(3);
    // Velocities scaled toward [-2, 2] so the first tanh layer stays in its
    // linear-ish range across the full command curriculum.
    obs << 0.25 * velocity_, 0.25 * cmd_.vx, cmd_.vx - velocity_;
    return obs;
  }

  Config cfg_;
  Command cmd_;
  std::mt19937_64 rng_{0};
  double velocity_ = 0.0;
  double t_ = 0.0;
  int steps_ = 0;
};

// Sagittal-plane locomotion: the planar quadruped under PD control, full
// 57-dim observation and 15-dim action (left/right pairs act together, so
// lateral joints are pass-through). The gait-phase reward term needs
// distinguishable left/right feet and stays zero here; velocity tracking,
// spine undulation, and the regularizers are all live.
class PlanarEnv {
 public:
  struct Config {
    double episode_time = 4.0;  // s
    double min_height = 0.15;   // m, terminate below
    double max_tilt = 1.0;      // rad, terminate beyond
    double action_scale = 0.25;
    RewardConfig reward;
    PlanarSimConfig sim;
  };

  explicit PlanarEnv(const RobotSpec& spec) : PlanarEnv(spec, Config()) {}
  PlanarEnv(const RobotSpec& spec, Config cfg)
      : cfg_(cfg), sim_(spec, cfg.sim), spec_(spec) {
    validate_reward_config(cfg.reward);
    if (!(cfg.episode_time > 0.0))
      throw ArgumentError("planar env: episode_time must be > 0");
  }

  int obs_dim() const { return kObservationDim; }
  int act_dim() const { return kNumJoints; }

  Eigen::VectorXd reset(std::uint64_t seed, const CurriculumState& cur) {
    rng_.seed(seed);
    cmd_ = sample_command(cur, rng_, TaskKind::kLocomotion);
    state_ = sim_.make_rest_state();
    prev_action_.fill(0.0);
    air_time_ = {0.0, 0.0, 0.0, 0.0};
    steps_ = 0;
    return observe();
  }

  EnvStep step(const Eigen::VectorXd& action) {
    if (action.size() != kNumJoints)
      throw ArgumentError("planar env: action size != 15");
    const double control_dt = spec_.control_dt();

    JointVector raw;
    for (int i = 0; i < kNumJoints; ++i)
      raw[i] = spec_.default_pose[i] + cfg_.action_scale * action[i];
    const JointVector target15 = clamp_joint_targets(raw, spec_);
    const PlanarTargets targets = sim_.targets_from_joint_vector(target15);

    const auto tau5 = sim_.control_torques(state_, targets);
    const double physics_dt = spec_.physics_dt();
    for (int s = 0; s < spec_.sim_substeps; ++s)
      state_ = sim_.step(state_, targets, physics_dt);

    // Per-foot time since liftoff; planar front/rear stand in for both legs
    // of their girdle.
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const bool contact = state_.foot_contact[leg < 2 ? 0 : 1];
      air_time_[std::size_t(leg)] =
          contact ? 0.0 : air_time_[std::size_t(leg)] + control_dt;
    }

    // Rewards are judged against the command the policy acted on; the ramp
    // advances afterwards, for the next observation.
    const RobotState rs = sim_.to_robot_state(state_);
    JointVector torque15{};
    torque15[kSpinePitch] = tau5[0];
    torque15[kLFThigh] = torque15[kRFThigh] = 0.5 * tau5[1];
    torque15[kLFCalf] = torque15[kRFCalf] = 0.5 * tau5[2];
    torque15[kLHThigh] = torque15[kRHThigh] = 0.5 * tau5[3];
    torque15[kLHCalf] = torque15[kRHCalf] = 0.5 * tau5[4];
    JointVector action_delta{};
    for (int i = 0; i < kNumJoints; ++i)
      action_delta[i] = action[i] - prev_action_[i];

    constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
    EnvStep out;
    out.breakdown =
        evaluate_rewards(rs, cmd_, kNan, kNan, air_time_, cfg_.reward,
                         &torque15, &action_delta);
    out.reward = out.breakdown.total;
    out.lin_tracking = out.breakdown.lin_vel_tracking;
    out.ang_tracking = out.breakdown.ang_vel_tracking;

    for (int i = 0; i < kNumJoints; ++i) prev_action_[i] = action[i];
    ++steps_;
    const bool fell = rs.base_position.z() < cfg_.min_height ||
                      std::abs(state_.q[kPlanarTilt]) > cfg_.max_tilt;
    const bool timeout =
        steps_ >= int(std::lround(cfg_.episode_time / control_dt));
    out.done = fell || timeout;
    step_command(cmd_, state_.t, control_dt);
    out.obs = observe();
    return out;
  }

  const PlanarState& sim_state() const { return state_; }
  const PlanarSim& sim() const { return sim_; }
  const Command& command() const { return cmd_; }

 private:
  Eigen::VectorXd observe() const {
    return build_observation(sim_.to_robot_state(state_), cmd_, prev_action_,
                             spec_.default_pose);
  }

  Config cfg_;
  PlanarSim sim_;
  RobotSpec spec_;
  Command cmd_;
  std::mt19937_64 rng_{0};
  PlanarState state_;
  JointVector prev_action_{};
  std::array<double, 4> air_time_{};
  int steps_ = 0;
};

}  // namespace spinequad
