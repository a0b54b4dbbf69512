#pragma once

// Single-episode evaluation rollouts of the planar environment with
// per-control-step logging: trajectory rows for plotting, a contact timeline
// ready for gait analysis, and summary means for quick comparison.

#include <spinequad/csv.hpp>
#include <spinequad/envs.hpp>
#include <spinequad/gait.hpp>
#include <spinequad/policy.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace spinequad {

// Everything worth plotting about one control step. Velocities are in the
// body frame, matching the observation; commands are the ones the policy
// acted on (the ramp advances after the reward is scored).
struct RolloutStep {
  double t = 0.0;
  double x = 0.0;
  double z = 0.0;
  double pitch = 0.0;       // rad
  double vx = 0.0;          // m/s, body frame
  double vz = 0.0;
  double pitch_rate = 0.0;  // rad/s
  double vx_cmd = 0.0;
  double wz_cmd = 0.0;
  std::array<double, kNumJoints> q{};
  std::array<bool, kNumLegs> contact{};
  double reward = 0.0;
  RewardBreakdown breakdown;
};

struct RolloutResult {
  std::vector<RolloutStep> steps;
  ContactTimeline contacts;  // same control-rate sampling as `steps`
  double mean_reward = 0.0;
  double mean_lin_tracking = 0.0;
  double mean_ang_tracking = 0.0;
  bool fell = false;      // episode ended before the time limit
  double duration = 0.0;  // s
};

// Maps an observation to an action; lets the same rollout loop drive a
// trained policy, its noisy training-time behavior, or a do-nothing probe.
using ActionSource = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

inline ActionSource zero_actions(int act_dim) {
  return [act_dim](const Eigen::VectorXd&) {
    return Eigen::VectorXd(Eigen::VectorXd::Zero(act_dim));
  };
}

inline ActionSource policy_mean_actions(PolicyParams params) {
  validate_policy_params(params);
  return [params = std::move(params)](const Eigen::VectorXd& obs) {
    return policy_forward(obs, params).mean;
  };
}

inline ActionSource policy_sampled_actions(PolicyParams params,
                                           std::uint64_t seed) {
  validate_policy_params(params);
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [params = std::move(params), rng](const Eigen::VectorXd& obs) {
    return sample_action(policy_forward(obs, params), *rng);
  };
}

// Runs one episode and logs every control step. The env is constructed here
// so the fell/timeout distinction can be read off the step count.
inline RolloutResult run_planar_rollout(const RobotSpec& spec,
                                        const PlanarEnv::Config& env_cfg,
                                        const ActionSource& act,
                                        std::uint64_t seed,
                                        const CurriculumState& curriculum) {
  PlanarEnv env(spec, env_cfg);
  const double dt = spec.control_dt();
  const int max_steps =
      static_cast<int>(std::lround(env_cfg.episode_time / dt));

  RolloutResult out;
  out.contacts.dt = dt;
  out.steps.reserve(static_cast<std::size_t>(max_steps));

  Eigen::VectorXd obs = env.reset(seed, curriculum);
  for (int k = 0; k < max_steps; ++k) {
    const Command cmd = env.command();  // pre-ramp: what this step is judged on
    const EnvStep step = env.step(act(obs));
    obs = step.obs;

    const RobotState rs = env.sim().to_robot_state(env.sim_state());
    RolloutStep row;
    row.t = rs.t;
    row.x = rs.base_position.x();
    row.z = rs.base_position.z();
    row.pitch = rs.base_euler().pitch;
    row.vx = rs.base_linear_velocity.x();
    row.vz = rs.base_linear_velocity.z();
    row.pitch_rate = rs.base_angular_velocity.y();
    row.vx_cmd = cmd.vx;
    row.wz_cmd = cmd.wz;
    row.q = rs.q;
    row.contact = rs.foot_contact;
    row.reward = step.reward;
    row.breakdown = step.breakdown;
    out.steps.push_back(row);
    out.contacts.contacts.push_back(rs.foot_contact);

    out.mean_reward += step.reward;
    out.mean_lin_tracking += step.lin_tracking;
    out.mean_ang_tracking += step.ang_tracking;
    if (step.done) break;
  }

  const double n = static_cast<double>(out.steps.size());
  if (n > 0.0) {
    out.mean_reward /= n;
    out.mean_lin_tracking /= n;
    out.mean_ang_tracking /= n;
  }
  out.fell = static_cast<int>(out.steps.size()) < max_steps;
  out.duration = n * dt;
  return out;
}

inline void write_rollout_csv(const RolloutResult& r, const std::string& path) {
  auto out = csv::open_output(path);
  out << "t,x,z,pitch,vx,vz,pitch_rate,vx_cmd,wz_cmd";
  for (const auto& name : canonical_joint_names()) out << "," << name;
  out << ",LF,RF,LH,RH,reward";
  for (const auto& name : reward_term_names()) out << "," << name;
  out << "\n";
  for (const RolloutStep& s : r.steps) {
    out << csv::fmt(s.t) << "," << csv::fmt(s.x) << "," << csv::fmt(s.z) << ","
        << csv::fmt(s.pitch) << "," << csv::fmt(s.vx) << "," << csv::fmt(s.vz)
        << "," << csv::fmt(s.pitch_rate) << "," << csv::fmt(s.vx_cmd) << ","
        << csv::fmt(s.wz_cmd);
    for (double q : s.q) out << "," << csv::fmt(q);
    for (bool c : s.contact) out << "," << (c ? 1 : 0);
    out << "," << csv::fmt(s.reward);
    for (const auto& name : reward_term_names())
      out << "," << csv::fmt(reward_term_value(s.breakdown, name));
    out << "\n";
  }
  if (!out) throw FormatError("write failed: " + path);
}

inline nlohmann::json rollout_to_json(const RolloutResult& r) {
  nlohmann::json j;
  j["mean_reward"] = r.mean_reward;
  j["mean_lin_tracking"] = r.mean_lin_tracking;
  j["mean_ang_tracking"] = r.mean_ang_tracking;
  j["fell"] = r.fell;
  j["duration"] = r.duration;
  nlohmann::json rows = nlohmann::json::array();
  for (const RolloutStep& s : r.steps) {
    nlohmann::json row;
    row["t"] = s.t;
    row["x"] = s.x;
    row["z"] = s.z;
    row["pitch"] = s.pitch;
    row["vx"] = s.vx;
    row["vz"] = s.vz;
    row["pitch_rate"] = s.pitch_rate;
    row["vx_cmd"] = s.vx_cmd;
    row["wz_cmd"] = s.wz_cmd;
    row["q"] = s.q;
    row["contact"] = s.contact;
    row["reward"] = s.reward;
    for (const auto& name : reward_term_names())
      row[name] = reward_term_value(s.breakdown, name);
    rows.push_back(std::move(row));
  }
  j["steps"] = std::move(rows);
  return j;
}

}  // namespace spinequad
