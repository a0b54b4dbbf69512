#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinequad/errors.hpp"
#include "spinequad/mlp.hpp"
#include "spinequad/robot.hpp"

// Gaussian actor-critic policy: an actor MLP maps observations to joint-target
// means (applied as default pose + action_scale * action), a critic MLP maps
// observations to a scalar value, and a state-independent log-std vector sets
// exploration noise.
namespace spinequad {

inline constexpr int kObservationDim = 57;
inline constexpr double kLogStdMin = -4.0;
inline constexpr double kLogStdMax = 1.0;

struct PolicyConfig {
  std::vector<int> hidden = {128, 64};
  double action_scale = 0.25;  // rad of joint-target swing per unit action
  double init_log_std = -0.5;
  // Small last-layer init keeps a fresh policy's targets near the default
  // pose and its values near zero.
  double output_init_scale = 0.01;
};

struct PolicyParams {
  Mlp actor;   // obs -> action mean
  Mlp critic;  // obs -> value (1)
  Eigen::VectorXd log_std;
  double action_scale = 0.25;

  int obs_dim() const { return actor.input_size(); }
  int act_dim() const { return actor.output_size(); }
};

inline void validate_policy_params(const PolicyParams& p) {
  if (p.actor.layer_count() == 0 || p.critic.layer_count() == 0)
    throw ValidationError("policy: empty network");
  if (p.critic.input_size() != p.actor.input_size())
    throw ValidationError("policy: actor/critic observation sizes differ");
  if (p.critic.output_size() != 1)
    throw ValidationError("policy: critic must output a single value");
  if (p.log_std.size() != p.actor.output_size())
    throw ValidationError("policy: log_std length must match action size");
  if (!p.actor.finite() || !p.critic.finite() || !p.log_std.allFinite())
    throw ValidationError("policy: non-finite weights");
  for (Eigen::Index i = 0; i < p.log_std.size(); ++i)
    if (p.log_std[i] < kLogStdMin - 1e-12 || p.log_std[i] > kLogStdMax + 1e-12)
      throw ValidationError("policy: log_std out of bounds");
  if (!(p.action_scale > 0.0))
    throw ValidationError("policy: action_scale must be > 0");
}

inline void clamp_log_std(PolicyParams& p) {
  for (Eigen::Index i = 0; i < p.log_std.size(); ++i)
    p.log_std[i] = std::clamp(p.log_std[i], kLogStdMin, kLogStdMax);
}

inline PolicyParams make_policy(int obs_dim, int act_dim,
                                const PolicyConfig& cfg, std::uint64_t seed) {
  PolicyParams p;
  p.actor = Mlp(obs_dim, cfg.hidden, act_dim);
  p.critic = Mlp(obs_dim, cfg.hidden, 1);
  p.actor.init_random(seed, cfg.output_init_scale);
  p.critic.init_random(seed + 1, cfg.output_init_scale);
  p.log_std = Eigen::VectorXd::Constant(
      act_dim, std::clamp(cfg.init_log_std, kLogStdMin, kLogStdMax));
  p.action_scale = cfg.action_scale;
  validate_policy_params(p);
  return p;
}

// Observation layout (length 57):
//   [0..2]   base linear velocity, body frame
//   [3..5]   base angular velocity, body frame
//   [6..8]   gravity direction expressed in the body frame
//   [9..11]  current (ramped) command: vx, vy, wz
//   [12..26] joint positions minus the default pose
//   [27..41] joint velocities
//   [42..56] previous action
inline Eigen::VectorXd build_observation(const RobotState& state,
                                         const Command& cmd,
                                         const JointVector& prev_action,
                                         const JointVector& default_pose) {
  Eigen::VectorXd obs(kObservationDim);
  obs.segment<3>(0) = state.base_linear_velocity;
  obs.segment<3>(3) = state.base_angular_velocity;
  obs.segment<3>(6) =
      state.base_orientation.conjugate() * Vec3(0.0, 0.0, -1.0);
  obs[9] = cmd.vx;
  obs[10] = cmd.vy;
  obs[11] = cmd.wz;
  for (int i = 0; i < kNumJoints; ++i) {
    obs[12 + i] = state.q[i] - default_pose[i];
    obs[27 + i] = state.qd[i];
    obs[42 + i] = prev_action[i];
  }
  if (!obs.allFinite())
    throw ArgumentError("build_observation: non-finite input");
  return obs;
}

struct PolicyEval {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
  double value = 0.0;
};

inline PolicyEval policy_forward(const Eigen::VectorXd& obs,
                                 const PolicyParams& p) {
  PolicyEval out;
  out.mean = p.actor.forward(obs);
  out.std = p.log_std.array().exp().matrix();
  out.value = p.critic.forward(obs)[0];
  return out;
}

inline Eigen::VectorXd sample_action(const PolicyEval& eval,
                                     std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd a(eval.mean.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    a[i] = eval.mean[i] + eval.std[i] * normal(rng);
  return a;
}

inline double gaussian_log_prob(const Eigen::VectorXd& action,
                                const Eigen::VectorXd& mean,
                                const Eigen::VectorXd& log_std) {
  if (action.size() != mean.size() || action.size() != log_std.size())
    throw ArgumentError("gaussian_log_prob: size mismatch");
  constexpr double kLogTwoPi = 1.8378770664093453;
  double lp = -0.5 * double(action.size()) * kLogTwoPi;
  for (Eigen::Index i = 0; i < action.size(); ++i) {
    const double z = (action[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -0.5 * z * z - log_std[i];
  }
  return lp;
}

// Differential entropy of the diagonal Gaussian; depends only on log_std.
inline double gaussian_entropy(const Eigen::VectorXd& log_std) {
  constexpr double kHalfLogTwoPiE = 1.4189385332046727;
  return log_std.sum() + double(log_std.size()) * kHalfLogTwoPiE;
}

// Target joint angles the robot is asked to hold for a policy action.
inline JointVector joint_targets_from_action(const RobotSpec& spec,
                                             const PolicyParams& p,
                                             const Eigen::VectorXd& action) {
  if (action.size() != kNumJoints)
    throw ArgumentError("joint_targets_from_action: expected 15 actions");
  JointVector raw;
  for (int i = 0; i < kNumJoints; ++i)
    raw[i] = spec.default_pose[i] + p.action_scale * action[i];
  return clamp_joint_targets(raw, spec);
}

// --- checkpoint I/O ------------------------------------------------------

inline nlohmann::json policy_to_json(const PolicyParams& p) {
  validate_policy_params(p);
  auto dump_mlp = [](const Mlp& net) {
    nlohmann::json j;
    j["sizes"] = net.sizes();
    const Eigen::VectorXd theta = net.flatten();
    j["weights"] = std::vector<double>(theta.data(), theta.data() + theta.size());
    return j;
  };
  nlohmann::json j;
  j["format"] = "spinequad-policy";
  j["version"] = 1;
  j["action_scale"] = p.action_scale;
  j["log_std"] = std::vector<double>(p.log_std.data(),
                                     p.log_std.data() + p.log_std.size());
  j["actor"] = dump_mlp(p.actor);
  j["critic"] = dump_mlp(p.critic);
  return j;
}

inline PolicyParams policy_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "spinequad-policy")
    throw FormatError("policy checkpoint: missing format tag");
  if (j.value("version", 0) != 1)
    throw FormatError("policy checkpoint: unsupported version");
  auto load_mlp = [](const nlohmann::json& nj) {
    const auto sizes = nj.at("sizes").get<std::vector<int>>();
    if (sizes.size() < 2)
      throw FormatError("policy checkpoint: network needs >= 2 layer sizes");
    std::vector<int> hidden(sizes.begin() + 1, sizes.end() - 1);
    Mlp net(sizes.front(), hidden, sizes.back());
    const auto w = nj.at("weights").get<std::vector<double>>();
    if (int(w.size()) != net.param_count())
      throw FormatError("policy checkpoint: weight count mismatch");
    net.unflatten(Eigen::Map<const Eigen::VectorXd>(w.data(), w.size()));
    return net;
  };
  PolicyParams p;
  p.actor = load_mlp(j.at("actor"));
  p.critic = load_mlp(j.at("critic"));
  const auto ls = j.at("log_std").get<std::vector<double>>();
  p.log_std = Eigen::Map<const Eigen::VectorXd>(ls.data(), Eigen::Index(ls.size()));
  p.action_scale = j.at("action_scale").get<double>();
  validate_policy_params(p);
  return p;
}

inline void save_policy(const PolicyParams& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open for writing: " + path);
  out << policy_to_json(p).dump(2) << "\n";
  if (!out) throw FormatError("write failed: " + path);
}

inline PolicyParams load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open for reading: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("policy checkpoint: ") + e.what());
  }
  try {
    return policy_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("policy checkpoint: ") + e.what());
  }
}

}  // namespace spinequad
