#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <string>
#include <vector>

#include "spinequad/csv.hpp"
#include "spinequad/curriculum.hpp"
#include "spinequad/errors.hpp"
#include "spinequad/policy.hpp"
#include "spinequad/ppo.hpp"
#include "spinequad/reward.hpp"

// The training loop: parallel rollout workers over independent env copies,
// generalized advantage estimation per worker segment, minibatched clipped-
// surrogate updates, and a curriculum bump per iteration from the mean
// tracking kernels. Deterministic for a fixed seed: each worker owns its RNG
// and writes to a preallocated slice, so thread scheduling cannot reorder
// anything.
namespace spinequad {

struct TrainerConfig {
  int iterations = 300;
  int num_envs = 8;
  int horizon = 128;  // steps per env per iteration
  std::uint64_t seed = 0;
  PolicyConfig policy;
  PpoConfig ppo;
  CurriculumState curriculum;  // initial state (fractions start at 0.1)

  // Optional file outputs; empty out_dir disables both.
  std::string out_dir;
  int checkpoint_every = 50;
};

inline void validate_trainer_config(const TrainerConfig& c) {
  if (c.iterations < 1) throw ValidationError("trainer: iterations must be >= 1");
  if (c.num_envs < 1) throw ValidationError("trainer: num_envs must be >= 1");
  if (c.horizon < 1) throw ValidationError("trainer: horizon must be >= 1");
  validate_ppo_config(c.ppo);
}

struct IterationStats {
  int iteration = 0;
  double mean_reward = 0.0;
  double mean_lin_tracking = 0.0;
  double mean_ang_tracking = 0.0;
  double loss = 0.0;
  double linear_fraction = 0.0;
  double angular_fraction = 0.0;
  RewardBreakdown mean_breakdown;  // per-step means, unweighted terms
};

struct TrainResult {
  PolicyParams params;
  CurriculumState curriculum;
  std::vector<IterationStats> log;
};

inline void write_training_log(const std::vector<IterationStats>& log,
                               const std::string& path) {
  auto out = csv::open_output(path);
  out << "iteration,mean_reward,mean_lin_tracking,mean_ang_tracking,loss,"
         "linear_fraction,angular_fraction";
  for (const auto& name : reward_term_names()) out << "," << name;
  out << "\n";
  for (const auto& s : log) {
    out << s.iteration << "," << csv::fmt(s.mean_reward) << ","
        << csv::fmt(s.mean_lin_tracking) << "," << csv::fmt(s.mean_ang_tracking)
        << "," << csv::fmt(s.loss) << "," << csv::fmt(s.linear_fraction) << ","
        << csv::fmt(s.angular_fraction);
    for (const auto& name : reward_term_names())
      out << "," << csv::fmt(reward_term_value(s.mean_breakdown, name));
    out << "\n";
  }
  if (!out) throw FormatError("write failed: " + path);
}

namespace trainer_detail {

// Everything one worker produces for its slice of the batch.
struct WorkerSlice {
  Eigen::MatrixXd observations;
  Eigen::MatrixXd actions;
  Eigen::VectorXd log_probs;
  Eigen::VectorXd rewards;
  Eigen::VectorXd values;
  std::vector<std::uint8_t> dones;
  double bootstrap_value = 0.0;
  double lin_tracking_sum = 0.0;
  double ang_tracking_sum = 0.0;
  RewardBreakdown breakdown_sum;
};

inline void accumulate(RewardBreakdown& into, const RewardBreakdown& from) {
  for (const auto& name : reward_term_names()) {
    // Term-wise sum; totals sum as well.
    const double v = reward_term_value(from, name);
    if (name == "gait") into.gait += v;
    else if (name == "spine_undulation") into.spine_undulation += v;
    else if (name == "spine_steering") into.spine_steering += v;
    else if (name == "lin_vel_tracking") into.lin_vel_tracking += v;
    else if (name == "ang_vel_tracking") into.ang_vel_tracking += v;
    else if (name == "air_time") into.air_time += v;
    else if (name == "torque") into.torque += v;
    else if (name == "action_rate") into.action_rate += v;
    else if (name == "orientation") into.orientation += v;
  }
  into.total += from.total;
}

inline void scale(RewardBreakdown& b, double k) {
  b.gait *= k;
  b.spine_undulation *= k;
  b.spine_steering *= k;
  b.lin_vel_tracking *= k;
  b.ang_vel_tracking *= k;
  b.air_time *= k;
  b.torque *= k;
  b.action_rate *= k;
  b.orientation *= k;
  b.total *= k;
}

}  // namespace trainer_detail

// Persistent per-worker rollout state so episodes straddle iterations.
template <class Env>
struct RolloutWorker {
  Env env;
  std::mt19937_64 rng;
  Eigen::VectorXd obs;
  std::uint64_t reset_counter = 0;
  std::uint64_t seed_base = 0;

  RolloutWorker(Env e, std::uint64_t seed)
      : env(std::move(e)), rng(seed), seed_base(seed) {}

  void reset_env(const CurriculumState& cur) {
    // Distinct, reproducible seed per episode.
    obs = env.reset(seed_base + 1000003 * (++reset_counter), cur);
  }

  trainer_detail::WorkerSlice collect(const PolicyParams& params, int horizon,
                                      const CurriculumState& cur) {
    trainer_detail::WorkerSlice s;
    const int obs_dim = env.obs_dim();
    const int act_dim = env.act_dim();
    s.observations.resize(horizon, obs_dim);
    s.actions.resize(horizon, act_dim);
    s.log_probs.resize(horizon);
    s.rewards.resize(horizon);
    s.values.resize(horizon);
    s.dones.assign(std::size_t(horizon), 0);
    for (int t = 0; t < horizon; ++t) {
      const PolicyEval eval = policy_forward(obs, params);
      const Eigen::VectorXd action = sample_action(eval, rng);
      s.observations.row(t) = obs.transpose();
      s.actions.row(t) = action.transpose();
      s.log_probs[t] = gaussian_log_prob(action, eval.mean, params.log_std);
      s.values[t] = eval.value;
      EnvStep step = env.step(action);
      s.rewards[t] = step.reward;
      s.dones[std::size_t(t)] = step.done ? 1 : 0;
      s.lin_tracking_sum += step.lin_tracking;
      s.ang_tracking_sum += step.ang_tracking;
      trainer_detail::accumulate(s.breakdown_sum, step.breakdown);
      if (step.done)
        reset_env(cur);
      else
        obs = step.obs;
    }
    s.bootstrap_value = policy_forward(obs, params).value;
    return s;
  }
};

// Reference recipe for the 1-D toy env: a small network and a faster, less
// noisy schedule suited to the single-dof problem. With seed 0 this reaches
// mean tracking > 0.9 and a full command range well inside the 300-iteration
// budget; the regression suite pins exactly this configuration.
inline TrainerConfig toy1d_reference_config() {
  TrainerConfig cfg;
  cfg.iterations = 300;
  cfg.num_envs = 8;
  cfg.horizon = 128;
  cfg.seed = 0;
  cfg.policy.hidden = {32, 32};
  cfg.policy.init_log_std = -1.5;
  cfg.ppo.lr = 1e-3;
  cfg.ppo.entropy_coeff = 5e-4;
  return cfg;
}

template <class Env>
TrainResult train(const Env& prototype, const TrainerConfig& cfg) {
  validate_trainer_config(cfg);
  Env probe = prototype;

  PolicyParams params =
      make_policy(probe.obs_dim(), probe.act_dim(), cfg.policy, cfg.seed);
  PpoOptimizer optimizer(cfg.ppo);
  std::mt19937_64 update_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);

  CurriculumState curriculum = cfg.curriculum;
  std::vector<RolloutWorker<Env>> workers;
  workers.reserve(std::size_t(cfg.num_envs));
  for (int w = 0; w < cfg.num_envs; ++w) {
    workers.emplace_back(prototype, cfg.seed * 7919 + std::uint64_t(w) + 1);
    workers.back().reset_env(curriculum);
  }

  const bool writing = !cfg.out_dir.empty();
  if (writing) std::filesystem::create_directories(cfg.out_dir);

  TrainResult result;
  result.log.reserve(std::size_t(cfg.iterations));
  const int total_steps = cfg.num_envs * cfg.horizon;

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    // Rollouts: one async job per worker, each over its own env and RNG.
    std::vector<std::future<trainer_detail::WorkerSlice>> jobs;
    jobs.reserve(workers.size());
    for (auto& w : workers)
      jobs.push_back(std::async(std::launch::async, [&w, &params, &cfg,
                                                     &curriculum] {
        return w.collect(params, cfg.horizon, curriculum);
      }));

    RolloutBatch batch;
    batch.observations.resize(total_steps, probe.obs_dim());
    batch.actions.resize(total_steps, probe.act_dim());
    batch.log_probs.resize(total_steps);
    batch.rewards.resize(total_steps);
    batch.values.resize(total_steps);
    batch.dones.assign(std::size_t(total_steps), 0);
    batch.advantages.resize(total_steps);
    batch.returns.resize(total_steps);

    IterationStats stats;
    stats.iteration = iter;
    for (std::size_t w = 0; w < workers.size(); ++w) {
      trainer_detail::WorkerSlice s = jobs[w].get();
      const int at = int(w) * cfg.horizon;
      batch.observations.middleRows(at, cfg.horizon) = s.observations;
      batch.actions.middleRows(at, cfg.horizon) = s.actions;
      batch.log_probs.segment(at, cfg.horizon) = s.log_probs;
      batch.rewards.segment(at, cfg.horizon) = s.rewards;
      batch.values.segment(at, cfg.horizon) = s.values;
      std::copy(s.dones.begin(), s.dones.end(),
                batch.dones.begin() + at);
      auto [adv, ret] = gae_advantages(s.rewards, s.values, s.dones,
                                       cfg.ppo.gamma, cfg.ppo.lam,
                                       s.bootstrap_value);
      batch.advantages.segment(at, cfg.horizon) = adv;
      batch.returns.segment(at, cfg.horizon) = ret;
      stats.mean_lin_tracking += s.lin_tracking_sum;
      stats.mean_ang_tracking += s.ang_tracking_sum;
      trainer_detail::accumulate(stats.mean_breakdown, s.breakdown_sum);
    }
    const double inv_steps = 1.0 / double(total_steps);
    stats.mean_reward = batch.rewards.mean();
    stats.mean_lin_tracking *= inv_steps;
    stats.mean_ang_tracking *= inv_steps;
    trainer_detail::scale(stats.mean_breakdown, inv_steps);

    stats.loss = optimizer.update(params, batch, update_rng, iter);

    curriculum = update_curriculum(curriculum, stats.mean_lin_tracking,
                                   stats.mean_ang_tracking);
    stats.linear_fraction = curriculum.linear_fraction;
    stats.angular_fraction = curriculum.angular_fraction;
    result.log.push_back(stats);

    if (writing && cfg.checkpoint_every > 0 &&
        ((iter + 1) % cfg.checkpoint_every == 0 || iter + 1 == cfg.iterations))
      save_policy(params,
                  (std::filesystem::path(cfg.out_dir) / "checkpoint.json")
                      .string());
  }

  if (writing)
    write_training_log(result.log,
                       (std::filesystem::path(cfg.out_dir) / "train_log.csv")
                           .string());

  result.params = std::move(params);
  result.curriculum = curriculum;
  return result;
}

}  // namespace spinequad
