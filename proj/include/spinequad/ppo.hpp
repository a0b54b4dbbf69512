#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "spinequad/errors.hpp"
#include "spinequad/mlp.hpp"
#include "spinequad/policy.hpp"

// Clipped-surrogate policy optimization: generalized advantage estimation,
// the combined actor/critic/entropy loss with hand-derived gradients, and an
// Adam-driven minibatch update loop.
namespace spinequad {

// One flattened batch of experience. Rows are time steps (possibly
// concatenated across rollout workers; `dones` marks episode boundaries so
// the advantage recursion never leaks across them).
struct RolloutBatch {
  Eigen::MatrixXd observations;  // T x obs_dim
  Eigen::MatrixXd actions;       // T x act_dim
  Eigen::VectorXd log_probs;     // T, log pi_old(a|s)
  Eigen::VectorXd rewards;       // T
  Eigen::VectorXd values;        // T, V_old(s)
  std::vector<std::uint8_t> dones;
  Eigen::VectorXd advantages;  // filled by GAE
  Eigen::VectorXd returns;     // advantages + values
};

inline void validate_batch(const RolloutBatch& b) {
  const Eigen::Index t = b.observations.rows();
  if (t == 0) throw ValidationError("rollout batch: empty");
  if (b.actions.rows() != t || b.log_probs.size() != t ||
      b.rewards.size() != t || b.values.size() != t ||
      Eigen::Index(b.dones.size()) != t)
    throw ValidationError("rollout batch: field lengths disagree");
  if (b.advantages.size() != 0 &&
      (b.advantages.size() != t || b.returns.size() != t))
    throw ValidationError("rollout batch: advantage lengths disagree");
  if (!b.observations.allFinite() || !b.actions.allFinite() ||
      !b.log_probs.allFinite() || !b.rewards.allFinite() ||
      !b.values.allFinite())
    throw ValidationError("rollout batch: non-finite entries");
}

// Generalized advantage estimation over one trajectory segment.
// delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t
// A_t     = delta_t + gamma * lam * (1 - done_t) * A_{t+1}
// `bootstrap_value` stands in for V at the step after the segment end (used
// only when the last step is not terminal). Returns (advantages, returns)
// with returns = advantages + values.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> gae_advantages(
    const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
    const std::vector<std::uint8_t>& dones, double gamma, double lam,
    double bootstrap_value = 0.0) {
  const Eigen::Index t = rewards.size();
  if (values.size() != t || Eigen::Index(dones.size()) != t)
    throw ArgumentError("gae_advantages: sequence lengths disagree");
  if (!(gamma >= 0.0 && gamma <= 1.0) || !(lam >= 0.0 && lam <= 1.0))
    throw ArgumentError("gae_advantages: gamma and lam must be in [0, 1]");
  Eigen::VectorXd adv(t), ret(t);
  double running = 0.0;
  for (Eigen::Index i = t - 1; i >= 0; --i) {
    const double not_done = dones[std::size_t(i)] ? 0.0 : 1.0;
    const double next_value = (i + 1 < t) ? values[i + 1] : bootstrap_value;
    const double delta =
        rewards[i] + gamma * next_value * not_done - values[i];
    running = delta + gamma * lam * not_done * running;
    adv[i] = running;
    ret[i] = adv[i] + values[i];
  }
  return {adv, ret};
}

// In-place zero-mean unit-variance normalization (no-op on length-1 or
// constant inputs, which have no spread to normalize).
inline void normalize_advantages(Eigen::VectorXd& adv) {
  if (adv.size() < 2) return;
  const double mean = adv.mean();
  const double var = (adv.array() - mean).square().sum() / double(adv.size());
  const double stddev = std::sqrt(var);
  if (stddev < 1e-12) return;
  adv = ((adv.array() - mean) / stddev).matrix();
}

struct PpoConfig {
  double gamma = 0.99;
  double lam = 0.95;
  double clip_eps = 0.2;
  double lr = 3e-4;
  int epochs = 4;
  int minibatches = 4;
  double entropy_coeff = 0.005;
  double value_coeff = 0.5;
  bool normalize_advantages = true;
};

inline void validate_ppo_config(const PpoConfig& c) {
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0))
    throw ValidationError("ppo: gamma must be in [0, 1]");
  if (!(c.lam >= 0.0 && c.lam <= 1.0))
    throw ValidationError("ppo: lam must be in [0, 1]");
  if (!(c.clip_eps > 0.0)) throw ValidationError("ppo: clip_eps must be > 0");
  if (!(c.lr > 0.0)) throw ValidationError("ppo: lr must be > 0");
  if (c.epochs < 1) throw ValidationError("ppo: epochs must be >= 1");
  if (c.minibatches < 1)
    throw ValidationError("ppo: minibatches must be >= 1");
  if (c.entropy_coeff < 0.0 || c.value_coeff < 0.0)
    throw ValidationError("ppo: loss coefficients must be >= 0");
}

// Gradient accumulator shaped like the policy parameters.
struct PolicyGrad {
  Mlp actor;
  Mlp critic;
  Eigen::VectorXd log_std;

  static PolicyGrad zeros_like(const PolicyParams& p) {
    PolicyGrad g;
    g.actor = Mlp::zeros_like(p.actor);
    g.critic = Mlp::zeros_like(p.critic);
    g.log_std = Eigen::VectorXd::Zero(p.log_std.size());
    return g;
  }
};

// Combined minimized loss over the given sample rows:
//   L = -mean(min(rho*A, clip(rho, 1-eps, 1+eps)*A))
//       + value_coeff * 0.5 * mean((V - return)^2)
//       - entropy_coeff * H(log_std)
// where rho = pi(a|s) / pi_old(a|s). If `grad` is non-null the analytic
// gradient is accumulated into it (callers pass a zeroed accumulator).
inline double ppo_loss(const PolicyParams& p, const RolloutBatch& batch,
                       const std::vector<int>& rows, const PpoConfig& cfg,
                       PolicyGrad* grad) {
  if (rows.empty()) throw ArgumentError("ppo_loss: empty sample set");
  const double inv_n = 1.0 / double(rows.size());
  double surrogate = 0.0;
  double value_loss = 0.0;
  for (int r : rows) {
    if (r < 0 || r >= batch.observations.rows())
      throw ArgumentError("ppo_loss: sample row out of range");
    const Eigen::VectorXd obs = batch.observations.row(r).transpose();
    const Eigen::VectorXd act = batch.actions.row(r).transpose();

    Mlp::Cache actor_cache, critic_cache;
    const Eigen::VectorXd mean = p.actor.forward(obs, &actor_cache);
    const double value = p.critic.forward(obs, &critic_cache)[0];

    const double logp = gaussian_log_prob(act, mean, p.log_std);
    const double ratio = std::exp(logp - batch.log_probs[r]);
    const double adv = batch.advantages[r];
    const double clipped =
        std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
    surrogate += std::min(ratio * adv, clipped * adv);

    const double verr = value - batch.returns[r];
    value_loss += 0.5 * verr * verr;

    if (grad) {
      // Surrogate gradient: active only when the unclipped branch attains
      // the min (otherwise the per-sample objective is flat in the params).
      if (ratio * adv <= clipped * adv) {
        const double dsurr = -inv_n * adv * ratio;  // dL/dlogp
        Eigen::VectorXd dmean(mean.size());
        for (Eigen::Index i = 0; i < mean.size(); ++i) {
          const double inv_var = std::exp(-2.0 * p.log_std[i]);
          const double diff = act[i] - mean[i];
          dmean[i] = dsurr * diff * inv_var;  // dlogp/dmean = (a-mu)/sigma^2
          grad->log_std[i] += dsurr * (diff * diff * inv_var - 1.0);
        }
        p.actor.backward(actor_cache, dmean, grad->actor);
      }
      const double dvalue = cfg.value_coeff * inv_n * verr;
      p.critic.backward(critic_cache, Eigen::VectorXd::Constant(1, dvalue),
                        grad->critic);
    }
  }
  const double entropy = gaussian_entropy(p.log_std);
  if (grad)
    grad->log_std.array() -= cfg.entropy_coeff;  // d(-c*H)/dlog_std = -c
  return -surrogate * inv_n + cfg.value_coeff * value_loss * inv_n -
         cfg.entropy_coeff * entropy;
}

// --- Adam ------------------------------------------------------------------

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One Adam step: updates moments and returns the parameter decrement to
// subtract (already scaled by lr and bias-corrected).
inline Eigen::VectorXd adam_step(AdamState& s, const Eigen::VectorXd& grad,
                                 double lr) {
  if (s.m.size() == 0) {
    s.m = Eigen::VectorXd::Zero(grad.size());
    s.v = Eigen::VectorXd::Zero(grad.size());
  }
  if (s.m.size() != grad.size())
    throw ArgumentError("adam_step: gradient size changed");
  ++s.step;
  s.m = s.beta1 * s.m + (1.0 - s.beta1) * grad;
  s.v = s.beta2 * s.v + (1.0 - s.beta2) * grad.array().square().matrix();
  const double bc1 = 1.0 - std::pow(s.beta1, double(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, double(s.step));
  return (lr / bc1) *
         (s.m.array() / ((s.v.array() / bc2).sqrt() + s.eps)).matrix();
}

// --- update loop -------------------------------------------------------------

// Runs epochs x minibatches of Adam steps over a shuffled batch. Owns the
// optimizer moments so repeated calls (one per training iteration) keep Adam
// state warm. Throws TrainingDivergedError on non-finite loss or params.
class PpoOptimizer {
 public:
  explicit PpoOptimizer(PpoConfig cfg) : cfg_(cfg) { validate_ppo_config(cfg); }

  const PpoConfig& config() const { return cfg_; }

  // Updates `params` in place; returns the mean minimized loss across all
  // minibatch steps. `iteration` only labels divergence diagnostics.
  double update(PolicyParams& params, RolloutBatch& batch,
                std::mt19937_64& rng, int iteration = 0) {
    validate_batch(batch);
    if (batch.advantages.size() != batch.rewards.size())
      throw ArgumentError("ppo update: batch is missing advantages");
    if (cfg_.normalize_advantages) normalize_advantages(batch.advantages);

    const int n = int(batch.observations.rows());
    std::vector<int> order(static_cast<std::size_t>(n), 0);
    std::iota(order.begin(), order.end(), 0);

    double loss_sum = 0.0;
    int loss_count = 0;
    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (int mb = 0; mb < cfg_.minibatches; ++mb) {
        const int lo = n * mb / cfg_.minibatches;
        const int hi = n * (mb + 1) / cfg_.minibatches;
        if (lo == hi) continue;
        const std::vector<int> rows(order.begin() + lo, order.begin() + hi);

        PolicyGrad grad = PolicyGrad::zeros_like(params);
        const double loss = ppo_loss(params, batch, rows, cfg_, &grad);
        if (!std::isfinite(loss))
          throw TrainingDivergedError("ppo update: non-finite loss",
                                      iteration);
        loss_sum += loss;
        ++loss_count;

        Eigen::VectorXd actor_theta = params.actor.flatten();
        actor_theta -= adam_step(actor_adam_, grad.actor.flatten(), cfg_.lr);
        params.actor.unflatten(actor_theta);

        Eigen::VectorXd critic_theta = params.critic.flatten();
        critic_theta -= adam_step(critic_adam_, grad.critic.flatten(), cfg_.lr);
        params.critic.unflatten(critic_theta);

        params.log_std -= adam_step(logstd_adam_, grad.log_std, cfg_.lr);
        clamp_log_std(params);

        if (!params.actor.finite() || !params.critic.finite())
          throw TrainingDivergedError("ppo update: non-finite weights",
                                      iteration);
      }
    }
    return loss_count > 0 ? loss_sum / double(loss_count) : 0.0;
  }

 private:
  PpoConfig cfg_;
  AdamState actor_adam_, critic_adam_, logstd_adam_;
};

// Single-shot update with fresh optimizer state; convenience for tests and
// one-off calls.
inline PolicyParams ppo_update(const RolloutBatch& batch, PolicyParams params,
                               const PpoConfig& cfg,
                               std::uint64_t shuffle_seed = 0) {
  RolloutBatch copy = batch;
  PpoOptimizer opt(cfg);
  std::mt19937_64 rng(shuffle_seed);
  opt.update(params, copy, rng);
  return params;
}

}  // namespace spinequad
