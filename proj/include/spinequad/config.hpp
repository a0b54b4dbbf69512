#pragma once

// Run-configuration file: one JSON document with a section per subsystem
// (trainer, curriculum, reward, env, figure8, drop). Files may contain //
// comments; unknown keys are rejected so typos fail loudly instead of
// silently keeping a default. Omitted keys keep their defaults, so a config
// only needs the fields it changes. The CLI's --seed / --out-dir flags
// override their file counterparts.

#include <spinequad/drop_test.hpp>
#include <spinequad/envs.hpp>
#include <spinequad/figure8.hpp>
#include <spinequad/trainer.hpp>

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <string>

namespace spinequad {

struct RunConfig {
  TrainerConfig trainer;  // policy, ppo, and initial curriculum live inside
  PlanarEnv::Config env;  // reward config lives inside
  double figure8_radius = 1.0;
  double figure8_straight_length = 4.0;
  Figure8RolloutConfig figure8;
  DropTestConfig drop;
  SelfRightingControllerConfig righting;
};

namespace config_detail {

inline void check_keys(const nlohmann::json& j,
                       std::initializer_list<const char*> allowed,
                       const std::string& context) {
  if (!j.is_object())
    throw FormatError("config: " + context + " must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) known = true;
    if (!known)
      throw FormatError("config: unknown key \"" + item.key() + "\" in " +
                        context);
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, const T& fallback,
         const std::string& context) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError("config: bad value for \"" + std::string(key) +
                      "\" in " + context);
  }
}

}  // namespace config_detail

inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json j;

  nlohmann::json trainer;
  trainer["iterations"] = cfg.trainer.iterations;
  trainer["num_envs"] = cfg.trainer.num_envs;
  trainer["horizon"] = cfg.trainer.horizon;
  trainer["seed"] = cfg.trainer.seed;
  trainer["checkpoint_every"] = cfg.trainer.checkpoint_every;
  trainer["policy"] = {{"hidden", cfg.trainer.policy.hidden},
                       {"action_scale", cfg.trainer.policy.action_scale},
                       {"init_log_std", cfg.trainer.policy.init_log_std},
                       {"output_init_scale", cfg.trainer.policy.output_init_scale}};
  trainer["ppo"] = {{"gamma", cfg.trainer.ppo.gamma},
                    {"lam", cfg.trainer.ppo.lam},
                    {"clip_eps", cfg.trainer.ppo.clip_eps},
                    {"lr", cfg.trainer.ppo.lr},
                    {"epochs", cfg.trainer.ppo.epochs},
                    {"minibatches", cfg.trainer.ppo.minibatches},
                    {"entropy_coeff", cfg.trainer.ppo.entropy_coeff},
                    {"value_coeff", cfg.trainer.ppo.value_coeff},
                    {"normalize_advantages", cfg.trainer.ppo.normalize_advantages}};
  j["trainer"] = std::move(trainer);

  const CurriculumState& cur = cfg.trainer.curriculum;
  j["curriculum"] = {{"linear_fraction", cur.linear_fraction},
                     {"angular_fraction", cur.angular_fraction},
                     {"full_linear_min", cur.full_linear_min},
                     {"full_linear_max", cur.full_linear_max},
                     {"full_angular_min", cur.full_angular_min},
                     {"full_angular_max", cur.full_angular_max},
                     {"linear_threshold", cur.linear_threshold},
                     {"angular_threshold", cur.angular_threshold},
                     {"delta", cur.delta},
                     {"a_max_linear_min", cur.a_max_linear_min},
                     {"a_max_linear_max", cur.a_max_linear_max},
                     {"a_max_angular_min", cur.a_max_angular_min},
                     {"a_max_angular_max", cur.a_max_angular_max},
                     {"turn_delay_min", cur.turn_delay_min},
                     {"turn_delay_max", cur.turn_delay_max}};

  const RewardConfig& rw = cfg.env.reward;
  nlohmann::json reward;
  reward["sigma"] = rw.sigma;
  reward["delta_front_target"] = rw.delta_front_target;
  reward["delta_rear_target"] = rw.delta_rear_target;
  reward["alpha"] = rw.alpha;
  reward["theta_flex"] = rw.theta_flex;
  reward["theta_ext"] = rw.theta_ext;
  reward["w_e"] = rw.w_e;
  reward["w_b"] = rw.w_b;
  reward["k"] = rw.k;
  reward["omega_th"] = rw.omega_th;
  reward["sigma_v"] = rw.sigma_v;
  reward["air_time_cap"] = rw.air_time_cap;
  reward["weights"] = {{"gait", rw.term_weights.gait},
                       {"spine_undulation", rw.term_weights.spine_undulation},
                       {"spine_steering", rw.term_weights.spine_steering},
                       {"lin_vel_tracking", rw.term_weights.lin_vel_tracking},
                       {"ang_vel_tracking", rw.term_weights.ang_vel_tracking},
                       {"air_time", rw.term_weights.air_time},
                       {"torque", rw.term_weights.torque},
                       {"action_rate", rw.term_weights.action_rate},
                       {"orientation", rw.term_weights.orientation}};
  j["reward"] = std::move(reward);

  j["env"] = {{"episode_time", cfg.env.episode_time},
              {"min_height", cfg.env.min_height},
              {"max_tilt", cfg.env.max_tilt},
              {"action_scale", cfg.env.action_scale}};

  j["figure8"] = {{"radius", cfg.figure8_radius},
                  {"straight_length", cfg.figure8_straight_length},
                  {"vx", cfg.figure8.vx},
                  {"dt", cfg.figure8.dt},
                  {"max_time", cfg.figure8.max_time},
                  {"start_offset", cfg.figure8.start_offset},
                  {"lookahead", cfg.figure8.controller.lookahead},
                  {"kp", cfg.figure8.controller.kp},
                  {"max_yaw_rate", cfg.figure8.controller.max_yaw_rate}};

  j["drop"] = {{"height", cfg.drop.height},
               {"roll_deg", cfg.drop.roll_deg},
               {"pitch_deg", cfg.drop.pitch_deg},
               {"trials", cfg.drop.trials},
               {"seed", cfg.drop.seed},
               {"dt", cfg.drop.dt},
               {"upright_tolerance_deg", cfg.drop.upright_tolerance_deg},
               {"orientation_jitter_deg", cfg.drop.orientation_jitter_deg},
               {"rate_jitter", cfg.drop.rate_jitter},
               {"max_fall_time", cfg.drop.max_fall_time},
               {"hold_band_deg", cfg.righting.hold_band_deg},
               {"cycle",
                {{"yaw_amp", cfg.righting.cycle.yaw_amp},
                 {"pitch_amp", cfg.righting.cycle.pitch_amp},
                 {"period", cfg.righting.cycle.period},
                 {"squareness", cfg.righting.cycle.squareness}}}};
  return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  using config_detail::check_keys;
  using config_detail::get_or;
  check_keys(j, {"trainer", "curriculum", "reward", "env", "figure8", "drop"},
             "top level");
  RunConfig cfg;

  if (j.contains("trainer")) {
    const auto& t = j.at("trainer");
    check_keys(t, {"iterations", "num_envs", "horizon", "seed",
                   "checkpoint_every", "policy", "ppo"},
               "trainer");
    cfg.trainer.iterations = get_or(t, "iterations", cfg.trainer.iterations, "trainer");
    cfg.trainer.num_envs = get_or(t, "num_envs", cfg.trainer.num_envs, "trainer");
    cfg.trainer.horizon = get_or(t, "horizon", cfg.trainer.horizon, "trainer");
    cfg.trainer.seed = get_or(t, "seed", cfg.trainer.seed, "trainer");
    cfg.trainer.checkpoint_every =
        get_or(t, "checkpoint_every", cfg.trainer.checkpoint_every, "trainer");
    if (t.contains("policy")) {
      const auto& p = t.at("policy");
      check_keys(p, {"hidden", "action_scale", "init_log_std", "output_init_scale"},
                 "trainer.policy");
      PolicyConfig& pc = cfg.trainer.policy;
      pc.hidden = get_or(p, "hidden", pc.hidden, "trainer.policy");
      pc.action_scale = get_or(p, "action_scale", pc.action_scale, "trainer.policy");
      pc.init_log_std = get_or(p, "init_log_std", pc.init_log_std, "trainer.policy");
      pc.output_init_scale =
          get_or(p, "output_init_scale", pc.output_init_scale, "trainer.policy");
    }
    if (t.contains("ppo")) {
      const auto& p = t.at("ppo");
      check_keys(p, {"gamma", "lam", "clip_eps", "lr", "epochs", "minibatches",
                     "entropy_coeff", "value_coeff", "normalize_advantages"},
                 "trainer.ppo");
      PpoConfig& pp = cfg.trainer.ppo;
      pp.gamma = get_or(p, "gamma", pp.gamma, "trainer.ppo");
      pp.lam = get_or(p, "lam", pp.lam, "trainer.ppo");
      pp.clip_eps = get_or(p, "clip_eps", pp.clip_eps, "trainer.ppo");
      pp.lr = get_or(p, "lr", pp.lr, "trainer.ppo");
      pp.epochs = get_or(p, "epochs", pp.epochs, "trainer.ppo");
      pp.minibatches = get_or(p, "minibatches", pp.minibatches, "trainer.ppo");
      pp.entropy_coeff = get_or(p, "entropy_coeff", pp.entropy_coeff, "trainer.ppo");
      pp.value_coeff = get_or(p, "value_coeff", pp.value_coeff, "trainer.ppo");
      pp.normalize_advantages =
          get_or(p, "normalize_advantages", pp.normalize_advantages, "trainer.ppo");
    }
  }

  if (j.contains("curriculum")) {
    const auto& c = j.at("curriculum");
    check_keys(c, {"linear_fraction", "angular_fraction", "full_linear_min",
                   "full_linear_max", "full_angular_min", "full_angular_max",
                   "linear_threshold", "angular_threshold", "delta",
                   "a_max_linear_min", "a_max_linear_max", "a_max_angular_min",
                   "a_max_angular_max", "turn_delay_min", "turn_delay_max"},
               "curriculum");
    CurriculumState& cur = cfg.trainer.curriculum;
    cur.linear_fraction = get_or(c, "linear_fraction", cur.linear_fraction, "curriculum");
    cur.angular_fraction = get_or(c, "angular_fraction", cur.angular_fraction, "curriculum");
    cur.full_linear_min = get_or(c, "full_linear_min", cur.full_linear_min, "curriculum");
    cur.full_linear_max = get_or(c, "full_linear_max", cur.full_linear_max, "curriculum");
    cur.full_angular_min = get_or(c, "full_angular_min", cur.full_angular_min, "curriculum");
    cur.full_angular_max = get_or(c, "full_angular_max", cur.full_angular_max, "curriculum");
    cur.linear_threshold = get_or(c, "linear_threshold", cur.linear_threshold, "curriculum");
    cur.angular_threshold = get_or(c, "angular_threshold", cur.angular_threshold, "curriculum");
    cur.delta = get_or(c, "delta", cur.delta, "curriculum");
    cur.a_max_linear_min = get_or(c, "a_max_linear_min", cur.a_max_linear_min, "curriculum");
    cur.a_max_linear_max = get_or(c, "a_max_linear_max", cur.a_max_linear_max, "curriculum");
    cur.a_max_angular_min = get_or(c, "a_max_angular_min", cur.a_max_angular_min, "curriculum");
    cur.a_max_angular_max = get_or(c, "a_max_angular_max", cur.a_max_angular_max, "curriculum");
    cur.turn_delay_min = get_or(c, "turn_delay_min", cur.turn_delay_min, "curriculum");
    cur.turn_delay_max = get_or(c, "turn_delay_max", cur.turn_delay_max, "curriculum");
  }

  if (j.contains("reward")) {
    const auto& r = j.at("reward");
    check_keys(r, {"sigma", "delta_front_target", "delta_rear_target", "alpha",
                   "theta_flex", "theta_ext", "w_e", "w_b", "k", "omega_th",
                   "sigma_v", "air_time_cap", "weights"},
               "reward");
    RewardConfig& rw = cfg.env.reward;
    rw.sigma = get_or(r, "sigma", rw.sigma, "reward");
    rw.delta_front_target = get_or(r, "delta_front_target", rw.delta_front_target, "reward");
    rw.delta_rear_target = get_or(r, "delta_rear_target", rw.delta_rear_target, "reward");
    rw.alpha = get_or(r, "alpha", rw.alpha, "reward");
    rw.theta_flex = get_or(r, "theta_flex", rw.theta_flex, "reward");
    rw.theta_ext = get_or(r, "theta_ext", rw.theta_ext, "reward");
    rw.w_e = get_or(r, "w_e", rw.w_e, "reward");
    rw.w_b = get_or(r, "w_b", rw.w_b, "reward");
    rw.k = get_or(r, "k", rw.k, "reward");
    rw.omega_th = get_or(r, "omega_th", rw.omega_th, "reward");
    rw.sigma_v = get_or(r, "sigma_v", rw.sigma_v, "reward");
    rw.air_time_cap = get_or(r, "air_time_cap", rw.air_time_cap, "reward");
    if (r.contains("weights")) {
      const auto& w = r.at("weights");
      check_keys(w, {"gait", "spine_undulation", "spine_steering",
                     "lin_vel_tracking", "ang_vel_tracking", "air_time",
                     "torque", "action_rate", "orientation"},
                 "reward.weights");
      auto& tw = rw.term_weights;
      tw.gait = get_or(w, "gait", tw.gait, "reward.weights");
      tw.spine_undulation = get_or(w, "spine_undulation", tw.spine_undulation, "reward.weights");
      tw.spine_steering = get_or(w, "spine_steering", tw.spine_steering, "reward.weights");
      tw.lin_vel_tracking = get_or(w, "lin_vel_tracking", tw.lin_vel_tracking, "reward.weights");
      tw.ang_vel_tracking = get_or(w, "ang_vel_tracking", tw.ang_vel_tracking, "reward.weights");
      tw.air_time = get_or(w, "air_time", tw.air_time, "reward.weights");
      tw.torque = get_or(w, "torque", tw.torque, "reward.weights");
      tw.action_rate = get_or(w, "action_rate", tw.action_rate, "reward.weights");
      tw.orientation = get_or(w, "orientation", tw.orientation, "reward.weights");
    }
  }

  if (j.contains("env")) {
    const auto& e = j.at("env");
    check_keys(e, {"episode_time", "min_height", "max_tilt", "action_scale"},
               "env");
    cfg.env.episode_time = get_or(e, "episode_time", cfg.env.episode_time, "env");
    cfg.env.min_height = get_or(e, "min_height", cfg.env.min_height, "env");
    cfg.env.max_tilt = get_or(e, "max_tilt", cfg.env.max_tilt, "env");
    cfg.env.action_scale = get_or(e, "action_scale", cfg.env.action_scale, "env");
  }

  if (j.contains("figure8")) {
    const auto& f = j.at("figure8");
    check_keys(f, {"radius", "straight_length", "vx", "dt", "max_time",
                   "start_offset", "lookahead", "kp", "max_yaw_rate"},
               "figure8");
    cfg.figure8_radius = get_or(f, "radius", cfg.figure8_radius, "figure8");
    cfg.figure8_straight_length =
        get_or(f, "straight_length", cfg.figure8_straight_length, "figure8");
    cfg.figure8.vx = get_or(f, "vx", cfg.figure8.vx, "figure8");
    cfg.figure8.dt = get_or(f, "dt", cfg.figure8.dt, "figure8");
    cfg.figure8.max_time = get_or(f, "max_time", cfg.figure8.max_time, "figure8");
    cfg.figure8.start_offset =
        get_or(f, "start_offset", cfg.figure8.start_offset, "figure8");
    HeadingControllerConfig& hc = cfg.figure8.controller;
    hc.lookahead = get_or(f, "lookahead", hc.lookahead, "figure8");
    hc.kp = get_or(f, "kp", hc.kp, "figure8");
    hc.max_yaw_rate = get_or(f, "max_yaw_rate", hc.max_yaw_rate, "figure8");
  }

  if (j.contains("drop")) {
    const auto& d = j.at("drop");
    check_keys(d, {"height", "roll_deg", "pitch_deg", "trials", "seed", "dt",
                   "upright_tolerance_deg", "orientation_jitter_deg",
                   "rate_jitter", "max_fall_time", "hold_band_deg", "cycle"},
               "drop");
    cfg.drop.height = get_or(d, "height", cfg.drop.height, "drop");
    cfg.drop.roll_deg = get_or(d, "roll_deg", cfg.drop.roll_deg, "drop");
    cfg.drop.pitch_deg = get_or(d, "pitch_deg", cfg.drop.pitch_deg, "drop");
    cfg.drop.trials = get_or(d, "trials", cfg.drop.trials, "drop");
    cfg.drop.seed = get_or(d, "seed", cfg.drop.seed, "drop");
    cfg.drop.dt = get_or(d, "dt", cfg.drop.dt, "drop");
    cfg.drop.upright_tolerance_deg =
        get_or(d, "upright_tolerance_deg", cfg.drop.upright_tolerance_deg, "drop");
    cfg.drop.orientation_jitter_deg =
        get_or(d, "orientation_jitter_deg", cfg.drop.orientation_jitter_deg, "drop");
    cfg.drop.rate_jitter = get_or(d, "rate_jitter", cfg.drop.rate_jitter, "drop");
    cfg.drop.max_fall_time = get_or(d, "max_fall_time", cfg.drop.max_fall_time, "drop");
    cfg.righting.hold_band_deg =
        get_or(d, "hold_band_deg", cfg.righting.hold_band_deg, "drop");
    if (d.contains("cycle")) {
      const auto& c = d.at("cycle");
      check_keys(c, {"yaw_amp", "pitch_amp", "period", "squareness"},
                 "drop.cycle");
      SelfRightingCycle& cy = cfg.righting.cycle;
      cy.yaw_amp = get_or(c, "yaw_amp", cy.yaw_amp, "drop.cycle");
      cy.pitch_amp = get_or(c, "pitch_amp", cy.pitch_amp, "drop.cycle");
      cy.period = get_or(c, "period", cy.period, "drop.cycle");
      cy.squareness = get_or(c, "squareness", cy.squareness, "drop.cycle");
    }
  }

  // Fail at load time, not deep inside a run.
  validate_ppo_config(cfg.trainer.ppo);
  validate_reward_config(cfg.env.reward);
  validate_heading_controller(cfg.figure8.controller);
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open for reading: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/true,
                              /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("config: " + std::string(e.what()));
  }
  return run_config_from_json(j);
}

// Default config with section comments: documents every knob with its
// default value. Values are dumped from a default RunConfig rather than
// written by hand, so this file can never drift from the code.
inline std::string default_config_text() {
  const nlohmann::json j = run_config_to_json(RunConfig{});
  auto section = [&](const char* key) { return j.at(key).dump(2); };
  std::string text;
  text += "// spinequad run configuration (JSON with // comments).\n";
  text += "// Omitted keys keep the defaults shown here; unknown keys are\n";
  text += "// rejected. The --seed and --out-dir CLI flags override their\n";
  text += "// file counterparts.\n";
  text += "{\n";
  text += "// PPO schedule, network shape, and optimizer constants.\n";
  text += "\"trainer\": " + section("trainer") + ",\n";
  text += "// Command-range growth: fractions of the full velocity ranges,\n";
  text += "// widened while mean tracking clears the thresholds.\n";
  text += "\"curriculum\": " + section("curriculum") + ",\n";
  text += "// Reward kernels and the per-term mixing weights (penalty terms\n";
  text += "// carry negative weights).\n";
  text += "\"reward\": " + section("reward") + ",\n";
  text += "// Planar locomotion episode bounds and action-to-target scale.\n";
  text += "\"env\": " + section("env") + ",\n";
  text += "// Figure-8 tracking evaluation: path geometry, reference speed,\n";
  text += "// and the proportional heading controller.\n";
  text += "\"figure8\": " + section("figure8") + ",\n";
  text += "// Aerial drop trials and the self-righting spine cycle.\n";
  text += "\"drop\": " + section("drop") + "\n";
  text += "}\n";
  return text;
}

inline void emit_default_config(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open for writing: " + path);
  out << default_config_text();
  if (!out) throw FormatError("write failed: " + path);
}

}  // namespace spinequad
