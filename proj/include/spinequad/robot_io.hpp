#pragma once

#include <array>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "spinequad/errors.hpp"
#include "spinequad/robot.hpp"

namespace spinequad {

namespace detail {

template <typename T>
T get_field(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key))
    throw ValidationError(key + ": missing required field");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(key + ": " + e.what());
  }
}

template <std::size_t N>
std::array<double, N> get_array(const nlohmann::json& j,
                                const std::string& key) {
  if (!j.contains(key))
    throw ValidationError(key + ": missing required field");
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != N)
    throw ValidationError(key + ": expected " + std::to_string(N) +
                          " entries, got " +
                          std::to_string(arr.is_array() ? arr.size() : 0));
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!arr[i].is_number())
      throw ValidationError(key + "[" + std::to_string(i) + "]: not a number");
    out[i] = arr[i].get<double>();
  }
  return out;
}

}  // namespace detail

inline RobotSpec robot_spec_from_json(const nlohmann::json& j) {
  RobotSpec s;
  {
    if (!j.contains("joint_names"))
      throw ValidationError("joint_names: missing required field");
    const auto& names = j.at("joint_names");
    if (!names.is_array() || names.size() != kNumJoints)
      throw ValidationError(
          "joint_names: expected " + std::to_string(kNumJoints) +
          " joints, got " +
          std::to_string(names.is_array() ? names.size() : 0));
    for (int i = 0; i < kNumJoints; ++i) s.joint_names[i] = names[i];
  }
  s.joint_lower = detail::get_array<kNumJoints>(j, "joint_lower");
  s.joint_upper = detail::get_array<kNumJoints>(j, "joint_upper");
  s.torque_limit = detail::get_array<kNumJoints>(j, "torque_limit");
  s.default_pose = detail::get_array<kNumJoints>(j, "default_pose");
  s.total_mass = detail::get_field<double>(j, "total_mass");
  s.body_length = detail::get_field<double>(j, "body_length");
  s.body_width = detail::get_field<double>(j, "body_width");
  s.leg_length = detail::get_field<double>(j, "leg_length");
  s.standing_height = detail::get_field<double>(j, "standing_height");
  s.control_rate = detail::get_field<double>(j, "control_rate");
  s.sim_substeps = detail::get_field<int>(j, "sim_substeps");
  if (j.contains("mass_split")) {
    const auto& ms = j.at("mass_split");
    s.mass_split.front_body = detail::get_field<double>(ms, "front_body");
    s.mass_split.rear_body = detail::get_field<double>(ms, "rear_body");
    s.mass_split.legs = detail::get_field<double>(ms, "legs");
    s.mass_split.thigh_share = detail::get_field<double>(ms, "thigh_share");
  }
  validate_spec(s);
  return s;
}

inline nlohmann::json robot_spec_to_json(const RobotSpec& s) {
  nlohmann::json j;
  j["joint_names"] = s.joint_names;
  j["joint_lower"] = s.joint_lower;
  j["joint_upper"] = s.joint_upper;
  j["torque_limit"] = s.torque_limit;
  j["default_pose"] = s.default_pose;
  j["total_mass"] = s.total_mass;
  j["body_length"] = s.body_length;
  j["body_width"] = s.body_width;
  j["leg_length"] = s.leg_length;
  j["standing_height"] = s.standing_height;
  j["control_rate"] = s.control_rate;
  j["sim_substeps"] = s.sim_substeps;
  j["mass_split"] = {{"front_body", s.mass_split.front_body},
                     {"rear_body", s.mass_split.rear_body},
                     {"legs", s.mass_split.legs},
                     {"thigh_share", s.mass_split.thigh_share}};
  return j;
}

// Loads and validates a robot spec file (JSON, // comments allowed).
// Parse failures raise FormatError with the parser's line/column info;
// invariant violations raise ValidationError naming the field.
inline RobotSpec load_robot_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/true,
                              /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
  return robot_spec_from_json(j);
}

inline void save_robot_spec(const RobotSpec& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError(path + ": cannot open file for writing");
  out << robot_spec_to_json(s).dump(2) << "\n";
}

}  // namespace spinequad
