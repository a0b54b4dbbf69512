#pragma once

// Closed figure-8 reference path, the proportional heading controller that
// steers along it, and lap metrics computed from logged trajectories.
//
// The path is two circles of radius R whose centers sit on the x axis,
// joined by the pair of internal tangent lines. Placing the centers at
// x = +/- sqrt(R^2 + L^2/4) makes the tangent chord between the two touch
// points exactly L long and puts its midpoint at the figure's center, so the
// two straights cross there. Traversal: straight up-right, clockwise around
// the right circle, straight up-left, counter-clockwise around the left
// circle — headings are continuous at all four junctions by tangency.

#include <spinequad/errors.hpp>
#include <spinequad/geometry.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace spinequad {

struct PathPoint {
  Eigen::Vector2d position;
  double heading = 0.0;    // tangent direction, rad in (-pi, pi]
  double curvature = 0.0;  // 0 on straights, -1/R clockwise, +1/R counter
};

struct PathProjection {
  double s = 0.0;         // arc length of the nearest path point
  double distance = 0.0;  // m from the query to that point
};

class Figure8Path {
 public:
  // Distances this far below the path scale are reported as exactly zero;
  // they are rounding residue from the trig in sample(), and flooring them
  // keeps "on-path trajectory measures zero error" an exact identity.
  static constexpr double kDistanceFloor = 1e-12;

  Figure8Path(double radius, double straight_length,
              const Eigen::Vector2d& center = Eigen::Vector2d::Zero())
      : r_(radius), len_(straight_length), center_(center) {
    if (!(r_ > 0.0) || !std::isfinite(r_))
      throw ArgumentError("Figure8Path: radius must be positive");
    if (!(len_ > 2.0 * r_) || !std::isfinite(len_))
      throw ArgumentError(
          "Figure8Path: straight length must exceed the circle diameter");
    theta_ = std::atan2(2.0 * r_, len_);   // straight heading above the x axis
    d_ = std::hypot(r_, 0.5 * len_);       // center offset along x
    arc_angle_ = kPi + 2.0 * theta_;      // sweep of each loop
    arc_len_ = r_ * arc_angle_;
    s1_ = len_;                            // end of first straight
    s2_ = s1_ + arc_len_;                  // end of right loop
    s3_ = s2_ + len_;                      // end of second straight
    total_ = s3_ + arc_len_;
    u_a_ = Eigen::Vector2d(std::cos(theta_), std::sin(theta_));
    u_b_ = Eigen::Vector2d(-u_a_.x(), u_a_.y());
    right_center_ = center_ + Eigen::Vector2d(d_, 0.0);
    left_center_ = center_ - Eigen::Vector2d(d_, 0.0);
    p_a_ = center_ - 0.5 * len_ * u_a_;  // start of first straight
    p_b_ = center_ + 0.5 * len_ * Eigen::Vector2d(u_a_.x(), -u_a_.y());
  }

  double radius() const { return r_; }
  double straight_length() const { return len_; }
  double arc_angle() const { return arc_angle_; }
  double total_length() const { return total_; }
  const Eigen::Vector2d& center() const { return center_; }

  // Point, tangent heading, and curvature at arc length s (periodic in s).
  PathPoint sample(double s) const {
    s = positive_mod(s);
    PathPoint out;
    if (s < s1_) {
      out.position = p_a_ + s * u_a_;
      out.heading = theta_;
      out.curvature = 0.0;
    } else if (s < s2_) {
      // Right loop, clockwise from polar angle pi/2 + theta.
      const double phi = (0.5 * kPi + theta_) - (s - s1_) / r_;
      out.position =
          right_center_ + r_ * Eigen::Vector2d(std::cos(phi), std::sin(phi));
      out.heading = wrap_angle(phi - 0.5 * kPi);
      out.curvature = -1.0 / r_;
    } else if (s < s3_) {
      out.position = p_b_ + (s - s2_) * u_b_;
      out.heading = kPi - theta_;
      out.curvature = 0.0;
    } else {
      // Left loop, counter-clockwise from polar angle pi/2 - theta.
      const double phi = (0.5 * kPi - theta_) + (s - s3_) / r_;
      out.position =
          left_center_ + r_ * Eigen::Vector2d(std::cos(phi), std::sin(phi));
      out.heading = wrap_angle(phi + 0.5 * kPi);
      out.curvature = 1.0 / r_;
    }
    return out;
  }

  // Nearest path point to p: analytic projection onto each of the four
  // segments, keeping the closest (first segment wins exact ties).
  PathProjection nearest(const Eigen::Vector2d& p) const {
    PathProjection best;
    best.distance = std::numeric_limits<double>::infinity();
    for (const PathProjection& cand : candidates(p)) consider(cand, best);
    if (best.distance < kDistanceFloor) best.distance = 0.0;
    return best;
  }

  // Projection localized near a previous arc-length estimate. The figure-8
  // crosses itself at its center, where the globally nearest branch is the
  // one NOT being traversed whenever the query is laterally offset (the
  // other straight passes at |cos 2*theta| times the offset). Lap accounting
  // therefore keeps the closest candidate within a quarter lap of the
  // previous estimate, falling back to the global answer if none qualifies.
  PathProjection nearest_along(const Eigen::Vector2d& p, double s_prev) const {
    PathProjection best;
    best.distance = std::numeric_limits<double>::infinity();
    bool found = false;
    for (const PathProjection& cand : candidates(p)) {
      if (std::abs(std::remainder(cand.s - s_prev, total_)) > 0.25 * total_)
        continue;
      consider(cand, best);
      found = true;
    }
    if (!found) return nearest(p);
    if (best.distance < kDistanceFloor) best.distance = 0.0;
    return best;
  }

 private:
  double positive_mod(double s) const {
    double r = std::fmod(s, total_);
    if (r < 0.0) r += total_;
    return r;
  }

  std::array<PathProjection, 4> candidates(const Eigen::Vector2d& p) const {
    return {project_straight(p, p_a_, u_a_, 0.0),
            project_arc(p, right_center_, 0.5 * kPi + theta_, -1.0, s1_),
            project_straight(p, p_b_, u_b_, s2_),
            project_arc(p, left_center_, 0.5 * kPi - theta_, +1.0, s3_)};
  }

  static void consider(const PathProjection& cand, PathProjection& best) {
    if (cand.distance < best.distance) best = cand;
  }

  PathProjection project_straight(const Eigen::Vector2d& p,
                                  const Eigen::Vector2d& a,
                                  const Eigen::Vector2d& u, double s0) const {
    const double t = std::clamp((p - a).dot(u), 0.0, len_);
    const Eigen::Vector2d foot = a + t * u;
    return {s0 + t, (p - foot).norm()};
  }

  // Arc starting at polar angle phi0 and sweeping arc_angle_ in direction
  // dir (+1 counter-clockwise, -1 clockwise). If the query's polar angle
  // falls outside the swept range, the nearest arc point is an endpoint —
  // both endpoints are shared with the straights, which already cover them,
  // but they are included here so each segment is self-contained.
  PathProjection project_arc(const Eigen::Vector2d& p,
                             const Eigen::Vector2d& c, double phi0, double dir,
                             double s0) const {
    const Eigen::Vector2d v = p - c;
    const double beta = std::atan2(v.y(), v.x());
    double delta = std::fmod(dir * (beta - phi0), 2.0 * kPi);
    if (delta < 0.0) delta += 2.0 * kPi;
    if (delta <= arc_angle_) {
      const Eigen::Vector2d foot =
          c + r_ * Eigen::Vector2d(std::cos(beta), std::sin(beta));
      return {s0 + r_ * delta, (p - foot).norm()};
    }
    const Eigen::Vector2d e0 =
        c + r_ * Eigen::Vector2d(std::cos(phi0), std::sin(phi0));
    const double phi1 = phi0 + dir * arc_angle_;
    const Eigen::Vector2d e1 =
        c + r_ * Eigen::Vector2d(std::cos(phi1), std::sin(phi1));
    const double d0 = (p - e0).norm();
    const double d1 = (p - e1).norm();
    return d0 <= d1 ? PathProjection{s0, d0}
                    : PathProjection{s0 + arc_len_, d1};
  }

  double r_, len_;
  Eigen::Vector2d center_;
  double theta_, d_, arc_angle_, arc_len_, s1_, s2_, s3_, total_;
  Eigen::Vector2d u_a_, u_b_, right_center_, left_center_, p_a_, p_b_;
};

inline Figure8Path figure8_path(double radius, double straight_length) {
  return Figure8Path(radius, straight_length);
}

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

struct HeadingControllerConfig {
  double lookahead = 0.3;     // m of path ahead of the nearest point
  double kp = 2.0;            // 1/s, heading-error gain
  double max_yaw_rate = 8.0;  // clamp, the full commanded turn-rate range
};

inline void validate_heading_controller(const HeadingControllerConfig& cfg) {
  if (!(cfg.kp > 0.0)) throw ArgumentError("heading controller: kp must be > 0");
  if (!(cfg.lookahead > 0.0))
    throw ArgumentError("heading controller: lookahead must be > 0");
  if (!(cfg.max_yaw_rate > 0.0))
    throw ArgumentError("heading controller: max_yaw_rate must be > 0");
}

// Yaw-rate command that steers the pose toward the path: aim at the point
// `lookahead` meters beyond the nearest path point, take the bearing error
// wrapped to (-pi, pi], and scale by kp with a symmetric clamp. The hinted
// overload localizes the projection near a known arc length so a follower
// does not latch onto the other branch at the center crossing.
inline double heading_p_controller(const Pose2D& pose, const Figure8Path& path,
                                   const HeadingControllerConfig& cfg,
                                   const PathProjection& near) {
  validate_heading_controller(cfg);
  const PathPoint target = path.sample(near.s + cfg.lookahead);
  const double bearing = std::atan2(target.position.y() - pose.y,
                                    target.position.x() - pose.x);
  const double error = wrap_angle(bearing - pose.yaw);
  return std::clamp(cfg.kp * error, -cfg.max_yaw_rate, cfg.max_yaw_rate);
}

inline double heading_p_controller(const Pose2D& pose, const Figure8Path& path,
                                   const HeadingControllerConfig& cfg) {
  return heading_p_controller(pose, path, cfg,
                              path.nearest({pose.x, pose.y}));
}

// One logged pose of a path-following run.
struct TrajectorySample {
  double time = 0.0;  // s
  double x = 0.0;     // m
  double y = 0.0;     // m
  double yaw = 0.0;   // rad
  double forward_speed = 0.0;  // m/s along the body heading
};

struct PathMetrics {
  double total_time = 0.0;          // s, duration of the logged lap
  double avg_path_error = 0.0;      // m, mean distance to the path
  double avg_velocity_error = 0.0;  // m/s, mean |speed - commanded|
};

// Report column names, shared by the CSV and JSON emitters.
inline constexpr const char* kPathErrorColumn =
    "Average Path Tracking Error (m)";
inline constexpr const char* kVelocityErrorColumn =
    "Average Velocity Tracking Error (m/s)";
inline constexpr const char* kTotalTimeColumn = "Total Time (s)";

// Lap metrics for a logged trajectory. The trajectory must cover one full
// lap: projected progress, unwrapped step by step, has to pass the path
// length. The first sample anchors the projection globally; later samples
// are localized near the running estimate, so the tracking error is always
// measured against the branch actually being followed. Averages run over
// every sample; total time is last minus first timestamp.
inline PathMetrics path_metrics(const std::vector<TrajectorySample>& traj,
                                const Figure8Path& path, double vx_cmd) {
  if (traj.size() < 2)
    throw ArgumentError("path_metrics: need at least two trajectory samples");
  if (!(vx_cmd > 0.0))
    throw ArgumentError("path_metrics: commanded speed must be > 0");
  const double total = path.total_length();
  double dist_sum = 0.0;
  double vel_sum = 0.0;
  double progress = 0.0;
  double max_progress = 0.0;
  double prev_s = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const TrajectorySample& ts = traj[i];
    if (!std::isfinite(ts.x) || !std::isfinite(ts.y) ||
        !std::isfinite(ts.time) || !std::isfinite(ts.forward_speed))
      throw ArgumentError("path_metrics: non-finite trajectory sample");
    if (i > 0 && !(ts.time > traj[i - 1].time))
      throw ArgumentError("path_metrics: timestamps must strictly increase");
    const PathProjection near = i == 0
                                    ? path.nearest({ts.x, ts.y})
                                    : path.nearest_along({ts.x, ts.y}, prev_s);
    dist_sum += near.distance;
    vel_sum += std::abs(ts.forward_speed - vx_cmd);
    if (i > 0) progress += std::remainder(near.s - prev_s, total);
    prev_s = near.s;
    max_progress = std::max(max_progress, progress);
  }
  if (max_progress < total - 1e-9)
    throw AnalysisError("path_metrics: trajectory covers " +
                        std::to_string(max_progress) + " m of a " +
                        std::to_string(total) + " m lap");
  const double n = static_cast<double>(traj.size());
  return {traj.back().time - traj.front().time, dist_sum / n, vel_sum / n};
}

struct Figure8RolloutConfig {
  double vx = 1.0;     // m/s commanded forward speed
  double dt = 0.01;    // s integration step
  double max_time = 120.0;  // s, give up (metrics will then reject the lap)
  double start_offset = 0.0;  // m initial lateral offset, + is path-left
  HeadingControllerConfig controller;
};

// Kinematic reference vehicle (constant forward speed, yaw-rate steered by
// the heading controller) driven around the path for one lap, flying start
// on the path heading. Used by the harness to exercise the controller and
// the metric pipeline end to end.
inline std::vector<TrajectorySample> run_figure8_rollout(
    const Figure8Path& path, const Figure8RolloutConfig& cfg) {
  if (!(cfg.vx > 0.0) || !(cfg.dt > 0.0) || !(cfg.max_time > 0.0))
    throw ArgumentError("figure8 rollout: vx, dt, max_time must be > 0");
  validate_heading_controller(cfg.controller);
  const PathPoint start = path.sample(0.0);
  Pose2D pose;
  pose.x = start.position.x() - cfg.start_offset * std::sin(start.heading);
  pose.y = start.position.y() + cfg.start_offset * std::cos(start.heading);
  pose.yaw = start.heading;

  const double total = path.total_length();
  const int max_steps = static_cast<int>(std::ceil(cfg.max_time / cfg.dt));
  std::vector<TrajectorySample> traj;
  traj.reserve(static_cast<std::size_t>(
      std::min(max_steps + 1, static_cast<int>(3.0 * total / (cfg.vx * cfg.dt)))));
  double progress = 0.0;
  double prev_s = path.nearest({pose.x, pose.y}).s;
  for (int k = 0; k <= max_steps; ++k) {
    traj.push_back({k * cfg.dt, pose.x, pose.y, pose.yaw, cfg.vx});
    const PathProjection near =
        k == 0 ? path.nearest({pose.x, pose.y})
               : path.nearest_along({pose.x, pose.y}, prev_s);
    if (k > 0) progress += std::remainder(near.s - prev_s, total);
    prev_s = near.s;
    if (progress >= total) break;
    const double wz = heading_p_controller(pose, path, cfg.controller, near);
    pose.x += cfg.vx * std::cos(pose.yaw) * cfg.dt;
    pose.y += cfg.vx * std::sin(pose.yaw) * cfg.dt;
    pose.yaw = wrap_angle(pose.yaw + wz * cfg.dt);
  }
  return traj;
}

}  // namespace spinequad
