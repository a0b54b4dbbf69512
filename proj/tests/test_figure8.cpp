#include <catch2/catch_amalgamated.hpp>

#include <spinequad/figure8.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

using namespace spinequad;

namespace {

// Left normal of a path point (90 degrees counter-clockwise of the tangent).
Eigen::Vector2d left_normal(const PathPoint& pt) {
  return {-std::sin(pt.heading), std::cos(pt.heading)};
}

// Magnitude of the wrapped angular difference.
double heading_gap(double a, double b) { return std::abs(wrap_angle(a - b)); }

}  // namespace

TEST_CASE("angle wrapping maps onto (-pi, pi]") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(kPi) == Catch::Approx(kPi).margin(1e-15));
  CHECK(wrap_angle(-kPi) == Catch::Approx(kPi).margin(1e-15));
  CHECK(wrap_angle(3.0 * kPi) == Catch::Approx(kPi).margin(1e-12));
  CHECK(wrap_angle(2.0 * kPi + 0.25) == Catch::Approx(0.25).margin(1e-12));
  CHECK(wrap_angle(-2.0 * kPi - 0.25) == Catch::Approx(-0.25).margin(1e-12));
}

TEST_CASE("figure-8 geometry rejects infeasible parameters") {
  CHECK_THROWS_AS(figure8_path(0.0, 4.0), ArgumentError);
  CHECK_THROWS_AS(figure8_path(-1.0, 4.0), ArgumentError);
  CHECK_THROWS_AS(figure8_path(1.0, 2.0), ArgumentError);  // straights
  CHECK_THROWS_AS(figure8_path(1.0, 1.0), ArgumentError);  // can't reach
  CHECK_NOTHROW(figure8_path(1.0, 2.0 + 1e-6));
}

TEST_CASE("figure-8 path is closed and periodic") {
  const Figure8Path path = figure8_path(1.0, 4.0);
  const PathPoint a = path.sample(0.0);
  const PathPoint b = path.sample(path.total_length());
  CHECK((a.position - b.position).norm() == 0.0);  // wraps to the same branch
  CHECK(a.heading == b.heading);

  const PathPoint c = path.sample(2.5);
  const PathPoint d = path.sample(2.5 - path.total_length());
  const PathPoint e = path.sample(2.5 + 2.0 * path.total_length());
  CHECK((c.position - d.position).norm() < 1e-9);
  CHECK((c.position - e.position).norm() < 1e-9);
  CHECK(heading_gap(c.heading, d.heading) < 1e-12);
}

TEST_CASE("figure-8 length matches the tangency geometry") {
  const double R = 1.0;
  const double L = 4.0;
  const Figure8Path path = figure8_path(R, L);

  SECTION("pinned regression value") {
    CHECK(path.total_length() ==
          Catch::Approx(16.13777574318281).margin(1e-12));
  }

  SECTION("independent tangency oracle") {
    // A straight through the figure center is tangent to the circle centered
    // at (d, 0) where the touch point P satisfies P . (P - C) = 0, i.e. the
    // touch polar angle is acos(-R/d); each loop sweeps twice that angle.
    const double d = std::hypot(R, 0.5 * L);
    const double sweep = 2.0 * std::acos(-R / d);
    CHECK(path.arc_angle() == Catch::Approx(sweep).margin(1e-12));
    CHECK(path.total_length() ==
          Catch::Approx(2.0 * L + 2.0 * R * sweep).margin(1e-12));
  }

  SECTION("polyline integration oracle") {
    const int n = 200000;
    double len = 0.0;
    Eigen::Vector2d prev = path.sample(0.0).position;
    for (int i = 1; i <= n; ++i) {
      const Eigen::Vector2d p =
          path.sample(path.total_length() * i / n).position;
      len += (p - prev).norm();
      prev = p;
    }
    CHECK(len == Catch::Approx(path.total_length()).epsilon(1e-6));
  }
}

TEST_CASE("position and heading are continuous at the four junctions") {
  const Figure8Path path = figure8_path(0.7, 3.0);
  const double L = path.straight_length();
  const double arc = path.radius() * path.arc_angle();
  const double junctions[] = {L, L + arc, 2.0 * L + arc, path.total_length()};
  const double eps = 1e-9;
  for (double s : junctions) {
    const PathPoint before = path.sample(s - eps);
    const PathPoint after = path.sample(s + eps);
    CHECK((before.position - after.position).norm() < 1e-8);
    CHECK(heading_gap(before.heading, after.heading) < 1e-6);
  }
}

TEST_CASE("curvature is zero on straights and +/- 1/R on the loops") {
  const double R = 0.5;
  const Figure8Path path = figure8_path(R, 2.0);
  const double L = path.straight_length();
  const double arc = R * path.arc_angle();
  CHECK(path.sample(0.5 * L).curvature == 0.0);
  CHECK(path.sample(L + 0.5 * arc).curvature == -1.0 / R);  // clockwise loop
  CHECK(path.sample(L + arc + 0.5 * L).curvature == 0.0);
  CHECK(path.sample(2.0 * L + 1.5 * arc).curvature == 1.0 / R);
}

TEST_CASE("projection recovers on-path and offset points") {
  const Figure8Path path = figure8_path(1.0, 4.0);
  const double total = path.total_length();

  SECTION("points sampled from the path project to zero distance") {
    for (int i = 0; i < 200; ++i) {
      const double s = total * i / 200.0;
      const PathProjection near = path.nearest(path.sample(s).position);
      CHECK(near.distance == 0.0);  // rounding residue is floored
      CHECK(std::abs(std::remainder(near.s - s, total)) < 1e-9);
    }
  }

  SECTION("points offset along the local normal report the offset") {
    // Localized projection: near the center crossing the other branch can
    // pass closer than the offset, so the query carries the branch context.
    const double offset = 0.05;
    for (int i = 0; i < 200; ++i) {
      const double s = total * (i + 0.37) / 200.0;
      const PathPoint pt = path.sample(s);
      const PathProjection near =
          path.nearest_along(pt.position + offset * left_normal(pt), s);
      CHECK(near.distance == Catch::Approx(offset).margin(1e-12));
      CHECK(std::abs(std::remainder(near.s - s, total)) < 1e-9);
    }
  }

  SECTION("the center crossing disambiguates by branch") {
    // At the crossing the two straights intersect at angle 2*theta, so a
    // point offset delta from one branch lies |cos 2*theta| * delta from the
    // other — globally nearer, but on the wrong lap segment.
    const double s_cross = 0.5 * path.straight_length();  // center, branch A
    const PathPoint pt = path.sample(s_cross);
    const Eigen::Vector2d p = pt.position + 0.05 * left_normal(pt);
    const double two_theta = 2.0 * std::atan2(2.0, 4.0);
    CHECK(path.nearest(p).distance ==
          Catch::Approx(0.05 * std::abs(std::cos(two_theta))).margin(1e-12));
    const PathProjection local = path.nearest_along(p, s_cross);
    CHECK(local.distance == Catch::Approx(0.05).margin(1e-12));
    CHECK(std::abs(std::remainder(local.s - s_cross, total)) < 1e-9);
  }

  SECTION("circle centers are a radius away from the path") {
    const double d = std::hypot(1.0, 2.0);
    const PathProjection near = path.nearest({d, 0.0});
    CHECK(near.distance == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("matches a brute-force dense scan everywhere") {
    const int grid = 60000;
    std::vector<Eigen::Vector2d> dense;
    dense.reserve(grid);
    for (int i = 0; i < grid; ++i)
      dense.push_back(path.sample(total * i / grid).position);
    const double spacing = total / grid;

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ux(-6.0, 6.0);
    std::uniform_real_distribution<double> uy(-4.0, 4.0);
    for (int k = 0; k < 120; ++k) {
      const Eigen::Vector2d p(ux(rng), uy(rng));
      double brute = std::numeric_limits<double>::infinity();
      for (const Eigen::Vector2d& q : dense)
        brute = std::min(brute, (p - q).norm());
      const PathProjection near = path.nearest(p);
      // The analytic distance can only undercut the polyline scan, and the
      // scan overshoots by at most half a grid spacing.
      CHECK(near.distance <= brute + 1e-12);
      CHECK(brute <= near.distance + 0.5 * spacing + 1e-12);
      const Eigen::Vector2d foot = path.sample(near.s).position;
      CHECK(std::abs((p - foot).norm() - near.distance) < 1e-9);
    }
  }
}

TEST_CASE("heading controller steers toward the path") {
  const Figure8Path path = figure8_path(1.0, 4.0);
  HeadingControllerConfig cfg;
  cfg.lookahead = 0.3;
  cfg.kp = 2.0;

  SECTION("on the straight with an aligned heading the command is zero") {
    const PathPoint pt = path.sample(1.0);
    const Pose2D pose{pt.position.x(), pt.position.y(), pt.heading};
    CHECK(std::abs(heading_p_controller(pose, path, cfg)) < 1e-12);
  }

  SECTION("a 0.3 rad heading error with kp = 2 commands 0.6 rad/s") {
    const PathPoint pt = path.sample(1.0);
    const PathPoint target = path.sample(1.0 + cfg.lookahead);
    const double bearing =
        std::atan2(target.position.y() - pt.position.y(),
                   target.position.x() - pt.position.x());
    const Pose2D pose{pt.position.x(), pt.position.y(), bearing - 0.3};
    CHECK(heading_p_controller(pose, path, cfg) ==
          Catch::Approx(0.6).margin(1e-12));
  }

  SECTION("wrapped error is antisymmetric near the +/- pi cut") {
    const PathPoint pt = path.sample(1.0);
    const PathPoint target = path.sample(1.0 + cfg.lookahead);
    const double bearing =
        std::atan2(target.position.y() - pt.position.y(),
                   target.position.x() - pt.position.x());
    const double big = kPi - 0.01;
    const Pose2D left{pt.position.x(), pt.position.y(), bearing - big};
    const Pose2D right{pt.position.x(), pt.position.y(), bearing + big};
    const double wl = heading_p_controller(left, path, cfg);
    const double wr = heading_p_controller(right, path, cfg);
    CHECK(wl == Catch::Approx(cfg.kp * big).margin(1e-9));
    CHECK(wr == Catch::Approx(-wl).margin(1e-9));
    // One step across the cut flips the sign but keeps the magnitude.
    const Pose2D past{pt.position.x(), pt.position.y(),
                      bearing - (kPi + 0.01)};
    CHECK(heading_p_controller(past, path, cfg) ==
          Catch::Approx(-cfg.kp * (kPi - 0.01)).margin(1e-9));
  }

  SECTION("output is clamped to the commanded turn-rate range") {
    HeadingControllerConfig hot = cfg;
    hot.kp = 100.0;
    hot.max_yaw_rate = 8.0;
    const PathPoint pt = path.sample(1.0);
    const Pose2D pose{pt.position.x(), pt.position.y(), pt.heading + 2.0};
    CHECK(std::abs(heading_p_controller(pose, path, hot)) == 8.0);
  }

  SECTION("displacement to either side steers back toward the path") {
    HeadingControllerConfig tight = cfg;
    tight.lookahead = 0.2;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> us(0.0, path.total_length());
    std::uniform_real_distribution<double> ud(0.05, 0.2);
    for (int k = 0; k < 100; ++k) {
      const double s = us(rng);
      const PathPoint pt = path.sample(s);
      const Eigen::Vector2d n = left_normal(pt);
      const double d = ud(rng);
      const Pose2D shifted_left{pt.position.x() + d * n.x(),
                                pt.position.y() + d * n.y(), pt.heading};
      const Pose2D shifted_right{pt.position.x() - d * n.x(),
                                 pt.position.y() - d * n.y(), pt.heading};
      const PathProjection near_l =
          path.nearest_along({shifted_left.x, shifted_left.y}, s);
      const PathProjection near_r =
          path.nearest_along({shifted_right.x, shifted_right.y}, s);
      CHECK(heading_p_controller(shifted_left, path, tight, near_l) < 0.0);
      CHECK(heading_p_controller(shifted_right, path, tight, near_r) > 0.0);
    }
  }

  SECTION("invalid gains are rejected") {
    HeadingControllerConfig bad = cfg;
    bad.kp = 0.0;
    const Pose2D pose{0.0, 0.0, 0.0};
    CHECK_THROWS_AS(heading_p_controller(pose, path, bad), ArgumentError);
    bad = cfg;
    bad.lookahead = 0.0;
    CHECK_THROWS_AS(heading_p_controller(pose, path, bad), ArgumentError);
  }
}

TEST_CASE("lap metrics are exact for synthetic trajectories") {
  const Figure8Path path = figure8_path(1.0, 4.0);
  const double total = path.total_length();
  const double vx = 2.0;
  const double lap_time = total / vx;
  const int n = 1024;  // power of two keeps the endpoint timestamp exact

  std::vector<TrajectorySample> perfect;
  for (int k = 0; k <= n; ++k) {
    const double s = total * k / n;
    const PathPoint pt = path.sample(s);
    perfect.push_back(
        {lap_time * k / n, pt.position.x(), pt.position.y(), pt.heading, vx});
  }

  SECTION("perfect tracker: zero errors and the ideal lap time, exactly") {
    const PathMetrics m = path_metrics(perfect, path, vx);
    CHECK(m.avg_path_error == 0.0);
    CHECK(m.avg_velocity_error == 0.0);
    CHECK(m.total_time == lap_time);
  }

  SECTION("constant lateral offset is reported as the path error") {
    std::vector<TrajectorySample> shifted = perfect;
    for (int k = 0; k <= n; ++k) {
      const PathPoint pt = path.sample(total * k / n);
      const Eigen::Vector2d q =
          pt.position + 0.05 * left_normal(pt);
      shifted[static_cast<std::size_t>(k)].x = q.x();
      shifted[static_cast<std::size_t>(k)].y = q.y();
    }
    const PathMetrics m = path_metrics(shifted, path, vx);
    CHECK(m.avg_path_error == Catch::Approx(0.05).margin(1e-9));
    CHECK(m.avg_velocity_error == 0.0);
  }

  SECTION("constant speed bias is reported as the velocity error") {
    std::vector<TrajectorySample> fast = perfect;
    for (TrajectorySample& ts : fast) ts.forward_speed = vx + 0.125;
    const PathMetrics m = path_metrics(fast, path, vx);
    CHECK(m.avg_velocity_error == 0.125);
    CHECK(m.avg_path_error == 0.0);
  }

  SECTION("metrics are invariant under rigid translation of path and data") {
    const Eigen::Vector2d shift(3.5, -2.25);
    const Figure8Path moved(1.0, 4.0, shift);
    std::vector<TrajectorySample> translated = perfect;
    for (TrajectorySample& ts : translated) {
      ts.x += shift.x();
      ts.y += shift.y();
    }
    const PathMetrics base = path_metrics(perfect, path, vx);
    const PathMetrics m = path_metrics(translated, moved, vx);
    CHECK(m.avg_path_error == Catch::Approx(base.avg_path_error).margin(1e-12));
    CHECK(m.avg_velocity_error == base.avg_velocity_error);
    CHECK(m.total_time == base.total_time);
  }

  SECTION("an incomplete lap is rejected") {
    std::vector<TrajectorySample> half(perfect.begin(),
                                       perfect.begin() + n / 2);
    CHECK_THROWS_AS(path_metrics(half, path, vx), AnalysisError);
  }

  SECTION("malformed trajectories are rejected") {
    CHECK_THROWS_AS(path_metrics({perfect[0]}, path, vx), ArgumentError);
    CHECK_THROWS_AS(path_metrics(perfect, path, 0.0), ArgumentError);
    std::vector<TrajectorySample> stuck = perfect;
    stuck[5].time = stuck[4].time;
    CHECK_THROWS_AS(path_metrics(stuck, path, vx), ArgumentError);
    std::vector<TrajectorySample> broken = perfect;
    broken[7].x = std::nan("");
    CHECK_THROWS_AS(path_metrics(broken, path, vx), ArgumentError);
  }
}

TEST_CASE("steered reference vehicle completes a lap with small error",
          "[figure8][rollout]") {
  const Figure8Path path = figure8_path(1.0, 4.0);
  Figure8RolloutConfig cfg;
  cfg.vx = 1.0;
  cfg.dt = 0.01;

  const std::vector<TrajectorySample> traj = run_figure8_rollout(path, cfg);
  const PathMetrics m = path_metrics(traj, path, cfg.vx);
  CHECK(m.avg_path_error < 0.1);
  CHECK(m.avg_velocity_error == 0.0);  // kinematic vehicle holds vx exactly
  const double ideal = path.total_length() / cfg.vx;
  CHECK(m.total_time > 0.9 * ideal);
  CHECK(m.total_time < 1.4 * ideal);

  SECTION("an initial offset is steered out") {
    Figure8RolloutConfig off = cfg;
    off.start_offset = 0.2;
    const std::vector<TrajectorySample> t2 = run_figure8_rollout(path, off);
    const PathMetrics m2 = path_metrics(t2, path, off.vx);
    CHECK(m2.avg_path_error < 0.15);
  }

  SECTION("invalid rollout parameters are rejected") {
    Figure8RolloutConfig bad = cfg;
    bad.vx = 0.0;
    CHECK_THROWS_AS(run_figure8_rollout(path, bad), ArgumentError);
    bad = cfg;
    bad.dt = -0.01;
    CHECK_THROWS_AS(run_figure8_rollout(path, bad), ArgumentError);
  }
}
