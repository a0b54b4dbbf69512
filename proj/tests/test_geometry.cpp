#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "spinequad/geometry.hpp"

using namespace spinequad;

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(kPi) == Catch::Approx(kPi));
  CHECK(wrap_angle(-kPi) == Catch::Approx(kPi));
  CHECK(wrap_angle(3.0 * kPi / 2.0) == Catch::Approx(-kPi / 2.0));
  CHECK(wrap_angle(-3.0 * kPi / 2.0) == Catch::Approx(kPi / 2.0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng);
    const double w = wrap_angle(a);
    CHECK(w > -kPi);
    CHECK(w <= kPi);
    CHECK(std::abs(std::remainder(w - a, 2.0 * kPi)) < 1e-9);
  }
}

TEST_CASE("clamp basics") {
  CHECK(clamp(0.5, 0.0, 1.0) == 0.5);
  CHECK(clamp(-1.0, 0.0, 1.0) == 0.0);
  CHECK(clamp(2.0, 0.0, 1.0) == 1.0);
}

TEST_CASE("euler round trip away from gimbal lock") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> pit(-kPi / 2.0 + 0.02,
                                             kPi / 2.0 - 0.02);
  for (int i = 0; i < 2000; ++i) {
    EulerZYX e;
    e.yaw = ang(rng);
    e.pitch = pit(rng);
    e.roll = ang(rng);
    const Quat q = quat_from_euler_zyx(e);
    const EulerZYX back = euler_zyx_from_quat(q);
    const Quat q2 = quat_from_euler_zyx(back);
    // Compare rotations, not angle triples (q and -q are the same rotation).
    CHECK(std::abs(std::abs(q.dot(q2)) - 1.0) < 1e-9);
    CHECK(back.yaw == Catch::Approx(e.yaw).margin(1e-9));
    CHECK(back.pitch == Catch::Approx(e.pitch).margin(1e-9));
    CHECK(back.roll == Catch::Approx(e.roll).margin(1e-9));
  }
}

TEST_CASE("euler extraction survives gimbal lock") {
  EulerZYX e;
  e.yaw = 0.4;
  e.pitch = kPi / 2.0;
  e.roll = -0.3;
  const Quat q = quat_from_euler_zyx(e);
  const EulerZYX back = euler_zyx_from_quat(q);
  CHECK(std::isfinite(back.yaw));
  CHECK(std::isfinite(back.pitch));
  CHECK(std::isfinite(back.roll));
  CHECK(std::abs(back.pitch - kPi / 2.0) < 1e-6);
  // The recomposed rotation still matches even though the split between yaw
  // and roll is arbitrary at the singularity.
  const Quat q2 = quat_from_euler_zyx(back);
  CHECK(std::abs(std::abs(q.dot(q2)) - 1.0) < 1e-9);
}

TEST_CASE("quaternion integration matches axis-angle for constant rate") {
  Quat q = Quat::Identity();
  const Vec3 w(0.0, 0.0, 1.3);  // rad/s about z
  const double dt = 1e-3;
  for (int i = 0; i < 1000; ++i) q = integrate_quat(q, w, dt);
  const EulerZYX e = euler_zyx_from_quat(q);
  CHECK(e.yaw == Catch::Approx(1.3).margin(1e-9));
  CHECK(std::abs(q.norm() - 1.0) < 1e-12);
}

TEST_CASE("integrate_quat of zero rate is identity") {
  const Quat q(Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()));
  const Quat r = integrate_quat(q, Vec3::Zero(), 0.01);
  CHECK(std::abs(q.dot(r) - 1.0) < 1e-15);
}

TEST_CASE("planar helpers") {
  const Vec2 v(1.0, 0.0);
  const Vec2 p = planar_perp(v);
  CHECK(p.x() == 0.0);
  CHECK(p.y() == 1.0);  // 90 degrees CCW
  const Eigen::Matrix2d R = planar_rot(kPi / 2.0);
  const Vec2 r = R * v;
  CHECK(r.x() == Catch::Approx(0.0).margin(1e-15));
  CHECK(r.y() == Catch::Approx(1.0));
}

TEST_CASE("skew matrix reproduces the cross product") {
  const Vec3 a(0.3, -1.2, 2.0), b(-0.7, 0.4, 1.1);
  CHECK((skew(a) * b - a.cross(b)).norm() < 1e-15);
}
