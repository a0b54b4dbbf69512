#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>

namespace spinequad {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kGravity = 9.81;  // m/s^2

template <typename T>
T clamp(T x, T lo, T hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Euler angles, intrinsic Z-Y-X: R = Rz(yaw) * Ry(pitch) * Rx(roll).
// This is the convention used everywhere in the repo, both for the base
// orientation readouts and for the serial spine joint (yaw, then pitch,
// then roll, front to rear).
struct EulerZYX {
  double roll = 0.0;   // about x, applied last
  double pitch = 0.0;  // about y
  double yaw = 0.0;    // about z, applied first
};

inline Quat quat_from_euler_zyx(const EulerZYX& e) {
  return Quat(Eigen::AngleAxisd(e.yaw, Vec3::UnitZ()) *
              Eigen::AngleAxisd(e.pitch, Vec3::UnitY()) *
              Eigen::AngleAxisd(e.roll, Vec3::UnitX()));
}

inline EulerZYX euler_zyx_from_matrix(const Mat3& R) {
  EulerZYX e;
  const double sp = clamp(-R(2, 0), -1.0, 1.0);
  e.pitch = std::asin(sp);
  if (std::abs(sp) > 1.0 - 1e-12) {
    // Gimbal lock: yaw/roll degenerate; put everything in yaw.
    e.roll = 0.0;
    e.yaw = std::atan2(-R(0, 1), R(1, 1));
  } else {
    e.yaw = std::atan2(R(1, 0), R(0, 0));
    e.roll = std::atan2(R(2, 1), R(2, 2));
  }
  return e;
}

inline EulerZYX euler_zyx_from_quat(const Quat& q) {
  return euler_zyx_from_matrix(q.toRotationMatrix());
}

// Quaternion exponential-map step: rotate q by world-frame angular velocity
// w over dt. Exact for constant w.
inline Quat integrate_quat(const Quat& q, const Vec3& w_world, double dt) {
  const double angle = w_world.norm() * dt;
  if (angle < 1e-14) return q;
  const Vec3 axis = w_world.normalized();
  Quat dq(Eigen::AngleAxisd(angle, axis));
  return (dq * q).normalized();
}

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// 2D rotation in the sagittal x-z plane; positive angle tilts the +x axis
// toward +z (nose up).
inline Eigen::Matrix2d planar_rot(double a) {
  Eigen::Matrix2d R;
  R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return R;
}

// Derivative of planar_rot(a) wrt a, times a vector: perp operator.
inline Vec2 planar_perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }

}  // namespace spinequad
