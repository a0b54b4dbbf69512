#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "spinequad/errors.hpp"
#include "spinequad/geometry.hpp"
#include "spinequad/robot.hpp"

namespace spinequad {

// Free-floating two-body model for aerial reorientation: front and rear
// trunk boxes joined by a spherical spine joint whose yaw/pitch/roll angles
// are driven by internal PD torques. No ground, no legs — leg masses are
// folded into the trunk boxes.
//
// The rotational state is stored as angular MOMENTUM in the world frame, not
// angular velocity: internal forces and torques always enter the two bodies
// as equal-and-opposite increments, so the total angular momentum about the
// system COM is conserved by construction (up to floating-point roundoff),
// no matter how stiff the joint penalty is. That is exactly the property the
// zero-angular-momentum reorientation tests lean on.

struct RigidBodyState {
  Vec3 position = Vec3::Zero();        // COM, world frame
  Quat orientation = Quat::Identity(); // body → world
  Vec3 velocity = Vec3::Zero();        // COM, world frame
  Vec3 angular_momentum = Vec3::Zero(); // about own COM, world frame
};

struct FreeFall3DState {
  double t = 0.0;
  RigidBodyState front, rear;
};

struct FreeFallConfig {
  double kp_spine = 80.0;
  double kd_spine = 2.0;
  // Spherical-joint penalty: spring/damper pinning the two anchor points
  // together. The force acts at the anchors' midpoint on both bodies, which
  // keeps it exactly momentum-neutral.
  double k_joint = 1e6;   // N/m
  double d_joint = 2e3;   // N·s/m
  // Structural joint-range stops (not subject to the motor torque cap).
  // They engage `limit_margin` inside the nominal range, stiff enough that
  // the motor plus any realistic swing momentum cannot carry the joint past
  // the range itself: static crossing is tau_max/k_limit ≈ 1e-3 rad and a
  // full-range powered swing (~150 J) stops within ~0.08 rad of engagement.
  double k_limit = 5e4;     // N·m/rad beyond the engagement point
  double d_limit = 50.0;    // N·m·s/rad
  double limit_margin = 0.15;  // rad inside the range where stops engage
  bool gravity = true;
  double divergence_limit = 1e6;
  // Half-depth of the trunk boxes (z extent); the spec gives no trunk
  // height, this sets the inertia shape.
  double body_height = 0.15;
};

class FreeFallSim {
 public:
  explicit FreeFallSim(const RobotSpec& spec, const FreeFallConfig& cfg = {})
      : spec_(spec), cfg_(cfg) {
    validate_spec(spec);
    const double m_total = spec.total_mass;
    const double m_legs_half = spec.mass_split.legs * m_total / 2.0;
    m_front_ = spec.mass_split.front_body * m_total + m_legs_half;
    m_rear_ = spec.mass_split.rear_body * m_total + m_legs_half;
    joint_arm_ = spec.body_length / 4.0;  // joint to each trunk's COM

    auto box_inertia = [](double m, double lx, double ly, double lz) {
      return Vec3(m / 12.0 * (ly * ly + lz * lz),
                  m / 12.0 * (lx * lx + lz * lz),
                  m / 12.0 * (lx * lx + ly * ly));
    };
    const double lx = spec.body_length / 2.0;
    inertia_front_ = box_inertia(m_front_, lx, spec.body_width, cfg.body_height);
    inertia_rear_ = box_inertia(m_rear_, lx, spec.body_width, cfg.body_height);
  }

  const RobotSpec& spec() const { return spec_; }
  double mass_front() const { return m_front_; }
  double mass_rear() const { return m_rear_; }

  // Both trunks aligned with `base`, spine angles zero, anchors coincident,
  // everything at rest (zero linear and angular momentum), system COM at
  // `com_position`.
  FreeFall3DState make_state(const Quat& base,
                             const Vec3& com_position = Vec3::Zero()) const {
    FreeFall3DState s;
    const Vec3 arm = base * Vec3(joint_arm_, 0.0, 0.0);
    // joint = COM + arm*(m_rear - m_front)/M keeps the mass-weighted mean at
    // com_position.
    const Vec3 joint =
        com_position - arm * ((m_front_ - m_rear_) / (m_front_ + m_rear_));
    s.front.position = joint + arm;
    s.rear.position = joint - arm;
    s.front.orientation = base.normalized();
    s.rear.orientation = base.normalized();
    return s;
  }

  struct JointReadout {
    Vec3 angles = Vec3::Zero();  // yaw, pitch, roll
    Vec3 rates = Vec3::Zero();
    Mat3 axes = Mat3::Identity();  // columns: yaw/pitch/roll axes, front frame
    bool gimbal = false;
  };

  // Decomposes the relative orientation R_front^T * R_rear as intrinsic
  // Z-Y-X (yaw, pitch, roll) and maps the relative angular velocity onto the
  // per-angle rates. Near pitch = ±90° the mapping is singular; rates are
  // reported as zero there and flagged.
  JointReadout joint_readout(const FreeFall3DState& s) const {
    JointReadout out;
    const Mat3 Rf = s.front.orientation.toRotationMatrix();
    const Mat3 Rr = s.rear.orientation.toRotationMatrix();
    const Mat3 Rrel = Rf.transpose() * Rr;
    const EulerZYX e = euler_zyx_from_matrix(Rrel);
    out.angles = Vec3(e.yaw, e.pitch, e.roll);

    // Serial axes in the front-body frame: yaw about z, pitch about the
    // yawed y, roll about the yawed-and-pitched x.
    const Mat3 Rz = Eigen::AngleAxisd(e.yaw, Vec3::UnitZ()).toRotationMatrix();
    const Mat3 Ry = Eigen::AngleAxisd(e.pitch, Vec3::UnitY()).toRotationMatrix();
    out.axes.col(0) = Vec3::UnitZ();
    out.axes.col(1) = Rz * Vec3::UnitY();
    out.axes.col(2) = Rz * Ry * Vec3::UnitX();

    const Vec3 w_f = angular_velocity(s.front, inertia_front_);
    const Vec3 w_r = angular_velocity(s.rear, inertia_rear_);
    const Vec3 w_rel_front = Rf.transpose() * (w_r - w_f);
    const double det = out.axes.determinant();
    if (std::abs(det) < 1e-6) {
      out.gimbal = true;
    } else {
      out.rates = out.axes.inverse() * w_rel_front;
    }
    return out;
  }

  // One semi-implicit step: momenta are updated from forces/torques at the
  // current configuration, then positions and orientations advance with the
  // new velocities. `targets` are spine (yaw, pitch, roll) angle commands,
  // clamped to the joint range before the PD law.
  FreeFall3DState step(const FreeFall3DState& state, const Vec3& targets,
                       double dt) const {
    if (!(dt > 0.0)) throw ArgumentError("freefall step: dt must be > 0");
    const Mat3 Rf = state.front.orientation.toRotationMatrix();
    const Mat3 Rr = state.rear.orientation.toRotationMatrix();
    const Vec3 w_f = angular_velocity(state.front, inertia_front_);
    const Vec3 w_r = angular_velocity(state.rear, inertia_rear_);

    // Spherical joint penalty. Anchors sit a quarter body-length behind the
    // front COM / ahead of the rear COM.
    const Vec3 arm_f = Rf * Vec3(-joint_arm_, 0.0, 0.0);
    const Vec3 arm_r = Rr * Vec3(joint_arm_, 0.0, 0.0);
    const Vec3 a_f = state.front.position + arm_f;
    const Vec3 a_r = state.rear.position + arm_r;
    const Vec3 v_af = state.front.velocity + w_f.cross(arm_f);
    const Vec3 v_ar = state.rear.velocity + w_r.cross(arm_r);
    const Vec3 f_on_rear =
        cfg_.k_joint * (a_f - a_r) + cfg_.d_joint * (v_af - v_ar);
    const Vec3 p_mid = 0.5 * (a_f + a_r);

    // Internal spine torque from the PD law along the serial joint axes,
    // plus structural range stops.
    const JointReadout j = joint_readout(state);
    Vec3 tau_joint = Vec3::Zero();
    const std::array<int, 3> spine_idx{kSpineYaw, kSpinePitch, kSpineRoll};
    for (int i = 0; i < 3; ++i) {
      const double lo = spec_.joint_lower[spine_idx[i]];
      const double hi = spec_.joint_upper[spine_idx[i]];
      const double target = clamp(targets[i], lo, hi);
      const double cap = spec_.torque_limit[spine_idx[i]];
      double tau = clamp(cfg_.kp_spine * (target - j.angles[i]) -
                             cfg_.kd_spine * j.rates[i],
                         -cap, cap);
      const double stop_hi = hi - cfg_.limit_margin;
      const double stop_lo = lo + cfg_.limit_margin;
      if (j.angles[i] > stop_hi)
        tau += cfg_.k_limit * (stop_hi - j.angles[i]) - cfg_.d_limit * j.rates[i];
      else if (j.angles[i] < stop_lo)
        tau += cfg_.k_limit * (stop_lo - j.angles[i]) - cfg_.d_limit * j.rates[i];
      tau_joint[i] = tau;
    }
    // World torque applied to the rear body (reaction on the front).
    const Vec3 tau_world =
        Rf * (j.axes * tau_joint);

    FreeFall3DState next = state;
    next.t = state.t + dt;
    const Vec3 g = cfg_.gravity ? Vec3(0.0, 0.0, -kGravity) : Vec3::Zero();

    next.front.velocity += dt * (g - f_on_rear / m_front_);
    next.rear.velocity += dt * (g + f_on_rear / m_rear_);
    next.front.angular_momentum +=
        dt * ((p_mid - state.front.position).cross(-f_on_rear) - tau_world);
    next.rear.angular_momentum +=
        dt * ((p_mid - state.rear.position).cross(f_on_rear) + tau_world);

    next.front.position += dt * next.front.velocity;
    next.rear.position += dt * next.rear.velocity;
    const Vec3 w_f_new = angular_velocity(next.front, inertia_front_);
    const Vec3 w_r_new = angular_velocity(next.rear, inertia_rear_);
    next.front.orientation =
        integrate_quat(state.front.orientation, w_f_new, dt);
    next.rear.orientation = integrate_quat(state.rear.orientation, w_r_new, dt);

    check_finite(next);
    return next;
  }

  Vec3 system_com(const FreeFall3DState& s) const {
    return (m_front_ * s.front.position + m_rear_ * s.rear.position) /
           (m_front_ + m_rear_);
  }

  Vec3 system_com_velocity(const FreeFall3DState& s) const {
    return (m_front_ * s.front.velocity + m_rear_ * s.rear.velocity) /
           (m_front_ + m_rear_);
  }

  // Total angular momentum about the system COM in the world frame: orbital
  // terms plus the stored spin momenta.
  Vec3 total_angular_momentum(const FreeFall3DState& s) const {
    const Vec3 com = system_com(s);
    Vec3 L = s.front.angular_momentum + s.rear.angular_momentum;
    L += m_front_ * (s.front.position - com).cross(s.front.velocity);
    L += m_rear_ * (s.rear.position - com).cross(s.rear.velocity);
    return L;
  }

  // Characteristic momentum scale: the whole system spinning at 1 rad/s
  // about its COM. Used to express conservation drift relatively.
  double momentum_scale(const FreeFall3DState& s) const {
    const Vec3 com = system_com(s);
    double scale = inertia_front_.maxCoeff() + inertia_rear_.maxCoeff();
    scale += m_front_ * (s.front.position - com).squaredNorm();
    scale += m_rear_ * (s.rear.position - com).squaredNorm();
    return scale;
  }

  EulerZYX base_euler(const FreeFall3DState& s) const {
    return euler_zyx_from_quat(s.front.orientation);
  }

  Vec3 angular_velocity_front(const FreeFall3DState& s) const {
    return angular_velocity(s.front, inertia_front_);
  }
  Vec3 angular_velocity_rear(const FreeFall3DState& s) const {
    return angular_velocity(s.rear, inertia_rear_);
  }

  // Sets the spin momenta so each body has the given world angular velocity.
  void set_angular_velocities(FreeFall3DState& s, const Vec3& w_front,
                              const Vec3& w_rear) const {
    const Mat3 Rf = s.front.orientation.toRotationMatrix();
    const Mat3 Rr = s.rear.orientation.toRotationMatrix();
    s.front.angular_momentum =
        Rf * inertia_front_.asDiagonal() * Rf.transpose() * w_front;
    s.rear.angular_momentum =
        Rr * inertia_rear_.asDiagonal() * Rr.transpose() * w_rear;
  }

 private:
  static Vec3 angular_velocity(const RigidBodyState& b, const Vec3& inertia) {
    const Mat3 R = b.orientation.toRotationMatrix();
    return R * (R.transpose() * b.angular_momentum).cwiseQuotient(inertia);
  }

  void check_finite(const FreeFall3DState& s) const {
    auto bad = [&](const RigidBodyState& b) {
      return !b.position.allFinite() || !b.velocity.allFinite() ||
             !b.angular_momentum.allFinite() ||
             !b.orientation.coeffs().allFinite() ||
             b.position.cwiseAbs().maxCoeff() > cfg_.divergence_limit ||
             b.velocity.cwiseAbs().maxCoeff() > cfg_.divergence_limit;
    };
    if (bad(s.front) || bad(s.rear))
      throw SimulationDivergedError("freefall sim diverged", s.t);
  }

  RobotSpec spec_;
  FreeFallConfig cfg_;
  double m_front_ = 0.0, m_rear_ = 0.0, joint_arm_ = 0.0;
  Vec3 inertia_front_ = Vec3::Ones(), inertia_rear_ = Vec3::Ones();
};

// Cyclic spine trajectory for zero-angular-momentum self-righting: the
// lateral (yaw) and sagittal (pitch) bends trace a rounded-square loop in
// joint space, 90 degrees out of phase. Each circuit of the loop leaves a
// net rotation about the base roll axis — the axis complementary to the two
// bend axes — so repeating it walks the body around its roll axis without
// ever holding angular momentum. `direction` flips the traversal and with
// it the sign of the roll gained per circuit (+1 adds positive roll).
struct SelfRightingCycle {
  double yaw_amp = 0.8;     // rad, lateral bend amplitude
  double pitch_amp = 0.8;   // rad, sagittal bend amplitude
  double period = 0.6;      // s
  double direction = 1.0;   // +1 or -1: loop orientation
  double squareness = 3.0;  // tanh shaping (0 → pure ellipse)
};

inline Vec3 self_righting_targets(double t, const SelfRightingCycle& c) {
  const double phase = 2.0 * kPi * t / c.period;
  auto shape = [&](double u) {
    if (c.squareness <= 0.0) return u;
    return std::tanh(c.squareness * u) / std::tanh(c.squareness);
  };
  const double yaw = c.yaw_amp * shape(std::cos(phase));
  const double pitch = c.pitch_amp * shape(std::sin(phase)) * c.direction;
  return Vec3(yaw, pitch, 0.0);
}

}  // namespace spinequad
