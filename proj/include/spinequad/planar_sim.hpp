#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "spinequad/contact.hpp"
#include "spinequad/errors.hpp"
#include "spinequad/geometry.hpp"
#include "spinequad/pd.hpp"
#include "spinequad/robot.hpp"

namespace spinequad {

// Sagittal-plane model of the spined quadruped: front and rear trunk
// segments joined by the spine pitch joint, one thigh+calf leg per trunk
// standing in for the left/right pair (masses, gains and torque limits
// doubled accordingly). Minimal coordinates:
//
//   q = [x, z, tilt, spine, f_thigh, f_calf, r_thigh, r_calf]
//
// (x, z) is the spine joint position, `tilt` the front trunk angle (CCW,
// nose-up positive). The rear trunk angle is tilt - spine, so positive
// spine = nose and tail up = dorsal extension, matching the 3D convention.
// Thigh angle 0 hangs the leg straight down from its trunk; positive swings
// it forward.

inline constexpr int kPlanarDof = 8;

enum PlanarCoord : int {
  kPlanarX = 0,
  kPlanarZ,
  kPlanarTilt,
  kPlanarSpine,
  kPlanarFThigh,
  kPlanarFCalf,
  kPlanarRThigh,
  kPlanarRCalf,
};

using PlanarVec = Eigen::Matrix<double, kPlanarDof, 1>;
using PlanarTargets = Eigen::Matrix<double, 5, 1>;  // spine, ft, fc, rt, rc

struct PlanarState {
  double t = 0.0;
  PlanarVec q = PlanarVec::Zero();
  PlanarVec qd = PlanarVec::Zero();
  std::array<bool, 2> foot_contact{false, false};  // front, rear
  // Tangential stiction anchors (ground x per foot); NaN while airborne.
  // Purely viscous friction would let planted feet creep sideways under any
  // sustained load, so standing poses would slowly splay and tip over.
  std::array<double, 2> foot_anchor{
      std::numeric_limits<double>::quiet_NaN(),
      std::numeric_limits<double>::quiet_NaN()};
};

namespace planar_detail {

inline constexpr int kNumLinks = 6;  // trunks + 2 thighs + 2 calves
inline constexpr int kNumPivots = 5;  // spine, f_hip, f_knee, r_hip, r_knee

enum Link : int { kLinkFTrunk = 0, kLinkRTrunk, kLinkFThighL, kLinkFCalfL,
                  kLinkRThighL, kLinkRCalfL };
enum Pivot : int { kPivotSpine = 0, kPivotFHip, kPivotFKnee, kPivotRHip,
                   kPivotRKnee };

// Which revolute coordinates rotate a given point, about which pivot, with
// which sign. Built per configuration in kinematics().
struct RevoluteInfluence {
  int coord;
  int pivot;
  double sign;
};

struct Kinematics {
  std::array<Vec2, kNumLinks> com;
  std::array<double, kNumLinks> angle;
  std::array<Vec2, kNumPivots> pivot;
  Vec2 foot_front, foot_rear;

  // Jacobians: columns indexed by generalized coordinate.
  std::array<Eigen::Matrix<double, 2, kPlanarDof>, kNumLinks> jac_com;
  std::array<Eigen::Matrix<double, 1, kPlanarDof>, kNumLinks> jac_ang;
  std::array<Eigen::Matrix<double, 2, kPlanarDof>, kNumPivots> jac_pivot;
  Eigen::Matrix<double, 2, kPlanarDof> jac_foot_front, jac_foot_rear;
};

}  // namespace planar_detail

struct PlanarSimConfig {
  ContactParams contact;
  PdGains gains;  // per physical joint; pair joints are doubled internally
  double ground_z = 0.0;
  double divergence_limit = 1e6;
  double k_tangent = 1e4;  // N/m stiction spring toward the contact anchor
};

class PlanarSim {
 public:
  explicit PlanarSim(const RobotSpec& spec, const PlanarSimConfig& cfg = {})
      : spec_(spec), cfg_(cfg) {
    validate_spec(spec);
    validate_contact_params(cfg.contact);
    half_body_ = spec.body_length / 2.0;
    l_thigh_ = spec.leg_length / 2.0;
    l_calf_ = spec.leg_length / 2.0;

    const double m_total = spec.total_mass;
    mass_[planar_detail::kLinkFTrunk] = spec.mass_split.front_body * m_total;
    mass_[planar_detail::kLinkRTrunk] = spec.mass_split.rear_body * m_total;
    // One planar leg aggregates the left/right pair.
    const double m_leg_pair = spec.mass_split.legs * m_total / 2.0;
    const double m_thigh = m_leg_pair * spec.mass_split.thigh_share;
    const double m_calf = m_leg_pair * (1.0 - spec.mass_split.thigh_share);
    mass_[planar_detail::kLinkFThighL] = m_thigh;
    mass_[planar_detail::kLinkFCalfL] = m_calf;
    mass_[planar_detail::kLinkRThighL] = m_thigh;
    mass_[planar_detail::kLinkRCalfL] = m_calf;

    // Slender-rod inertia about each link's COM.
    auto rod = [](double m, double l) { return m * l * l / 12.0; };
    inertia_[planar_detail::kLinkFTrunk] =
        rod(mass_[planar_detail::kLinkFTrunk], half_body_);
    inertia_[planar_detail::kLinkRTrunk] =
        rod(mass_[planar_detail::kLinkRTrunk], half_body_);
    inertia_[planar_detail::kLinkFThighL] = rod(m_thigh, l_thigh_);
    inertia_[planar_detail::kLinkFCalfL] = rod(m_calf, l_calf_);
    inertia_[planar_detail::kLinkRThighL] = rod(m_thigh, l_thigh_);
    inertia_[planar_detail::kLinkRCalfL] = rod(m_calf, l_calf_);
  }

  const RobotSpec& spec() const { return spec_; }
  const PlanarSimConfig& config() const { return cfg_; }

  // Default standing configuration: trunks level, legs in the spec's default
  // pose, feet exactly at ground level (plus `penetration` if given, to start
  // pre-loaded near static equilibrium).
  PlanarState make_rest_state(double penetration = 0.0) const {
    PlanarState s;
    s.q[kPlanarX] = 0.0;
    s.q[kPlanarZ] = spec_.standing_height - penetration;
    s.q[kPlanarTilt] = 0.0;
    s.q[kPlanarSpine] = spec_.default_pose[kSpinePitch];
    s.q[kPlanarFThigh] = spec_.default_pose[kLFThigh];
    s.q[kPlanarFCalf] = spec_.default_pose[kLFCalf];
    s.q[kPlanarRThigh] = spec_.default_pose[kLHThigh];
    s.q[kPlanarRCalf] = spec_.default_pose[kLHCalf];
    return s;
  }

  PlanarTargets default_targets() const {
    PlanarTargets t;
    t << spec_.default_pose[kSpinePitch], spec_.default_pose[kLFThigh],
        spec_.default_pose[kLFCalf], spec_.default_pose[kLHThigh],
        spec_.default_pose[kLHCalf];
    return t;
  }

  // One physics substep of `dt` under PD position control toward `targets`.
  // Semi-implicit Euler; joint limits enforced by clamping after the
  // position update. Throws SimulationDivergedError if the state blows up.
  PlanarState step(const PlanarState& state, const PlanarTargets& targets,
                   double dt) const {
    if (!(dt > 0.0)) throw ArgumentError("planar step: dt must be > 0");
    using namespace planar_detail;
    const Kinematics k = kinematics(state.q);

    // Mass matrix and gravity from the composite Jacobians.
    Eigen::Matrix<double, kPlanarDof, kPlanarDof> M;
    M.setZero();
    PlanarVec Q = PlanarVec::Zero();
    for (int i = 0; i < kNumLinks; ++i) {
      M.noalias() += mass_[i] * k.jac_com[i].transpose() * k.jac_com[i];
      M.noalias() += inertia_[i] * k.jac_ang[i].transpose() * k.jac_ang[i];
      Q.noalias() += k.jac_com[i].transpose() *
                     Vec2(0.0, -mass_[i] * kGravity);
    }

    // Velocity-product (Coriolis/centrifugal) bias. For planar revolute
    // columns d/dt dc/dq_k = sign * perp(c_dot - w_dot_k); translation
    // columns are constant and angular rows have constant Jacobians, so the
    // only bias is the linear one.
    std::array<Vec2, kNumLinks> com_vel;
    for (int i = 0; i < kNumLinks; ++i)
      com_vel[i] = k.jac_com[i] * state.qd;
    std::array<Vec2, kNumPivots> pivot_vel;
    for (int p = 0; p < kNumPivots; ++p)
      pivot_vel[p] = k.jac_pivot[p] * state.qd;
    PlanarVec bias = PlanarVec::Zero();
    for (int i = 0; i < kNumLinks; ++i) {
      Vec2 a = Vec2::Zero();
      for (const auto& inf : influences(i))
        a += state.qd[inf.coord] * inf.sign *
             planar_perp(com_vel[i] - pivot_vel[inf.pivot]);
      bias.noalias() += mass_[i] * k.jac_com[i].transpose() * a;
    }

    // Actuation: PD per actuated coordinate. Pair joints carry two physical
    // actuators, so gains and torque caps double.
    const auto tau = actuation_torques(state, targets);
    for (int a = 0; a < 5; ++a) Q[kPlanarSpine + a] += tau[a];

    // Ground contacts at the two feet: compliant normal plus Coulomb-capped
    // tangential force. The tangential demand is an anchored spring-damper
    // (stiction), not pure viscosity — viscous-only friction lets planted
    // feet creep under sustained load until the stance splays and the robot
    // tips. When the demand exceeds the friction cone the anchor slips so
    // the spring relaxes exactly to the cap (kinetic regime).
    std::array<bool, 2> in_contact{false, false};
    std::array<double, 2> anchors = state.foot_anchor;
    auto add_contact = [&](int which, const Vec2& foot,
                           const Eigen::Matrix<double, 2, kPlanarDof>& jf) {
      const double pen = cfg_.ground_z - foot.y();
      double& anchor = anchors[which];
      if (pen <= 0.0) {
        anchor = std::numeric_limits<double>::quiet_NaN();
        return;
      }
      const Vec2 v = jf * state.qd;
      const ContactForce base_f =
          ground_contact_force(pen, v.y(), v.x(), cfg_.contact);
      if (base_f.normal <= 0.0) {
        anchor = std::numeric_limits<double>::quiet_NaN();
        return;
      }
      if (std::isnan(anchor)) anchor = foot.x();
      const double cap = cfg_.contact.mu * base_f.normal;
      const double ft =
          clamp(cfg_.k_tangent * (anchor - foot.x()) - cfg_.contact.d_t * v.x(),
                -cap, cap);
      anchor = foot.x() + (ft + cfg_.contact.d_t * v.x()) / cfg_.k_tangent;
      Q.noalias() += jf.transpose() * Vec2(ft, base_f.normal);
      in_contact[which] = true;
    };
    add_contact(0, k.foot_front, k.jac_foot_front);
    add_contact(1, k.foot_rear, k.jac_foot_rear);

    // Solve M qdd = Q - bias with one iterative-refinement pass to keep the
    // momentum identities tight.
    Eigen::LDLT<Eigen::Matrix<double, kPlanarDof, kPlanarDof>> ldlt(M);
    const PlanarVec rhs = Q - bias;
    PlanarVec qdd = ldlt.solve(rhs);
    qdd += ldlt.solve(rhs - M * qdd);

    PlanarState next = state;
    next.t = state.t + dt;
    next.qd = state.qd + qdd * dt;
    next.q = state.q + next.qd * dt;
    clamp_limits(next);
    next.foot_contact = in_contact;
    next.foot_anchor = anchors;

    if (!next.q.allFinite() || !next.qd.allFinite() ||
        next.q.cwiseAbs().maxCoeff() > cfg_.divergence_limit ||
        next.qd.cwiseAbs().maxCoeff() > cfg_.divergence_limit)
      throw SimulationDivergedError("planar sim diverged", state.t);
    return next;
  }

  // One control step: spec().sim_substeps physics substeps at physics_dt.
  PlanarState control_step(const PlanarState& state,
                           const PlanarTargets& targets) const {
    PlanarState s = state;
    const double h = spec_.physics_dt();
    for (int i = 0; i < spec_.sim_substeps; ++i) s = step(s, targets, h);
    return s;
  }

  // Runs with holding targets until velocities die down; used to find the
  // static standing equilibrium under gravity, PD and contact compliance.
  PlanarState settle(PlanarState state, const PlanarTargets& targets,
                     double duration = 3.0, double dt = 1e-3) const {
    const int n = static_cast<int>(std::llround(duration / dt));
    for (int i = 0; i < n; ++i) state = step(state, targets, dt);
    return state;
  }

  // Kinetic + potential energy; for passive no-contact motion this should be
  // conserved up to integrator drift.
  double total_energy(const PlanarState& state) const {
    using namespace planar_detail;
    const Kinematics k = kinematics(state.q);
    double e = 0.0;
    for (int i = 0; i < kNumLinks; ++i) {
      const Vec2 v = k.jac_com[i] * state.qd;
      const double w = k.jac_ang[i] * state.qd;
      e += 0.5 * mass_[i] * v.squaredNorm() + 0.5 * inertia_[i] * w * w;
      e += mass_[i] * kGravity * k.com[i].y();
    }
    return e;
  }

  Vec2 com_position(const PlanarState& state) const {
    using namespace planar_detail;
    const Kinematics k = kinematics(state.q);
    Vec2 c = Vec2::Zero();
    for (int i = 0; i < kNumLinks; ++i) c += mass_[i] * k.com[i];
    return c / spec_.total_mass;
  }

  Vec2 com_velocity(const PlanarState& state) const {
    using namespace planar_detail;
    const Kinematics k = kinematics(state.q);
    Vec2 v = Vec2::Zero();
    for (int i = 0; i < kNumLinks; ++i)
      v += mass_[i] * (k.jac_com[i] * state.qd);
    return v / spec_.total_mass;
  }

  Vec2 front_foot_position(const PlanarState& state) const {
    return kinematics(state.q).foot_front;
  }
  Vec2 rear_foot_position(const PlanarState& state) const {
    return kinematics(state.q).foot_rear;
  }

  // Maps the planar state onto the shared 15-joint convention: left/right
  // joints mirror the single planar leg, hips and the spine yaw/roll stay
  // zero, the base frame is the front trunk.
  RobotState to_robot_state(const PlanarState& s) const {
    using namespace planar_detail;
    const Kinematics k = kinematics(s.q);
    RobotState r;
    r.t = s.t;
    r.q[kLFThigh] = r.q[kRFThigh] = s.q[kPlanarFThigh];
    r.q[kLFCalf] = r.q[kRFCalf] = s.q[kPlanarFCalf];
    r.q[kLHThigh] = r.q[kRHThigh] = s.q[kPlanarRThigh];
    r.q[kLHCalf] = r.q[kRHCalf] = s.q[kPlanarRCalf];
    r.q[kSpinePitch] = s.q[kPlanarSpine];
    r.qd[kLFThigh] = r.qd[kRFThigh] = s.qd[kPlanarFThigh];
    r.qd[kLFCalf] = r.qd[kRFCalf] = s.qd[kPlanarFCalf];
    r.qd[kLHThigh] = r.qd[kRHThigh] = s.qd[kPlanarRThigh];
    r.qd[kLHCalf] = r.qd[kRHCalf] = s.qd[kPlanarRCalf];
    r.qd[kSpinePitch] = s.qd[kPlanarSpine];

    const Vec2 base = k.com[kLinkFTrunk];
    r.base_position = Vec3(base.x(), 0.0, base.y());
    // Planar CCW nose-up tilt is a negative rotation about the 3D y-axis.
    r.base_orientation = Quat(Eigen::AngleAxisd(-s.q[kPlanarTilt], Vec3::UnitY()));
    const Vec2 v_world = k.jac_com[kLinkFTrunk] * s.qd;
    const Vec3 v3(v_world.x(), 0.0, v_world.y());
    r.base_linear_velocity = r.base_orientation.conjugate() * v3;
    r.base_angular_velocity = Vec3(0.0, -s.qd[kPlanarTilt], 0.0);
    r.foot_contact[kFootLF] = r.foot_contact[kFootRF] = s.foot_contact[0];
    r.foot_contact[kFootLH] = r.foot_contact[kFootRH] = s.foot_contact[1];
    return r;
  }

  // Reduces a 15-joint target vector to the 5 planar actuated coordinates by
  // averaging each left/right pair.
  PlanarTargets targets_from_joint_vector(const JointVector& q15) const {
    PlanarTargets t;
    t << q15[kSpinePitch], 0.5 * (q15[kLFThigh] + q15[kRFThigh]),
        0.5 * (q15[kLFCalf] + q15[kRFCalf]),
        0.5 * (q15[kLHThigh] + q15[kRHThigh]),
        0.5 * (q15[kLHCalf] + q15[kRHCalf]);
    return t;
  }

  // PD torques the controller would apply from this state (for logging and
  // torque penalties; step() recomputes them internally).
  std::array<double, 5> control_torques(const PlanarState& s,
                                        const PlanarTargets& targets) const {
    return actuation_torques(s, targets);
  }

 private:
  using Kinematics = planar_detail::Kinematics;
  using RevoluteInfluence = planar_detail::RevoluteInfluence;

  // PD torques for [spine, f_thigh, f_calf, r_thigh, r_calf]; leg entries
  // double the per-joint gain and cap because the planar joint stands in for
  // the left/right pair.
  std::array<double, 5> actuation_torques(const PlanarState& s,
                                          const PlanarTargets& targets) const {
    std::array<double, 5> tau{};
    const double cap_spine = spec_.torque_limit[kSpinePitch];
    const double cap_leg = 2.0 * spec_.torque_limit[kLFThigh];
    tau[0] = pd_torque_single(targets[0], s.q[kPlanarSpine],
                              s.qd[kPlanarSpine], cfg_.gains.kp_spine,
                              cfg_.gains.kd_spine, cap_spine);
    const double kp = 2.0 * cfg_.gains.kp_leg;
    const double kd = 2.0 * cfg_.gains.kd_leg;
    for (int a = 1; a < 5; ++a)
      tau[a] = pd_torque_single(targets[a], s.q[kPlanarSpine + a],
                                s.qd[kPlanarSpine + a], kp, kd, cap_leg);
    return tau;
  }

  void clamp_limits(PlanarState& s) const {
    auto apply = [&](int coord, double lo, double hi) {
      if (s.q[coord] < lo) {
        s.q[coord] = lo;
        if (s.qd[coord] < 0.0) s.qd[coord] = 0.0;
      } else if (s.q[coord] > hi) {
        s.q[coord] = hi;
        if (s.qd[coord] > 0.0) s.qd[coord] = 0.0;
      }
    };
    apply(kPlanarSpine, spec_.joint_lower[kSpinePitch],
          spec_.joint_upper[kSpinePitch]);
    apply(kPlanarFThigh, spec_.joint_lower[kLFThigh],
          spec_.joint_upper[kLFThigh]);
    apply(kPlanarFCalf, spec_.joint_lower[kLFCalf],
          spec_.joint_upper[kLFCalf]);
    apply(kPlanarRThigh, spec_.joint_lower[kLHThigh],
          spec_.joint_upper[kLHThigh]);
    apply(kPlanarRCalf, spec_.joint_lower[kLHCalf],
          spec_.joint_upper[kLHCalf]);
  }

  // Revolute coordinates that move each link: (coordinate, pivot, sign).
  // tilt rotates everything about the spine point; spine rotates the rear
  // chain with sign -1 (rear trunk angle = tilt - spine).
  const std::array<RevoluteInfluence, 4>& influences_storage(int link) const {
    using namespace planar_detail;
    static const std::array<std::array<RevoluteInfluence, 4>, kNumLinks> table =
        [] {
          std::array<std::array<RevoluteInfluence, 4>, kNumLinks> t{};
          auto pad = RevoluteInfluence{-1, 0, 0.0};
          t[kLinkFTrunk] = {RevoluteInfluence{kPlanarTilt, kPivotSpine, 1.0},
                            pad, pad, pad};
          t[kLinkRTrunk] = {RevoluteInfluence{kPlanarTilt, kPivotSpine, 1.0},
                            RevoluteInfluence{kPlanarSpine, kPivotSpine, -1.0},
                            pad, pad};
          t[kLinkFThighL] = {RevoluteInfluence{kPlanarTilt, kPivotSpine, 1.0},
                             RevoluteInfluence{kPlanarFThigh, kPivotFHip, 1.0},
                             pad, pad};
          t[kLinkFCalfL] = {RevoluteInfluence{kPlanarTilt, kPivotSpine, 1.0},
                            RevoluteInfluence{kPlanarFThigh, kPivotFHip, 1.0},
                            RevoluteInfluence{kPlanarFCalf, kPivotFKnee, 1.0},
                            pad};
          t[kLinkRThighL] = {RevoluteInfluence{kPlanarTilt, kPivotSpine, 1.0},
                             RevoluteInfluence{kPlanarSpine, kPivotSpine, -1.0},
                             RevoluteInfluence{kPlanarRThigh, kPivotRHip, 1.0},
                             pad};
          t[kLinkRCalfL] = {RevoluteInfluence{kPlanarTilt, kPivotSpine, 1.0},
                            RevoluteInfluence{kPlanarSpine, kPivotSpine, -1.0},
                            RevoluteInfluence{kPlanarRThigh, kPivotRHip, 1.0},
                            RevoluteInfluence{kPlanarRCalf, kPivotRKnee, 1.0}};
          return t;
        }();
    return table[link];
  }

  // View over the valid entries of the padded influence table.
  std::vector<RevoluteInfluence> influences(int link) const {
    std::vector<RevoluteInfluence> out;
    for (const auto& inf : influences_storage(link))
      if (inf.coord >= 0) out.push_back(inf);
    return out;
  }

  Kinematics kinematics(const PlanarVec& q) const {
    using namespace planar_detail;
    Kinematics k;
    const Vec2 base(q[kPlanarX], q[kPlanarZ]);
    const double tilt = q[kPlanarTilt];
    const double rear_tilt = tilt - q[kPlanarSpine];
    auto unit = [](double a) { return Vec2(std::cos(a), std::sin(a)); };

    k.pivot[kPivotSpine] = base;
    const Vec2 u_f = unit(tilt);
    const Vec2 u_r = unit(rear_tilt);
    k.com[kLinkFTrunk] = base + 0.5 * half_body_ * u_f;
    k.angle[kLinkFTrunk] = tilt;
    k.com[kLinkRTrunk] = base - 0.5 * half_body_ * u_r;
    k.angle[kLinkRTrunk] = rear_tilt;
    k.pivot[kPivotFHip] = base + half_body_ * u_f;
    k.pivot[kPivotRHip] = base - half_body_ * u_r;

    const double a_ft = tilt - kPi / 2.0 + q[kPlanarFThigh];
    const double a_fc = a_ft + q[kPlanarFCalf];
    const double a_rt = rear_tilt - kPi / 2.0 + q[kPlanarRThigh];
    const double a_rc = a_rt + q[kPlanarRCalf];
    k.com[kLinkFThighL] = k.pivot[kPivotFHip] + 0.5 * l_thigh_ * unit(a_ft);
    k.angle[kLinkFThighL] = a_ft;
    k.pivot[kPivotFKnee] = k.pivot[kPivotFHip] + l_thigh_ * unit(a_ft);
    k.com[kLinkFCalfL] = k.pivot[kPivotFKnee] + 0.5 * l_calf_ * unit(a_fc);
    k.angle[kLinkFCalfL] = a_fc;
    k.foot_front = k.pivot[kPivotFKnee] + l_calf_ * unit(a_fc);

    k.com[kLinkRThighL] = k.pivot[kPivotRHip] + 0.5 * l_thigh_ * unit(a_rt);
    k.angle[kLinkRThighL] = a_rt;
    k.pivot[kPivotRKnee] = k.pivot[kPivotRHip] + l_thigh_ * unit(a_rt);
    k.com[kLinkRCalfL] = k.pivot[kPivotRKnee] + 0.5 * l_calf_ * unit(a_rc);
    k.angle[kLinkRCalfL] = a_rc;
    k.foot_rear = k.pivot[kPivotRKnee] + l_calf_ * unit(a_rc);

    // Angular Jacobian rows: link angles are +tilt, plus the signed sum of
    // their chain's joint coordinates.
    for (int i = 0; i < kNumLinks; ++i) {
      k.jac_ang[i].setZero();
      for (const auto& inf : influences_storage(i))
        if (inf.coord >= 0) k.jac_ang[i](0, inf.coord) = inf.sign;
    }

    // Point Jacobian builder: translation columns are identity; each
    // revolute influence contributes sign * perp(p - pivot).
    auto point_jac = [&](const Vec2& p, int link) {
      Eigen::Matrix<double, 2, kPlanarDof> J;
      J.setZero();
      J(0, kPlanarX) = 1.0;
      J(1, kPlanarZ) = 1.0;
      for (const auto& inf : influences_storage(link)) {
        if (inf.coord < 0) continue;
        const Vec2 col = inf.sign * planar_perp(p - k.pivot[inf.pivot]);
        J(0, inf.coord) += col.x();
        J(1, inf.coord) += col.y();
      }
      return J;
    };

    for (int i = 0; i < kNumLinks; ++i) k.jac_com[i] = point_jac(k.com[i], i);
    k.jac_pivot[kPivotSpine] = point_jac(base, kLinkFTrunk);
    // The spine pivot moves only with translation (it IS the base point);
    // rebuild without the tilt column.
    k.jac_pivot[kPivotSpine].setZero();
    k.jac_pivot[kPivotSpine](0, kPlanarX) = 1.0;
    k.jac_pivot[kPivotSpine](1, kPlanarZ) = 1.0;
    k.jac_pivot[kPivotFHip] = point_jac(k.pivot[kPivotFHip], kLinkFTrunk);
    k.jac_pivot[kPivotRHip] = point_jac(k.pivot[kPivotRHip], kLinkRTrunk);
    k.jac_pivot[kPivotFKnee] = point_jac(k.pivot[kPivotFKnee], kLinkFThighL);
    k.jac_pivot[kPivotRKnee] = point_jac(k.pivot[kPivotRKnee], kLinkRThighL);
    k.jac_foot_front = point_jac(k.foot_front, kLinkFCalfL);
    k.jac_foot_rear = point_jac(k.foot_rear, kLinkRCalfL);
    return k;
  }

  RobotSpec spec_;
  PlanarSimConfig cfg_;
  double half_body_ = 0.0, l_thigh_ = 0.0, l_calf_ = 0.0;
  std::array<double, planar_detail::kNumLinks> mass_{};
  std::array<double, planar_detail::kNumLinks> inertia_{};
};

}  // namespace spinequad
