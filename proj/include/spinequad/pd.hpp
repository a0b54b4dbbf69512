#pragma once

#include <array>
#include <cstddef>

#include "spinequad/errors.hpp"
#include "spinequad/geometry.hpp"

namespace spinequad {

// Joint-space PD torque with saturation:
//   tau = clamp(kp*(q_target - q) - kd*qd, -tau_max, +tau_max).
inline double pd_torque_single(double q_target, double q, double qd, double kp,
                               double kd, double tau_max) {
  if (kp < 0.0 || kd < 0.0)
    throw ArgumentError("pd_torque: gains must be >= 0");
  return clamp(kp * (q_target - q) - kd * qd, -tau_max, tau_max);
}

template <std::size_t N>
std::array<double, N> pd_torque(const std::array<double, N>& q_target,
                                const std::array<double, N>& q,
                                const std::array<double, N>& qd, double kp,
                                double kd,
                                const std::array<double, N>& tau_max) {
  std::array<double, N> tau{};
  for (std::size_t i = 0; i < N; ++i)
    tau[i] = pd_torque_single(q_target[i], q[i], qd[i], kp, kd, tau_max[i]);
  return tau;
}

// Default servo gains, per physical joint. Chosen for roughly critical
// damping of the shipped link masses; fully configurable.
struct PdGains {
  double kp_leg = 60.0;
  double kd_leg = 1.5;
  double kp_spine = 80.0;
  double kd_spine = 2.0;
};

}  // namespace spinequad
