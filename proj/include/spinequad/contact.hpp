#pragma once

#include <algorithm>
#include <cmath>

#include "spinequad/errors.hpp"
#include "spinequad/geometry.hpp"

namespace spinequad {

// Spring-damper ground model with Coulomb-capped viscous friction.
struct ContactParams {
  double k_n = 1e5;  // N/m normal stiffness
  double d_n = 300;  // N·s/m normal damping
  double d_t = 300;  // N·s/m tangential viscous coefficient (pre-cap)
  double mu = 0.8;   // friction coefficient
};

inline void validate_contact_params(const ContactParams& p) {
  if (!(p.k_n > 0.0 && p.d_n > 0.0 && p.d_t > 0.0 && p.mu > 0.0))
    throw ValidationError("contact params: all coefficients must be > 0");
  if (!(p.mu <= 1.5))
    throw ValidationError("contact params: mu must be <= 1.5");
}

struct ContactForce {
  double normal = 0.0;      // >= 0, pushes the foot out of the ground
  double tangential = 0.0;  // opposes slip, |F_t| <= mu * normal
};

// penetration > 0 means the point is below the surface; normal_velocity is
// the point's upward velocity (separation rate); tangential_velocity its
// along-surface slip. The normal force is unilateral: damping can reduce it
// on separation but never makes it adhesive.
inline ContactForce ground_contact_force(double penetration,
                                         double normal_velocity,
                                         double tangential_velocity,
                                         const ContactParams& p) {
  ContactForce f;
  if (penetration <= 0.0) return f;
  f.normal = std::max(0.0, p.k_n * penetration - p.d_n * normal_velocity);
  const double cap = p.mu * f.normal;
  f.tangential = clamp(-p.d_t * tangential_velocity, -cap, cap);
  return f;
}

}  // namespace spinequad
