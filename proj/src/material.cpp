#include "perifsi/material.hpp"

#include <algorithm>
#include <cmath>

namespace perifsi {

void MaterialParams::validate() const {
  if (youngs <= 0.0) throw Error(ErrorKind::config, "Young's modulus must be positive");
  if (poisson <= -1.0 || poisson >= 0.5)
    throw Error(ErrorKind::config, "Poisson ratio must lie in (-1, 0.5)");
  if (yield_stress <= 0.0) throw Error(ErrorKind::config, "yield stress must be positive");
  if (hardening < 0.0) throw Error(ErrorKind::config, "hardening modulus must be >= 0");
  if (density <= 0.0) throw Error(ErrorKind::config, "density must be positive");
  if (law == DamageLaw::ductile && eqps_threshold >= eqps_critical)
    throw Error(ErrorKind::config, "ductile damage requires eqps_threshold < eqps_critical");
  if (law == DamageLaw::brittle && critical_stress <= 0.0)
    throw Error(ErrorKind::config, "brittle damage requires positive critical stress");
}

double von_mises(const Stress3& s) {
  const double m = s.trace() / 3.0;
  const double d11 = s.s11 - m, d22 = s.s22 - m, d33 = s.s33 - m;
  return std::sqrt(1.5 * (d11 * d11 + d22 * d22 + d33 * d33 + 2.0 * s.s12 * s.s12));
}

double stress_update(Stress3& stress, double& eqps, const Mat2& L, double dt,
                     const MaterialParams& mat) {
  // Incremental Jaumann rotation: orthogonal in-plane rotation by the spin
  // angle keeps eigenvalues exact under rigid motion. s33 is an in-plane
  // rotation invariant.
  const double spin = 0.5 * (L(1, 0) - L(0, 1));
  const double theta = spin * dt;
  if (theta != 0.0) {
    const double c = std::cos(theta), s = std::sin(theta);
    const double s11 = stress.s11, s22 = stress.s22, s12 = stress.s12;
    stress.s11 = c * c * s11 - 2.0 * c * s * s12 + s * s * s22;
    stress.s22 = s * s * s11 + 2.0 * c * s * s12 + c * c * s22;
    stress.s12 = c * s * (s11 - s22) + (c * c - s * s) * s12;
  }

  // Elastic trial increment, plane strain (e33 = 0).
  const double e11 = L(0, 0) * dt;
  const double e22 = L(1, 1) * dt;
  const double e12 = 0.5 * (L(0, 1) + L(1, 0)) * dt;
  const double lam = mat.lame_lambda();
  const double g = mat.shear_modulus();
  const double bulk_term = lam * (e11 + e22);
  stress.s11 += bulk_term + 2.0 * g * e11;
  stress.s22 += bulk_term + 2.0 * g * e22;
  stress.s33 += bulk_term;
  stress.s12 += 2.0 * g * e12;

  const double vm_trial = von_mises(stress);
  const double yield = mat.yield_stress + mat.hardening * eqps;
  if (vm_trial <= yield) return 0.0;

  // Radial return to the hardened surface.
  const double d_eqps = (vm_trial - yield) / (3.0 * g + mat.hardening);
  const double vm_new = yield + mat.hardening * d_eqps;
  const double scale = vm_new / vm_trial;
  const double m = stress.trace() / 3.0;
  stress.s11 = m + scale * (stress.s11 - m);
  stress.s22 = m + scale * (stress.s22 - m);
  stress.s33 = m + scale * (stress.s33 - m);
  stress.s12 *= scale;
  eqps += d_eqps;
  return d_eqps;
}

void damage_update_brittle(BondState& b, double critical_stress) {
  if (b.damage >= 1.0) {
    b.damage = 1.0;
    b.omega_d = 0.0;
    return;
  }
  if (von_mises(b.stress) > critical_stress) {
    b.damage = 1.0;
    b.omega_d = 0.0;
  }
}

void damage_update_ductile(BondState& b, double eqps_threshold, double eqps_critical) {
  double d;
  if (b.eqps <= eqps_threshold)
    d = 0.0;
  else if (b.eqps >= eqps_critical)
    d = 1.0;
  else
    d = (b.eqps - eqps_threshold) / (eqps_critical - eqps_threshold);
  b.damage = std::max(b.damage, d);
  b.omega_d = 1.0 - b.damage;
}

}  // namespace perifsi
