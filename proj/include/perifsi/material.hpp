#ifndef PERIFSI_MATERIAL_HPP
#define PERIFSI_MATERIAL_HPP

#include <limits>

#include "perifsi/common.hpp"

namespace perifsi {

// Plane-strain Cauchy stress stored as the full 3D symmetric tensor; the
// out-of-plane shears are identically zero under 2D kinematics.
struct Stress3 {
  double s11 = 0.0, s22 = 0.0, s33 = 0.0, s12 = 0.0;

  double trace() const { return s11 + s22 + s33; }
  Mat2 in_plane() const {
    Mat2 m;
    m << s11, s12, s12, s22;
    return m;
  }
};

double von_mises(const Stress3& s);

enum class DamageLaw { none, brittle, ductile };

struct MaterialParams {
  double youngs = 200e9;
  double poisson = 0.29;
  double yield_stress = 0.4e9;    // initial yield
  double hardening = 0.1e9;       // linear isotropic hardening modulus
  double density = 7870.0;

  DamageLaw law = DamageLaw::none;
  double critical_stress = std::numeric_limits<double>::infinity();  // brittle
  double eqps_threshold = 0.18;   // ductile: damage onset
  double eqps_critical = 0.2;     // ductile: full failure

  bool operator==(const MaterialParams&) const = default;

  double shear_modulus() const { return youngs / (2.0 * (1.0 + poisson)); }
  double lame_lambda() const {
    return youngs * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
  }
  void validate() const;
};

// Hypoelastic J2 update with isotropic hardening: incrementally objective
// Jaumann rotation, elastic trial, radial return. Returns the equivalent
// plastic strain increment (>= 0).
double stress_update(Stress3& stress, double& eqps, const Mat2& velocity_gradient,
                     double dt, const MaterialParams& mat);

// Bond constitutive state: stress history, plastic strain, damage.
struct BondState {
  Stress3 stress;
  double eqps = 0.0;
  double damage = 0.0;    // D in [0, 1], non-decreasing
  double omega_d = 1.0;   // damage factor of the influence state, 1 - intact
};

void damage_update_brittle(BondState& b, double critical_stress);
void damage_update_ductile(BondState& b, double eqps_threshold, double eqps_critical);

}  // namespace perifsi

#endif
