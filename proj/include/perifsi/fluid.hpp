#ifndef PERIFSI_FLUID_HPP
#define PERIFSI_FLUID_HPP

#include <functional>
#include <utility>
#include <vector>

#include "perifsi/bspline.hpp"
#include "perifsi/common.hpp"
#include "perifsi/parallel.hpp"

namespace perifsi {

// Calorically perfect gas.
struct GasParams {
  double mu = 1.81e-5;       // dynamic viscosity, kg/(m s)
  double prandtl = 0.72;
  double gamma = 1.4;
  double R = 287.05;         // specific gas constant, J/(kg K)

  bool operator==(const GasParams&) const = default;

  double cp() const { return gamma * R / (gamma - 1.0); }
  double cv() const { return R / (gamma - 1.0); }
  void validate() const;
};

// State at a point in pressure-primitive form Y = (p, v1, v2, T).
using GradY = Eigen::Matrix<double, 4, 2>;  // column i = dY/dx_i

struct EulerJacobians {
  Mat4 A0;                  // dU/dY, U = (rho, rho v, rho e_tot)
  std::array<Mat4, 2> adv;  // d(v_i U)/dY
};

struct FluxSet {
  std::array<Vec4, 2> pressure;  // p in momentum row i, p v_i in energy row
  std::array<Vec4, 2> viscous;   // Newtonian stress + Fourier heat flux
};

// Stabilization constants and the per-equation scales used to normalize the
// discontinuity-capturing operator.
struct StabConfig {
  double c_i = 36.0;
  double c_dc = 0.5;
  Vec4 y_ref = Vec4::Ones();

  bool operator==(const StabConfig& o) const {
    return c_i == o.c_i && c_dc == o.c_dc &&
           (y_ref.array() == o.y_ref.array()).all();
  }
};

Vec4 conservation_from_primitive(const Vec4& y, const GasParams& gas);
EulerJacobians euler_jacobians(const Vec4& y, const GasParams& gas);
FluxSet fluxes(const Vec4& y, const GradY& grad, const GasParams& gas);

// Strong-form residual with first derivatives only (viscous second-derivative
// terms dropped): A0 Ydot + A_i Y,i + div F^p - source.
Vec4 strong_residual(const Vec4& ydot, const Vec4& y, const GradY& grad,
                     const GasParams& gas, const Vec4& source);

double supg_tau(const Vec4& y, const Mat2& metric, double dt,
                const GasParams& gas, double c_i);

// Capped at the explicit-diffusion stability limit for the given time step.
double dc_viscosity(const Vec4& res, const GradY& grad, const Vec4& y,
                    const Mat2& metric, const GasParams& gas,
                    const StabConfig& stab, double dt);

// Quadrature rule over the solid region: PD node positions and volumes.
struct PointQuadrature {
  std::vector<Vec2> points;
  std::vector<double> weights;
  std::size_t size() const { return points.size(); }
};

// Control points where a velocity component is strongly constrained to zero
// (no-penetration walls): pairs of (control point, Y component index).
std::vector<std::pair<int, int>> wall_normal_constraints(const BSplinePatch& patch);

using VolumeSource = std::function<Vec4(const Vec2&)>;

// Galerkin + SUPG + DC residual of the compressible-flow forms over the whole
// patch, minus the same forms over the solid region evaluated with PD nodal
// quadrature when `solid_region` is given. The A0 Ydot transient term is NOT
// integrated here: explicit stepping applies it through the block row-sum
// lumped mass (written to `lumped_mass` when non-null: integral of N_A A0
// minus its nodal-quadrature part over the solid region). ydot still feeds
// the pointwise strong residual inside the stabilization terms.
void assemble_fluid_residual(const BSplinePatch& patch, const Field& y,
                             const Field& ydot, const GasParams& gas,
                             const StabConfig& stab, double dt,
                             const PointQuadrature* solid_region,
                             const VolumeSource* source, Field& residual,
                             std::vector<Mat4>* lumped_mass, WorkerPool& pool);

}  // namespace perifsi

#endif
