#ifndef PERIFSI_COUPLING_HPP
#define PERIFSI_COUPLING_HPP

#include <vector>

#include "perifsi/bspline.hpp"
#include "perifsi/common.hpp"
#include "perifsi/fluid.hpp"
#include "perifsi/parallel.hpp"
#include "perifsi/pd.hpp"

namespace perifsi {

// Sparse evaluation matrix N_A(x_P): rows are PD nodes, a fixed (degree+1)^2
// nonzeros per row. Rebuilt whenever node positions change.
struct CouplingMap {
  int row_width = 0;
  std::vector<int> cp;        // node * row_width + k -> control point
  std::vector<double> shape;  // matching basis values
  std::vector<std::array<int, 2>> element;  // containing element per node

  int rows() const { return row_width == 0 ? 0 : static_cast<int>(element.size()); }
};

// Throws a domain error naming the node when one sits outside the patch.
CouplingMap build_coupling_map(const BSplinePatch& patch, const PDNodeSet& nodes,
                               WorkerPool& pool);

// Per-node interpolation of the background velocity rows; applied to Y for
// velocities and to Ydot for accelerations.
void interpolate_kinematics(const CouplingMap& map, const Field& field,
                            std::vector<Vec2>& out);

// R^s_A += sum_P N_A(x_P) R~^s_P into the momentum rows.
void transfer_solid_residual(const CouplingMap& map,
                             const std::vector<Vec2>& nodal, Field& residual);

// L^s_A += sum_P N_A(x_P) rho_P V_P onto the momentum diagonal of the
// per-control-point mass blocks.
void transfer_lumped_mass(const CouplingMap& map, const PDNodeSet& nodes,
                          std::vector<Mat4>& mass);

// R~^s_P = (rho_P a_P) V_P - f_P - s_P V_P (momentum rows of the PD residual).
void solid_nodal_residual(const PDNodeSet& nodes, const std::vector<Vec2>& accel,
                          const std::vector<Vec2>& internal_force,
                          const std::vector<Vec2>* volume_source,
                          std::vector<Vec2>& out);

// x_P += dt v_P; throws when a node leaves the background domain.
void update_node_positions(PDNodeSet& nodes, const std::vector<Vec2>& vel,
                           double dt, const Rect& domain);

// Nodal quadrature over the solid region.
PointQuadrature make_occupancy(const PDNodeSet& nodes);

}  // namespace perifsi

#endif
