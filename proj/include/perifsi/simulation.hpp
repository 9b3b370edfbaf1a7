#ifndef PERIFSI_SIMULATION_HPP
#define PERIFSI_SIMULATION_HPP

#include <optional>
#include <string>
#include <vector>

#include "perifsi/bspline.hpp"
#include "perifsi/common.hpp"
#include "perifsi/coupling.hpp"
#include "perifsi/fluid.hpp"
#include "perifsi/integrator.hpp"
#include "perifsi/material.hpp"
#include "perifsi/parallel.hpp"
#include "perifsi/pd.hpp"

namespace perifsi {

struct StepDiagnostics {
  long step = 0;
  double time = 0.0;
  double dt = 0.0;
  double max_residual = 0.0;        // after the last corrector pass
  double broken_bond_fraction = 0.0;
  double plastic_dissipation = 0.0; // cumulative
  int degraded_kernels = 0;
};

// Monolithic background state plus the foreground solid.
struct SimState {
  BSplinePatch patch;
  GasParams gas;
  StabConfig stab;
  GenAlphaParams integ;
  double dt = 0.0;

  Field y;     // (p, v1, v2, T) per control point
  Field ydot;
  std::vector<std::pair<int, int>> constraints;  // strongly-zeroed rows

  bool has_solid = false;
  PDNodeSet solid;
  MaterialParams material;
  double solid_spacing = 0.0;  // nominal node spacing for the CFL bound

  double decouple_time = -1.0;  // < 0: never decouple
  bool decoupled = false;

  double time = 0.0;
  long step_count = 0;

  // derived, refreshed as the solid moves
  CouplingMap map;
  PointQuadrature occupancy;
  std::vector<Vec2> internal_force;
  std::vector<Vec2> node_accel_scratch;
  std::vector<Vec2> nodal_residual_scratch;
  std::vector<Mat4> mass_fluid;  // fluid block row-sum mass (solid region removed)
  std::vector<Mat4> mass;        // + transferred solid mass, constraints applied
  std::vector<Mat4> mass_inv;
  double plastic_dissipation = 0.0;
  KernelStats kernel_stats;
  double last_max_residual = 0.0;

  double pressure_at(const Vec2& x) const;
  Vec2 solid_center_of_mass() const;
  double fluid_mass(WorkerPool& pool) const;  // integral of rho minus solid part
};

// Prepares families, kernels, internal forces, coupling map, and occupancy
// from current positions/velocities. Called by scenario setup and by step().
void refresh_solid_state(SimState& s, WorkerPool& pool);

// dt bound: cfl * min(element h / (|v| + c), solid spacing / c_solid).
double cfl_estimate(const SimState& s, WorkerPool& pool);

// Switches the solid to standalone central-difference integration; the fluid
// reclaims the whole background domain. Repeat triggers warn and do nothing.
void decouple_solid(SimState& s);

void step(SimState& s, WorkerPool& pool);

StepDiagnostics diagnostics(const SimState& s);

}  // namespace perifsi

#endif
