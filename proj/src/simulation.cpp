#include "perifsi/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace perifsi {

double SimState::pressure_at(const Vec2& x) const {
  const BasisEval be = patch.eval_basis(x);
  double p = 0.0;
  for (int k = 0; k < be.count; ++k) p += be.value[k] * y(0, be.index[k]);
  return p;
}

Vec2 SimState::solid_center_of_mass() const {
  Vec2 num = Vec2::Zero();
  double den = 0.0;
  for (int p = 0; p < solid.count(); ++p) {
    const double m = solid.density[p] * solid.volume[p];
    num += m * solid.pos[p];
    den += m;
  }
  return den > 0.0 ? Vec2(num / den) : Vec2::Zero();
}

double SimState::fluid_mass(WorkerPool&) const {
  double total = 0.0;
  for (int ey = 0; ey < patch.num_elems(1); ++ey)
    for (int ex = 0; ex < patch.num_elems(0); ++ex)
      for (const auto& qp : patch.element_quadrature(ex, ey)) {
        const BasisEval be = patch.eval_basis(qp.x);
        double p = 0.0, T = 0.0;
        for (int k = 0; k < be.count; ++k) {
          p += be.value[k] * y(0, be.index[k]);
          T += be.value[k] * y(3, be.index[k]);
        }
        total += qp.weight * p / (gas.R * T);
      }
  if (has_solid && !decoupled) {
    for (int n = 0; n < solid.count(); ++n) {
      const BasisEval be = patch.eval_basis(solid.pos[n]);
      double p = 0.0, T = 0.0;
      for (int k = 0; k < be.count; ++k) {
        p += be.value[k] * y(0, be.index[k]);
        T += be.value[k] * y(3, be.index[k]);
      }
      total -= solid.volume[n] * p / (gas.R * T);
    }
  }
  return total;
}

void refresh_solid_state(SimState& s, WorkerPool& pool) {
  if (!s.has_solid) return;
  build_families(s.solid, pool);
  s.kernel_stats = compute_kernels(s.solid, pool, KernelPolicy::degrade);
  nodal_velocity_gradients(s.solid, pool);
  compute_internal_forces(s.solid, s.internal_force, pool);
  if (!s.decoupled) {
    s.map = build_coupling_map(s.patch, s.solid, pool);
    s.occupancy = make_occupancy(s.solid);
  }
}

double cfl_estimate(const SimState& s, WorkerPool&) {
  const double hx = s.patch.element_size(0), hy = s.patch.element_size(1);
  const double h = std::min(hx, hy);
  double bound = std::numeric_limits<double>::infinity();
  for (int ey = 0; ey < s.patch.num_elems(1); ++ey)
    for (int ex = 0; ex < s.patch.num_elems(0); ++ex) {
      const Vec2 c(s.patch.domain().x0 + (ex + 0.5) * hx,
                   s.patch.domain().y0 + (ey + 0.5) * hy);
      const BasisEval be = s.patch.eval_basis(c);
      Vec4 yq = Vec4::Zero();
      for (int k = 0; k < be.count; ++k)
        for (int i = 0; i < 4; ++i) yq[i] += be.value[k] * s.y(i, be.index[k]);
      const double sound = std::sqrt(s.gas.gamma * s.gas.R * yq[3]);
      const double speed = std::hypot(yq[1], yq[2]) + sound;
      bound = std::min(bound, h / speed);
    }
  if (s.has_solid && s.solid_spacing > 0.0) {
    const double c_solid = std::sqrt(
        s.material.youngs /
        (s.material.density * (1.0 - s.material.poisson * s.material.poisson)));
    bound = std::min(bound, s.solid_spacing / c_solid);
  }
  return s.integ.cfl_number * bound;
}

void decouple_solid(SimState& s) {
  if (s.decoupled) {
    std::fprintf(stderr, "perifsi: decouple trigger repeated at t = %.9g, ignored\n",
                 s.time);
    return;
  }
  s.decoupled = true;
  s.occupancy = PointQuadrature{};
  s.map = CouplingMap{};
}

namespace {

// Background system driven by the generalized-alpha template: fluid forms over
// the patch minus the solid region, plus the transferred PD nodal residual.
struct BackgroundSystem {
  SimState& s;
  WorkerPool& pool;
  int pass = 0;

  Field residual(const Field& y, const Field& ydot_alpha) {
    Field r;
    const bool coupled = s.has_solid && !s.decoupled;
    std::vector<Mat4>* mass_out = pass == 0 ? &s.mass_fluid : nullptr;
    assemble_fluid_residual(s.patch, y, ydot_alpha, s.gas, s.stab, s.dt,
                            coupled ? &s.occupancy : nullptr, nullptr, r,
                            mass_out, pool);
    if (coupled) {
      interpolate_kinematics(s.map, ydot_alpha, s.node_accel_scratch);
      solid_nodal_residual(s.solid, s.node_accel_scratch, s.internal_force,
                           nullptr, s.nodal_residual_scratch);
      transfer_solid_residual(s.map, s.nodal_residual_scratch, r);
    }
    if (pass == 0) prepare_mass(coupled);
    // Transient term through the lumped mass; the fluid assembly carries only
    // the spatial forms. Solid inertia arrives fully through the transferred
    // nodal residual, so its share of the mass blocks is excluded here.
    for (int a = 0; a < r.cols(); ++a)
      r.col(a).noalias() += s.mass_fluid[a] * ydot_alpha.col(a);
    for (const auto& [cp, comp] : s.constraints) r(comp, cp) = 0.0;

    ++pass;
    s.last_max_residual = r.cwiseAbs().maxCoeff();
    return r;
  }

  Field solve_mass(const Field& r) {
    Field d(4, r.cols());
    for (int a = 0; a < r.cols(); ++a)
      d.col(a) = -(s.mass_inv[a] * r.col(a));
    return d;
  }

  void prepare_mass(bool coupled) {
    const int ncp = s.patch.num_cp_total();
    s.mass = s.mass_fluid;
    if (coupled) transfer_lumped_mass(s.map, s.solid, s.mass);
    for (const auto& [cp, comp] : s.constraints) {
      s.mass[cp].row(comp).setZero();
      s.mass[cp].col(comp).setZero();
      s.mass[cp](comp, comp) = 1.0;
    }
    s.mass_inv.resize(ncp);
    for (int a = 0; a < ncp; ++a) {
      const Mat4& m = s.mass[a];
      // Continuity and momentum diagonals are physical capacities and must
      // stay positive; losing that signals occupancy over-subtraction.
      if (!(m(0, 0) > 0.0) || !(m(1, 1) > 0.0) || !(m(2, 2) > 0.0)) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "non-positive lumped mass at control point %d "
                      "(diag %.3g, %.3g, %.3g, %.3g)",
                      a, m(0, 0), m(1, 1), m(2, 2), m(3, 3));
        throw Error(ErrorKind::numerical, buf);
      }
      const double det = m.determinant();
      if (!(std::abs(det) > 0.0)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "singular lumped mass block at control point %d", a);
        throw Error(ErrorKind::numerical, buf);
      }
      s.mass_inv[a] = m.inverse();
    }
  }
};

void check_finite(const SimState& s, const Field& f, const char* what) {
  if (f.allFinite()) return;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "non-finite %s at step %ld (t = %.9g s, dt = %.3g s)", what,
                s.step_count, s.time, s.dt);
  throw Error(ErrorKind::numerical, buf);
}

}  // namespace

void step(SimState& s, WorkerPool& pool) {
  if (s.dt <= 0.0) throw Error(ErrorKind::config, "time step must be positive");
  if (s.has_solid && !s.decoupled && s.decouple_time >= 0.0 &&
      s.time >= s.decouple_time)
    decouple_solid(s);

  BackgroundSystem sys{s, pool};
  genalpha_step(sys, s.y, s.ydot, s.integ, s.dt);
  check_finite(s, s.y, "state");
  check_finite(s, s.ydot, "state rate");

  if (s.has_solid) {
    if (!s.decoupled) {
      // End-of-step kinematics move the nodes; all solid state then refreshes
      // in the new configuration.
      std::vector<Vec2> vel;
      interpolate_kinematics(s.map, s.y, vel);
      update_node_positions(s.solid, vel, s.dt, s.patch.domain());
      s.map = build_coupling_map(s.patch, s.solid, pool);
      interpolate_kinematics(s.map, s.y, s.solid.vel);
    } else {
      for (int p = 0; p < s.solid.count(); ++p) {
        const double m = s.solid.density[p] * s.solid.volume[p];
        s.solid.vel[p] += s.dt * s.internal_force[p] / m;
        s.solid.pos[p] += s.dt * s.solid.vel[p];
      }
    }
    build_families(s.solid, pool);
    s.kernel_stats = compute_kernels(s.solid, pool, KernelPolicy::degrade);
    nodal_velocity_gradients(s.solid, pool);
    s.plastic_dissipation +=
        update_bond_states(s.solid, s.material, s.dt, pool);
    compute_internal_forces(s.solid, s.internal_force, pool);
    if (!s.decoupled) s.occupancy = make_occupancy(s.solid);
  }

  s.time += s.dt;
  ++s.step_count;
}

StepDiagnostics diagnostics(const SimState& s) {
  StepDiagnostics d;
  d.step = s.step_count;
  d.time = s.time;
  d.dt = s.dt;
  d.max_residual = s.last_max_residual;
  d.plastic_dissipation = s.plastic_dissipation;
  d.degraded_kernels = s.kernel_stats.degraded_nodes + s.kernel_stats.gradient_free;
  if (s.solid.bonds() > 0) {
    long broken = 0;
    for (const auto& b : s.solid.bond)
      if (b.damage >= 1.0) ++broken;
    d.broken_bond_fraction = static_cast<double>(broken) / s.solid.bonds();
  }
  return d;
}

}  // namespace perifsi
