#ifndef PERIFSI_PD_HPP
#define PERIFSI_PD_HPP

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "perifsi/common.hpp"
#include "perifsi/material.hpp"
#include "perifsi/parallel.hpp"

namespace perifsi {

enum class SupportShape { circular, rectangular };

struct PDConfig {
  int order = 2;                // gradient kernel consistency order, 1..3
  bool bond_associated = true;  // bond-level velocity gradient stabilization
  SupportShape support = SupportShape::rectangular;
  double horizon = 0.0;         // delta
};

// Foreground solid: semi-Lagrangian node set with bond state. Families live in
// the current configuration and are rebuilt as nodes move; bond state persists
// across rebuilds and broken/damaged pairs are remembered if they separate.
struct PDNodeSet {
  PDConfig config;

  // per node
  std::vector<Vec2> ref_pos;
  std::vector<Vec2> pos;
  std::vector<Vec2> vel;
  std::vector<double> volume;
  std::vector<double> density;  // Lagrangian mass density, constant

  // families, CSR over nodes
  std::vector<int> fam_start;    // count()+1 entries
  std::vector<int> fam_node;     // neighbor ids, ascending per family
  std::vector<int> fam_reverse;  // CSR slot of the mirror bond

  // bond state, parallel to fam_node
  std::vector<BondState> bond;
  std::vector<double> omega;   // influence omega_r * omega_D
  std::vector<Vec2> kernel;    // gradient kernel Phi

  // per node, derived
  std::vector<double> omega_sum;    // omega-bar = sum omega V'
  std::vector<Mat2> nodal_grad_v;   // point-level velocity gradient L
  std::vector<int> kernel_order;    // order actually used; 0 = gradient-free

  // damaged bonds whose endpoints separated beyond the horizon
  std::unordered_map<std::uint64_t, BondState> detached;

  int count() const { return static_cast<int>(pos.size()); }
  int bonds() const { return static_cast<int>(fam_node.size()); }
  int family_size(int p) const { return fam_start[p + 1] - fam_start[p]; }

  double total_mass() const;
};

// Cubic B-spline influence kernel of the normalized bond length.
double radial_influence(double eta_hat);

// Number of monomials of total degree 1..n in 2D.
int monomial_count(int order);

// Families in the current configuration via a spatial-hash grid, neighbors
// sorted by node index. Carries bond state over from the previous families and
// consults the detached-damage memory. Returns the number of empty families.
int build_families(PDNodeSet& nodes, WorkerPool& pool);

enum class KernelPolicy { strict_errors, degrade };

struct KernelStats {
  int degraded_nodes = 0;   // fell back below the requested order
  int gradient_free = 0;    // no usable kernel at any order (Phi = 0)
};

// Reproducing-kernel gradient kernels Phi, influence omega, and omega-bar.
// Ill-conditioned moment matrices (condition estimate beyond 1e12) fall back
// one order at a time; with strict_errors a node that fails at order 1 throws.
KernelStats compute_kernels(PDNodeSet& nodes, WorkerPool& pool,
                            KernelPolicy policy = KernelPolicy::strict_errors);

// L = sum (v' - v) Phi^T V' over each family.
void nodal_velocity_gradients(PDNodeSet& nodes, WorkerPool& pool);

// Bond-associated velocity gradient: mean of the endpoint gradients plus a
// rank-one correction that makes Lb * xb = vb exact.
Mat2 bond_velocity_gradient(const Mat2& grad_own, const Mat2& grad_nbr,
                            const Vec2& vel_state, const Vec2& bond_vec);

// Constitutive + damage sweep over all bonds (requires nodal_grad_v current).
// Brittle breakage is symmetrized. Returns the plastic dissipation increment.
double update_bond_states(PDNodeSet& nodes, const MaterialParams& mat, double dt,
                          WorkerPool& pool);

// Force states (including the z correction term) integrated to nodal internal
// forces f_P = V_P sum (T - T') V'.
void compute_internal_forces(PDNodeSet& nodes, std::vector<Vec2>& force,
                             WorkerPool& pool);

// Per-bond force states, exposed for verification; slot i of the result holds
// T for CSR bond i.
void compute_force_states(const PDNodeSet& nodes, std::vector<Vec2>& t_states);

// Weighted fraction of broken influence: 0 pristine, 1 fully separated.
double node_damage(const PDNodeSet& nodes, int p);

// Uniform-grid node block covering [origin, origin+extent] with nx-by-ny cells,
// one node per cell centroid, volume = cell area.
void append_node_grid(PDNodeSet& nodes, const Vec2& origin, const Vec2& extent,
                      int nx, int ny, double density);

}  // namespace perifsi

#endif
