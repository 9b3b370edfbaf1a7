#include "perifsi/pd.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>

namespace perifsi {

namespace {

using MomentMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 9, 9>;
using MomentVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 9, 1>;

std::uint64_t pair_key(int p, int q) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p)) << 32) |
         static_cast<std::uint32_t>(q);
}

// Monomials of total degree 1..n in the scaled bond coordinates.
inline void monomials(int order, const Vec2& xi, double* m) {
  const double x = xi.x(), y = xi.y();
  m[0] = x;
  m[1] = y;
  if (order >= 2) {
    m[2] = x * x;
    m[3] = x * y;
    m[4] = y * y;
  }
  if (order >= 3) {
    m[5] = x * x * x;
    m[6] = x * x * y;
    m[7] = x * y * y;
    m[8] = y * y * y;
  }
}

inline double support_arg(const Vec2& d, double delta, SupportShape shape) {
  if (shape == SupportShape::circular) return d.norm() / delta;
  return std::max(std::abs(d.x()), std::abs(d.y())) / delta;
}

}  // namespace

double PDNodeSet::total_mass() const {
  double m = 0.0;
  for (int i = 0; i < count(); ++i) m += density[i] * volume[i];
  return m;
}

double radial_influence(double eta_hat) {
  if (eta_hat < 0.0) throw Error(ErrorKind::domain, "negative normalized bond length");
  if (eta_hat <= 0.5)
    return 2.0 / 3.0 - 4.0 * eta_hat * eta_hat + 4.0 * eta_hat * eta_hat * eta_hat;
  if (eta_hat <= 1.0) {
    const double e = eta_hat;
    return 4.0 / 3.0 - 4.0 * e + 4.0 * e * e - 4.0 / 3.0 * e * e * e;
  }
  return 0.0;
}

int monomial_count(int order) { return order * (order + 3) / 2; }

int build_families(PDNodeSet& nodes, WorkerPool& pool) {
  const int n = nodes.count();
  const double delta = nodes.config.horizon;
  if (delta <= 0.0) throw Error(ErrorKind::config, "PD horizon must be positive");

  // Spatial-hash grid with cell size = horizon in the current configuration.
  double minx = 0.0, miny = 0.0, maxx = 0.0, maxy = 0.0;
  if (n > 0) {
    minx = maxx = nodes.pos[0].x();
    miny = maxy = nodes.pos[0].y();
    for (const auto& x : nodes.pos) {
      minx = std::min(minx, x.x());
      maxx = std::max(maxx, x.x());
      miny = std::min(miny, x.y());
      maxy = std::max(maxy, x.y());
    }
  }
  const int ncx = std::max(1, static_cast<int>((maxx - minx) / delta) + 1);
  const int ncy = std::max(1, static_cast<int>((maxy - miny) / delta) + 1);
  auto cell_of = [&](const Vec2& x) {
    int cx = static_cast<int>((x.x() - minx) / delta);
    int cy = static_cast<int>((x.y() - miny) / delta);
    cx = std::clamp(cx, 0, ncx - 1);
    cy = std::clamp(cy, 0, ncy - 1);
    return cy * ncx + cx;
  };

  std::vector<int> cell_count(static_cast<std::size_t>(ncx) * ncy + 1, 0);
  std::vector<int> node_cell(n);
  for (int i = 0; i < n; ++i) {
    node_cell[i] = cell_of(nodes.pos[i]);
    ++cell_count[node_cell[i] + 1];
  }
  for (std::size_t c = 1; c < cell_count.size(); ++c) cell_count[c] += cell_count[c - 1];
  std::vector<int> cell_nodes(n);
  {
    std::vector<int> fill(cell_count.begin(), cell_count.end() - 1);
    for (int i = 0; i < n; ++i) cell_nodes[fill[node_cell[i]]++] = i;
  }

  // Collect sorted neighbor lists.
  std::vector<std::vector<int>> nbrs(n);
  const SupportShape shape = nodes.config.support;
  pool.for_chunks(n, [&](int, std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const Vec2 xp = nodes.pos[p];
      const int cx = node_cell[p] % ncx, cy = node_cell[p] / ncx;
      auto& list = nbrs[p];
      list.clear();
      for (int dy = -1; dy <= 1; ++dy) {
        const int yy = cy + dy;
        if (yy < 0 || yy >= ncy) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = cx + dx;
          if (xx < 0 || xx >= ncx) continue;
          const int c = yy * ncx + xx;
          for (int s = cell_count[c]; s < cell_count[c + 1]; ++s) {
            const int q = cell_nodes[s];
            if (q == static_cast<int>(p)) continue;
            const Vec2 d = nodes.pos[q] - xp;
            const double arg = support_arg(d, delta, shape);
            // inclusive at the horizon, robust to lattice roundoff
            if (arg <= 1.0 + 1e-10 && d.squaredNorm() > 0.0) list.push_back(q);
          }
        }
      }
      std::sort(list.begin(), list.end());
    }
  });

  // New CSR arrays with bond state carried over from the previous families.
  std::vector<int> old_start = std::move(nodes.fam_start);
  std::vector<int> old_node = std::move(nodes.fam_node);
  std::vector<BondState> old_bond = std::move(nodes.bond);
  const bool had_families = old_start.size() == static_cast<std::size_t>(n) + 1;

  nodes.fam_start.assign(n + 1, 0);
  for (int p = 0; p < n; ++p)
    nodes.fam_start[p + 1] = nodes.fam_start[p] + static_cast<int>(nbrs[p].size());
  const int nbonds = nodes.fam_start[n];
  nodes.fam_node.resize(nbonds);
  nodes.bond.assign(nbonds, BondState{});

  int empty_families = 0;
  for (int p = 0; p < n; ++p) {
    if (nbrs[p].empty()) ++empty_families;
    int slot = nodes.fam_start[p];
    std::size_t io = had_families ? static_cast<std::size_t>(old_start[p]) : 0;
    const std::size_t io_end = had_families ? static_cast<std::size_t>(old_start[p + 1]) : 0;
    for (int q : nbrs[p]) {
      nodes.fam_node[slot] = q;
      while (io < io_end && old_node[io] < q) {
        if (old_bond[io].damage > 0.0)
          nodes.detached[pair_key(p, old_node[io])] = old_bond[io];
        ++io;
      }
      if (io < io_end && old_node[io] == q) {
        nodes.bond[slot] = old_bond[io];
        ++io;
      } else if (!nodes.detached.empty()) {
        auto it = nodes.detached.find(pair_key(p, q));
        if (it != nodes.detached.end()) {
          nodes.bond[slot] = it->second;
          nodes.detached.erase(it);
        }
      }
      ++slot;
    }
    while (io < io_end) {
      if (old_bond[io].damage > 0.0)
        nodes.detached[pair_key(p, old_node[io])] = old_bond[io];
      ++io;
    }
  }

  // Mirror-bond lookup. The support predicate is symmetric, so the mirror
  // always exists; a miss would mean inconsistent geometry.
  nodes.fam_reverse.resize(nbonds);
  std::atomic<bool> asymmetric{false};
  pool.for_chunks(n, [&](int, std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p)
      for (int s = nodes.fam_start[p]; s < nodes.fam_start[p + 1]; ++s) {
        const int q = nodes.fam_node[s];
        const auto first = nodes.fam_node.begin() + nodes.fam_start[q];
        const auto last = nodes.fam_node.begin() + nodes.fam_start[q + 1];
        const auto it = std::lower_bound(first, last, static_cast<int>(p));
        if (it == last || *it != static_cast<int>(p)) {
          asymmetric.store(true);
          nodes.fam_reverse[s] = s;
          continue;
        }
        nodes.fam_reverse[s] =
            nodes.fam_start[q] + static_cast<int>(it - first);
      }
  });
  if (asymmetric.load())
    throw Error(ErrorKind::numerical, "PD family symmetry broken");

  nodes.omega.assign(nbonds, 0.0);
  nodes.kernel.assign(nbonds, Vec2::Zero());
  nodes.omega_sum.assign(n, 0.0);
  nodes.nodal_grad_v.assign(n, Mat2::Zero());
  nodes.kernel_order.assign(n, 0);
  return empty_families;
}

KernelStats compute_kernels(PDNodeSet& nodes, WorkerPool& pool, KernelPolicy policy) {
  const int n = nodes.count();
  const double delta = nodes.config.horizon;
  const SupportShape shape = nodes.config.support;
  const int req_order = nodes.config.order;
  if (req_order < 1 || req_order > 3)
    throw Error(ErrorKind::config, "kernel order must be in [1, 3]");

  std::vector<KernelStats> stats(pool.workers());
  std::exception_ptr failure;
  std::mutex failure_mu;

  pool.for_chunks(n, [&](int w, std::size_t begin, std::size_t end) {
    try {
      for (std::size_t p = begin; p < end; ++p) {
        const int b0 = nodes.fam_start[p], b1 = nodes.fam_start[p + 1];
        double wsum = 0.0;
        for (int s = b0; s < b1; ++s) {
          const int q = nodes.fam_node[s];
          const Vec2 d = nodes.pos[q] - nodes.pos[p];
          const double wr = radial_influence(support_arg(d, delta, shape));
          nodes.omega[s] = wr * nodes.bond[s].omega_d;
          wsum += nodes.omega[s] * nodes.volume[q];
        }
        nodes.omega_sum[p] = wsum;

        int used = 0;
        if (b1 > b0 && wsum > 0.0) {
          for (int order = req_order; order >= 1; --order) {
            const int dim = monomial_count(order);
            MomentMatrix moment = MomentMatrix::Zero(dim, dim);
            double xi_m[9];
            for (int s = b0; s < b1; ++s) {
              if (nodes.omega[s] == 0.0) continue;
              const int q = nodes.fam_node[s];
              const Vec2 xi = (nodes.pos[q] - nodes.pos[p]) / delta;
              monomials(order, xi, xi_m);
              const double wv = nodes.omega[s] * nodes.volume[q];
              for (int a = 0; a < dim; ++a)
                for (int b = a; b < dim; ++b) moment(a, b) += wv * xi_m[a] * xi_m[b];
            }
            for (int a = 0; a < dim; ++a)
              for (int b = 0; b < a; ++b) moment(a, b) = moment(b, a);

            Eigen::LDLT<MomentMatrix> ldlt(moment);
            bool ok = ldlt.info() == Eigen::Success;
            if (ok) {
              const auto dvec = ldlt.vectorD();
              double dmin = dvec[0], dmax = dvec[0];
              for (int a = 1; a < dim; ++a) {
                dmin = std::min(dmin, dvec[a]);
                dmax = std::max(dmax, dvec[a]);
              }
              ok = dmin > 0.0 && dmin >= 1e-12 * dmax;
            }
            if (!ok) {
              if (order > 1) continue;
              if (policy == KernelPolicy::strict_errors) {
                char buf[96];
                std::snprintf(buf, sizeof buf,
                              "degraded kernel support at PD node %d "
                              "(moment matrix singular)",
                              static_cast<int>(p));
                throw Error(ErrorKind::numerical, buf);
              }
              break;  // gradient-free fallback
            }

            // Gradient rows of the kernel: first two rows of M^-1 select the
            // linear monomials; 1/delta undoes the coordinate scaling.
            Eigen::Matrix<double, Eigen::Dynamic, 2, 0, 9, 2> sel =
                Eigen::Matrix<double, Eigen::Dynamic, 2, 0, 9, 2>::Zero(dim, 2);
            sel(0, 0) = 1.0;
            sel(1, 1) = 1.0;
            const auto rows = ldlt.solve(sel);  // dim x 2

            for (int s = b0; s < b1; ++s) {
              if (nodes.omega[s] == 0.0) {
                nodes.kernel[s].setZero();
                continue;
              }
              const int q = nodes.fam_node[s];
              const Vec2 xi = (nodes.pos[q] - nodes.pos[p]) / delta;
              monomials(order, xi, xi_m);
              double kx = 0.0, ky = 0.0;
              for (int a = 0; a < dim; ++a) {
                kx += rows(a, 0) * xi_m[a];
                ky += rows(a, 1) * xi_m[a];
              }
              nodes.kernel[s] = (nodes.omega[s] / delta) * Vec2(kx, ky);
            }
            used = order;
            break;
          }
        }
        nodes.kernel_order[p] = used;
        if (used == 0) {
          for (int s = b0; s < b1; ++s) nodes.kernel[s].setZero();
          if (b1 > b0) ++stats[w].gradient_free;
        } else if (used < req_order) {
          ++stats[w].degraded_nodes;
        }
      }
    } catch (...) {
      std::lock_guard lk(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);

  KernelStats total;
  for (const auto& s : stats) {
    total.degraded_nodes += s.degraded_nodes;
    total.gradient_free += s.gradient_free;
  }
  return total;
}

void nodal_velocity_gradients(PDNodeSet& nodes, WorkerPool& pool) {
  pool.for_chunks(nodes.count(), [&](int, std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      Mat2 L = Mat2::Zero();
      for (int s = nodes.fam_start[p]; s < nodes.fam_start[p + 1]; ++s) {
        const int q = nodes.fam_node[s];
        const Vec2 dv = nodes.vel[q] - nodes.vel[p];
        L.noalias() += (dv * nodes.kernel[s].transpose()) * nodes.volume[q];
      }
      nodes.nodal_grad_v[p] = L;
    }
  });
}

Mat2 bond_velocity_gradient(const Mat2& grad_own, const Mat2& grad_nbr,
                            const Vec2& vel_state, const Vec2& bond_vec) {
  const double len2 = bond_vec.squaredNorm();
  if (len2 <= 0.0) throw Error(ErrorKind::numerical, "zero-length PD bond");
  const Mat2 mean = 0.5 * (grad_own + grad_nbr);
  const Vec2 residual = vel_state - mean * bond_vec;
  return mean + (residual * bond_vec.transpose()) / len2;
}

double update_bond_states(PDNodeSet& nodes, const MaterialParams& mat, double dt,
                          WorkerPool& pool) {
  const int n = nodes.count();
  const bool ba = nodes.config.bond_associated;
  std::vector<double> dissipation(pool.workers(), 0.0);

  pool.for_chunks(n, [&](int w, std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      for (int s = nodes.fam_start[p]; s < nodes.fam_start[p + 1]; ++s) {
        BondState& b = nodes.bond[s];
        if (b.damage >= 1.0) continue;
        const int q = nodes.fam_node[s];
        Mat2 L;
        if (ba) {
          const Vec2 xb = nodes.pos[q] - nodes.pos[p];
          const Vec2 vb = nodes.vel[q] - nodes.vel[p];
          L = bond_velocity_gradient(nodes.nodal_grad_v[p], nodes.nodal_grad_v[q],
                                     vb, xb);
        } else {
          L = nodes.nodal_grad_v[p];
        }
        const double d_eqps = stress_update(b.stress, b.eqps, L, dt, mat);
        switch (mat.law) {
          case DamageLaw::brittle:
            damage_update_brittle(b, mat.critical_stress);
            break;
          case DamageLaw::ductile:
            damage_update_ductile(b, mat.eqps_threshold, mat.eqps_critical);
            break;
          case DamageLaw::none:
            break;
        }
        if (d_eqps > 0.0 && nodes.omega_sum[p] > 0.0) {
          const double weight =
              nodes.omega[s] * nodes.volume[q] / nodes.omega_sum[p];
          dissipation[w] +=
              von_mises(b.stress) * d_eqps * weight * nodes.volume[p];
        }
      }
    }
  });

  // Symmetrize full breakage so action-reaction pairs stay consistent, then
  // refresh the influence and its family sums.
  pool.for_chunks(n, [&](int, std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      for (int s = nodes.fam_start[p]; s < nodes.fam_start[p + 1]; ++s) {
        BondState& b = nodes.bond[s];
        if (b.damage < 1.0 && nodes.bond[nodes.fam_reverse[s]].damage >= 1.0) {
          b.damage = 1.0;
          b.omega_d = 0.0;
        }
      }
    }
  });
  pool.for_chunks(n, [&](int, std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const double delta = nodes.config.horizon;
      double wsum = 0.0;
      for (int s = nodes.fam_start[p]; s < nodes.fam_start[p + 1]; ++s) {
        const int q = nodes.fam_node[s];
        const Vec2 d = nodes.pos[q] - nodes.pos[p];
        const double wr =
            radial_influence(support_arg(d, delta, nodes.config.support));
        nodes.omega[s] = wr * nodes.bond[s].omega_d;
        wsum += nodes.omega[s] * nodes.volume[q];
      }
      nodes.omega_sum[p] = wsum;
    }
  });

  double total = 0.0;
  for (double d : dissipation) total += d;
  return total;
}

namespace {

// T for one bond: omega sigma x / (omega-bar |x|^2) + z Phi. Fully broken
// bonds carry nothing.
inline Vec2 bond_force_state(const PDNodeSet& nodes, const std::vector<Mat2>& z,
                             int p, int s) {
  const double om = nodes.omega[s];
  if (om <= 0.0) return Vec2::Zero();
  const int q = nodes.fam_node[s];
  const Vec2 xb = nodes.pos[q] - nodes.pos[p];
  const double len2 = xb.squaredNorm();
  const Mat2 sig = nodes.bond[s].stress.in_plane();
  Vec2 t = (om / (nodes.omega_sum[p] * len2)) * (sig * xb);
  t += z[p] * nodes.kernel[s];
  return t;
}

void compute_z(const PDNodeSet& nodes, std::vector<Mat2>& z, WorkerPool& pool) {
  z.assign(nodes.count(), Mat2::Zero());
  pool.for_chunks(nodes.count(), [&](int, std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      Mat2 acc = Mat2::Zero();
      for (int s = nodes.fam_start[p]; s < nodes.fam_start[p + 1]; ++s) {
        const double om = nodes.omega[s];
        if (om <= 0.0) continue;
        const int q = nodes.fam_node[s];
        const Vec2 xb = nodes.pos[q] - nodes.pos[p];
        const double len2 = xb.squaredNorm();
        const Mat2 proj = Mat2::Identity() - (xb * xb.transpose()) / len2;
        const double coef =
            0.5 / nodes.omega_sum[p] + 0.5 / nodes.omega_sum[q];
        acc.noalias() +=
            (coef * om * nodes.volume[q]) * (nodes.bond[s].stress.in_plane() * proj);
      }
      z[p] = acc;
    }
  });
}

}  // namespace

void compute_force_states(const PDNodeSet& nodes, std::vector<Vec2>& t_states) {
  WorkerPool serial(1);
  std::vector<Mat2> z;
  compute_z(nodes, z, serial);
  t_states.resize(nodes.bonds());
  for (int p = 0; p < nodes.count(); ++p)
    for (int s = nodes.fam_start[p]; s < nodes.fam_start[p + 1]; ++s)
      t_states[s] = bond_force_state(nodes, z, p, s);
}

void compute_internal_forces(PDNodeSet& nodes, std::vector<Vec2>& force,
                             WorkerPool& pool) {
  const int n = nodes.count();
  std::vector<Mat2> z;
  std::vector<Vec2> t;
  compute_z(nodes, z, pool);
  t.resize(nodes.bonds());
  pool.for_chunks(n, [&](int, std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p)
      for (int s = nodes.fam_start[p]; s < nodes.fam_start[p + 1]; ++s)
        t[s] = bond_force_state(nodes, z, static_cast<int>(p), s);
  });
  force.assign(n, Vec2::Zero());
  pool.for_chunks(n, [&](int, std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      Vec2 f = Vec2::Zero();
      for (int s = nodes.fam_start[p]; s < nodes.fam_start[p + 1]; ++s) {
        const int q = nodes.fam_node[s];
        f += (t[s] - t[nodes.fam_reverse[s]]) * nodes.volume[q];
      }
      force[p] = f * nodes.volume[p];
    }
  });
}

double node_damage(const PDNodeSet& nodes, int p) {
  const int b0 = nodes.fam_start[p], b1 = nodes.fam_start[p + 1];
  if (b0 == b1) return 1.0;
  const double delta = nodes.config.horizon;
  double num = 0.0, den = 0.0;
  for (int s = b0; s < b1; ++s) {
    const int q = nodes.fam_node[s];
    const Vec2 d = nodes.pos[q] - nodes.pos[p];
    const double wr = radial_influence(support_arg(d, delta, nodes.config.support));
    den += wr * nodes.volume[q];
    num += wr * nodes.bond[s].omega_d * nodes.volume[q];
  }
  if (den <= 0.0) return 1.0;
  return 1.0 - num / den;
}

void append_node_grid(PDNodeSet& nodes, const Vec2& origin, const Vec2& extent,
                      int nx, int ny, double density) {
  const double hx = extent.x() / nx, hy = extent.y() / ny;
  const double vol = hx * hy;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Vec2 x(origin.x() + (i + 0.5) * hx, origin.y() + (j + 0.5) * hy);
      nodes.ref_pos.push_back(x);
      nodes.pos.push_back(x);
      nodes.vel.push_back(Vec2::Zero());
      nodes.volume.push_back(vol);
      nodes.density.push_back(density);
    }
}

}  // namespace perifsi
