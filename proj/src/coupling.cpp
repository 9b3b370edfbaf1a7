#include "perifsi/coupling.hpp"

#include <cstdio>
#include <mutex>

namespace perifsi {

CouplingMap build_coupling_map(const BSplinePatch& patch, const PDNodeSet& nodes,
                               WorkerPool& pool) {
  const int n = nodes.count();
  const int width = (patch.degree() + 1) * (patch.degree() + 1);
  CouplingMap map;
  map.row_width = width;
  map.cp.resize(static_cast<std::size_t>(n) * width);
  map.shape.resize(static_cast<std::size_t>(n) * width);
  map.element.resize(n);

  std::exception_ptr failure;
  std::mutex failure_mu;
  pool.for_chunks(n, [&](int, std::size_t begin, std::size_t end) {
    try {
      for (std::size_t p = begin; p < end; ++p) {
        const Vec2& x = nodes.pos[p];
        if (!patch.domain().contains(x)) {
          char buf[160];
          std::snprintf(buf, sizeof buf,
                        "PD node %d at (%.9g, %.9g) lies outside the "
                        "background domain",
                        static_cast<int>(p), x.x(), x.y());
          throw Error(ErrorKind::domain, buf);
        }
        const BasisEval be = patch.eval_basis(x);
        map.element[p] = patch.locate_element(x);
        for (int k = 0; k < width; ++k) {
          map.cp[p * width + k] = be.index[k];
          map.shape[p * width + k] = be.value[k];
        }
      }
    } catch (...) {
      std::lock_guard lk(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);
  return map;
}

void interpolate_kinematics(const CouplingMap& map, const Field& field,
                            std::vector<Vec2>& out) {
  const int n = map.rows();
  out.resize(n);
  const int width = map.row_width;
  for (int p = 0; p < n; ++p) {
    double vx = 0.0, vy = 0.0;
    for (int k = 0; k < width; ++k) {
      const int cp = map.cp[p * width + k];
      const double s = map.shape[p * width + k];
      vx += s * field(1, cp);
      vy += s * field(2, cp);
    }
    out[p] = Vec2(vx, vy);
  }
}

void transfer_solid_residual(const CouplingMap& map,
                             const std::vector<Vec2>& nodal, Field& residual) {
  const int n = map.rows();
  const int width = map.row_width;
  for (int p = 0; p < n; ++p)
    for (int k = 0; k < width; ++k) {
      const int cp = map.cp[p * width + k];
      const double s = map.shape[p * width + k];
      residual(1, cp) += s * nodal[p].x();
      residual(2, cp) += s * nodal[p].y();
    }
}

void transfer_lumped_mass(const CouplingMap& map, const PDNodeSet& nodes,
                          std::vector<Mat4>& mass) {
  const int n = map.rows();
  const int width = map.row_width;
  for (int p = 0; p < n; ++p) {
    const double m = nodes.density[p] * nodes.volume[p];
    for (int k = 0; k < width; ++k) {
      const int cp = map.cp[p * width + k];
      const double s = map.shape[p * width + k];
      mass[cp](1, 1) += s * m;
      mass[cp](2, 2) += s * m;
    }
  }
}

void solid_nodal_residual(const PDNodeSet& nodes, const std::vector<Vec2>& accel,
                          const std::vector<Vec2>& internal_force,
                          const std::vector<Vec2>* volume_source,
                          std::vector<Vec2>& out) {
  const int n = nodes.count();
  out.resize(n);
  for (int p = 0; p < n; ++p) {
    Vec2 r = nodes.density[p] * nodes.volume[p] * accel[p] - internal_force[p];
    if (volume_source) r -= (*volume_source)[p] * nodes.volume[p];
    out[p] = r;
  }
}

void update_node_positions(PDNodeSet& nodes, const std::vector<Vec2>& vel,
                           double dt, const Rect& domain) {
  if (dt <= 0.0) throw Error(ErrorKind::config, "time step must be positive");
  for (int p = 0; p < nodes.count(); ++p) {
    nodes.pos[p] += dt * vel[p];
    if (!domain.contains(nodes.pos[p])) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "PD node %d escaped the background domain: position "
                    "(%.9g, %.9g), velocity (%.9g, %.9g)",
                    p, nodes.pos[p].x(), nodes.pos[p].y(), vel[p].x(),
                    vel[p].y());
      throw Error(ErrorKind::domain, buf);
    }
  }
}

PointQuadrature make_occupancy(const PDNodeSet& nodes) {
  PointQuadrature q;
  q.points = nodes.pos;
  q.weights = nodes.volume;
  return q;
}

}  // namespace perifsi
