#include "perifsi/fluid.hpp"

#include <cmath>
#include <cstdio>
#include <mutex>

namespace perifsi {

void GasParams::validate() const {
  if (mu < 0.0 || prandtl <= 0.0 || gamma <= 1.0 || R <= 0.0)
    throw Error(ErrorKind::config,
                "gas parameters require mu >= 0, Pr > 0, gamma > 1, R > 0");
}

namespace {

[[noreturn]] void invalid_state(const Vec4& y) {
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "invalid gas state: p = %.6g Pa, T = %.6g K (both must be positive)",
                y[0], y[3]);
  throw Error(ErrorKind::numerical, buf);
}

}  // namespace

Vec4 conservation_from_primitive(const Vec4& y, const GasParams& gas) {
  const double p = y[0], u = y[1], v = y[2], T = y[3];
  if (p <= 0.0 || T <= 0.0) invalid_state(y);
  const double rho = p / (gas.R * T);
  const double etot = gas.cv() * T + 0.5 * (u * u + v * v);
  return {rho, rho * u, rho * v, rho * etot};
}

EulerJacobians euler_jacobians(const Vec4& y, const GasParams& gas) {
  const double p = y[0], u = y[1], v = y[2], T = y[3];
  if (p <= 0.0 || T <= 0.0) invalid_state(y);
  const double rho = p / (gas.R * T);
  const double rho_p = 1.0 / (gas.R * T);
  const double rho_T = -rho / T;
  const double cv = gas.cv();
  const double etot = cv * T + 0.5 * (u * u + v * v);

  EulerJacobians j;
  j.A0 << rho_p, 0.0, 0.0, rho_T,
      rho_p * u, rho, 0.0, rho_T * u,
      rho_p * v, 0.0, rho, rho_T * v,
      rho_p * etot, rho * u, rho * v, rho_T * etot + rho * cv;

  const Vec4 U(rho, rho * u, rho * v, rho * etot);
  j.adv[0] = u * j.A0;
  j.adv[0].col(1) += U;
  j.adv[1] = v * j.A0;
  j.adv[1].col(2) += U;
  return j;
}

FluxSet fluxes(const Vec4& y, const GradY& grad, const GasParams& gas) {
  const double p = y[0], u = y[1], v = y[2];
  const double ux = grad(1, 0), uy = grad(1, 1);
  const double vx = grad(2, 0), vy = grad(2, 1);
  const double Tx = grad(3, 0), Ty = grad(3, 1);

  FluxSet f;
  f.pressure[0] = {0.0, p, 0.0, p * u};
  f.pressure[1] = {0.0, 0.0, p, p * v};

  // Newtonian stress under the Stokes hypothesis, plus Fourier conduction.
  const double lambda = -2.0 / 3.0 * gas.mu;
  const double div_v = ux + vy;
  const double t11 = 2.0 * gas.mu * ux + lambda * div_v;
  const double t22 = 2.0 * gas.mu * vy + lambda * div_v;
  const double t12 = gas.mu * (uy + vx);
  const double kf = gas.cp() * gas.mu / gas.prandtl;
  f.viscous[0] = {0.0, t11, t12, t11 * u + t12 * v + kf * Tx};
  f.viscous[1] = {0.0, t12, t22, t12 * u + t22 * v + kf * Ty};
  return f;
}

Vec4 strong_residual(const Vec4& ydot, const Vec4& y, const GradY& grad,
                     const GasParams& gas, const Vec4& source) {
  const EulerJacobians j = euler_jacobians(y, gas);
  const double u = y[1], v = y[2];
  const double px = grad(0, 0), py = grad(0, 1);
  const double div_v = grad(1, 0) + grad(2, 1);
  Vec4 res = j.A0 * ydot + j.adv[0] * grad.col(0) + j.adv[1] * grad.col(1) - source;
  res[1] += px;
  res[2] += py;
  res[3] += u * px + v * py + y[0] * div_v;
  return res;
}

double supg_tau(const Vec4& y, const Mat2& metric, double dt,
                const GasParams& gas, double c_i) {
  const double p = y[0], T = y[3];
  if (p <= 0.0 || T <= 0.0) invalid_state(y);
  const double rho = p / (gas.R * T);
  const double c2 = gas.gamma * gas.R * T;
  const Vec2 vel(y[1], y[2]);
  const double nu_visc = gas.mu / rho;
  const double nu_therm = gas.cp() * gas.mu / (gas.prandtl * rho * gas.cv());
  const double nu = std::max(nu_visc, nu_therm);
  const double gg = metric.squaredNorm();
  const double denom = 4.0 / (dt * dt) + vel.dot(metric * vel) +
                       c2 * metric.trace() + c_i * nu * nu * gg;
  return 1.0 / std::sqrt(denom);
}

double dc_viscosity(const Vec4& res, const GradY& grad, const Vec4& y,
                    const Mat2& metric, const GasParams& gas,
                    const StabConfig& stab, double dt) {
  const EulerJacobians j = euler_jacobians(y, gas);
  const Vec4 rate = j.A0.inverse() * res;
  double num = 0.0, den = 1e-16;
  for (int i = 0; i < 4; ++i) {
    const double g = 1.0 / (stab.y_ref[i] * stab.y_ref[i]);
    num += g * rate[i] * rate[i];
    const Vec2 gi = grad.row(i).transpose();
    den += g * gi.dot(metric * gi);
  }
  const double kdc = stab.c_dc * std::sqrt(num) / std::sqrt(den);
  // explicit time stepping cannot carry more diffusion than this
  const double cap = 0.5 / (dt * metric.trace());
  return std::min(kdc, cap);
}

std::vector<std::pair<int, int>> wall_normal_constraints(const BSplinePatch& patch) {
  std::vector<std::pair<int, int>> out;
  const int nx = patch.num_cp(0), ny = patch.num_cp(1);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (i == 0 || i == nx - 1) out.emplace_back(patch.cp_index(i, j), 1);
      if (j == 0 || j == ny - 1) out.emplace_back(patch.cp_index(i, j), 2);
    }
  return out;
}

namespace {

// Everything evaluated at one quadrature point, folded into the three
// generalized flux vectors so the scatter loop is a plain fused multiply-add:
//   R_A += w (N_A g0 + N_A,1 g1 + N_A,2 g2)
struct PointTerms {
  Vec4 g0, g1, g2;
  Mat4 a0;
};

PointTerms point_terms(const Vec4& y, const Vec4& ydot, const GradY& grad,
                       const GasParams& gas, const StabConfig& stab,
                       const Mat2& metric, double dt, const Vec4& source) {
  const EulerJacobians j = euler_jacobians(y, gas);
  const FluxSet f = fluxes(y, grad, gas);

  const Vec4 spatial =
      j.adv[0] * grad.col(0) + j.adv[1] * grad.col(1) - source;
  Vec4 res = spatial + j.A0 * ydot;
  res[1] += grad(0, 0);
  res[2] += grad(0, 1);
  res[3] += y[1] * grad(0, 0) + y[2] * grad(0, 1) + y[0] * (grad(1, 0) + grad(2, 1));

  const double tau = supg_tau(y, metric, dt, gas, stab.c_i);
  const double kdc = dc_viscosity(res, grad, y, metric, gas, stab, dt);

  PointTerms t;
  t.a0 = j.A0;
  t.g0 = spatial;
  t.g1 = f.viscous[0] - f.pressure[0] + tau * (j.adv[0] * res) + kdc * (j.A0 * grad.col(0));
  t.g2 = f.viscous[1] - f.pressure[1] + tau * (j.adv[1] * res) + kdc * (j.A0 * grad.col(1));
  return t;
}

}  // namespace

void assemble_fluid_residual(const BSplinePatch& patch, const Field& y,
                             const Field& ydot, const GasParams& gas,
                             const StabConfig& stab, double dt,
                             const PointQuadrature* solid_region,
                             const VolumeSource* source, Field& residual,
                             std::vector<Mat4>* lumped_mass, WorkerPool& pool) {
  const int ncp = patch.num_cp_total();
  const int p = patch.degree();
  const int n1 = p + 1;
  const int nfun = n1 * n1;
  const int nelx = patch.num_elems(0), nely = patch.num_elems(1);
  const Mat2 metric = patch.element_metric();

  // 1D basis tables at the Gauss points of every span.
  double gp[6], gw[6];
  gauss_rule(n1, gp, gw);
  struct Table1d {
    std::vector<double> val, der;  // [elem][qp][func]
  };
  Table1d tab[2];
  for (int dir = 0; dir < 2; ++dir) {
    const int ne = patch.num_elems(dir);
    const double h = patch.element_size(dir);
    const double lo = dir == 0 ? patch.domain().x0 : patch.domain().y0;
    tab[dir].val.resize(static_cast<std::size_t>(ne) * n1 * n1);
    tab[dir].der.resize(static_cast<std::size_t>(ne) * n1 * n1);
    for (int e = 0; e < ne; ++e)
      for (int q = 0; q < n1; ++q) {
        const double x = lo + h * (e + 0.5 * (gp[q] + 1.0));
        int first = 0;
        patch.basis_1d(dir, x, e, &tab[dir].val[(e * n1 + q) * n1],
                       &tab[dir].der[(e * n1 + q) * n1], &first);
      }
  }
  const double wdet = 0.25 * patch.element_size(0) * patch.element_size(1);

  const int workers = pool.workers();
  std::vector<Field> racc(workers);
  std::vector<std::vector<Mat4>> macc(lumped_mass ? workers : 0);
  for (int w = 0; w < workers; ++w) {
    racc[w].setZero(4, ncp);
    if (lumped_mass) macc[w].assign(ncp, Mat4::Zero());
  }

  const std::size_t nel = static_cast<std::size_t>(nelx) * nely;
  std::exception_ptr failure;
  std::mutex failure_mu;

  pool.for_chunks(nel, [&](int w, std::size_t begin, std::size_t end) {
    try {
      Field& racc_w = racc[w];
      std::vector<Mat4>* macc_w = lumped_mass ? &macc[w] : nullptr;
      int cp_idx[BasisEval::kMaxFuncs];
      double yl[BasisEval::kMaxFuncs][4], ydl[BasisEval::kMaxFuncs][4];
      double rl[BasisEval::kMaxFuncs][4];
      double ml[BasisEval::kMaxFuncs][16];

      for (std::size_t el = begin; el < end; ++el) {
        const int ex = static_cast<int>(el % nelx);
        const int ey = static_cast<int>(el / nelx);

        for (int j = 0; j < n1; ++j)
          for (int i = 0; i < n1; ++i) {
            const int k = j * n1 + i;
            const int cp = patch.cp_index(ex + i, ey + j);
            cp_idx[k] = cp;
            for (int c = 0; c < 4; ++c) {
              yl[k][c] = y(c, cp);
              ydl[k][c] = ydot(c, cp);
            }
            for (int c = 0; c < 4; ++c) rl[k][c] = 0.0;
            if (macc_w)
              for (int c = 0; c < 16; ++c) ml[k][c] = 0.0;
          }

        for (int qb = 0; qb < n1; ++qb)
          for (int qa = 0; qa < n1; ++qa) {
            const double* bx = &tab[0].val[(ex * n1 + qa) * n1];
            const double* dx = &tab[0].der[(ex * n1 + qa) * n1];
            const double* by = &tab[1].val[(ey * n1 + qb) * n1];
            const double* dy = &tab[1].der[(ey * n1 + qb) * n1];

            double N[BasisEval::kMaxFuncs], Gx[BasisEval::kMaxFuncs],
                Gy[BasisEval::kMaxFuncs];
            Vec4 yq = Vec4::Zero(), ydq = Vec4::Zero();
            GradY gq = GradY::Zero();
            for (int j = 0; j < n1; ++j)
              for (int i = 0; i < n1; ++i) {
                const int k = j * n1 + i;
                N[k] = bx[i] * by[j];
                Gx[k] = dx[i] * by[j];
                Gy[k] = bx[i] * dy[j];
                for (int c = 0; c < 4; ++c) {
                  yq[c] += N[k] * yl[k][c];
                  ydq[c] += N[k] * ydl[k][c];
                  gq(c, 0) += Gx[k] * yl[k][c];
                  gq(c, 1) += Gy[k] * yl[k][c];
                }
              }

            Vec4 src = Vec4::Zero();
            if (source) {
              const double px = patch.domain().x0 +
                                patch.element_size(0) * (ex + 0.5 * (gp[qa] + 1.0));
              const double py = patch.domain().y0 +
                                patch.element_size(1) * (ey + 0.5 * (gp[qb] + 1.0));
              src = (*source)(Vec2(px, py));
            }

            const double wq = gw[qa] * gw[qb] * wdet;
            const PointTerms t =
                point_terms(yq, ydq, gq, gas, stab, metric, dt, src);
            for (int k = 0; k < nfun; ++k) {
              for (int c = 0; c < 4; ++c)
                rl[k][c] += wq * (N[k] * t.g0[c] + Gx[k] * t.g1[c] + Gy[k] * t.g2[c]);
              if (macc_w) {
                const double wn = wq * N[k];
                for (int c = 0; c < 16; ++c) ml[k][c] += wn * t.a0.data()[c];
              }
            }
          }

        for (int k = 0; k < nfun; ++k) {
          for (int c = 0; c < 4; ++c) racc_w(c, cp_idx[k]) += rl[k][c];
          if (macc_w)
            for (int c = 0; c < 16; ++c)
              (*macc_w)[cp_idx[k]].data()[c] += ml[k][c];
        }
      }
    } catch (...) {
      std::lock_guard lk(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);

  // Subtract the same forms over the solid region with nodal quadrature.
  if (solid_region && solid_region->size() > 0) {
    pool.for_chunks(solid_region->size(), [&](int w, std::size_t begin,
                                              std::size_t end) {
      try {
        Field& racc_w = racc[w];
        std::vector<Mat4>* macc_w = lumped_mass ? &macc[w] : nullptr;
        for (std::size_t n = begin; n < end; ++n) {
          const Vec2& xp = solid_region->points[n];
          const double vp = solid_region->weights[n];
          const BasisEval be = patch.eval_basis(xp);

          Vec4 yq = Vec4::Zero(), ydq = Vec4::Zero();
          GradY gq = GradY::Zero();
          for (int k = 0; k < be.count; ++k) {
            const int cp = be.index[k];
            for (int c = 0; c < 4; ++c) {
              yq[c] += be.value[k] * y(c, cp);
              ydq[c] += be.value[k] * ydot(c, cp);
              gq(c, 0) += be.grad[k].x() * y(c, cp);
              gq(c, 1) += be.grad[k].y() * y(c, cp);
            }
          }
          Vec4 src = source ? (*source)(xp) : Vec4::Zero();
          const PointTerms t =
              point_terms(yq, ydq, gq, gas, stab, metric, dt, src);
          for (int k = 0; k < be.count; ++k) {
            const int cp = be.index[k];
            for (int c = 0; c < 4; ++c)
              racc_w(c, cp) -= vp * (be.value[k] * t.g0[c] +
                                     be.grad[k].x() * t.g1[c] +
                                     be.grad[k].y() * t.g2[c]);
            if (macc_w) {
              // Subtract momentum rows only: fully covered control points
              // would otherwise keep a quadrature-noise mass on the p/T rows
              // and their update degenerates. The spatial forms above are
              // still subtracted in full.
              Mat4 sub = vp * be.value[k] * t.a0;
              sub.row(0).setZero();
              sub.row(3).setZero();
              (*macc_w)[cp] -= sub;
            }
          }
        }
      } catch (...) {
        std::lock_guard lk(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    });
    if (failure) std::rethrow_exception(failure);
  }

  residual = racc[0];
  for (int w = 1; w < workers; ++w) residual += racc[w];
  if (lumped_mass) {
    *lumped_mass = macc[0];
    for (int w = 1; w < workers; ++w)
      for (int a = 0; a < ncp; ++a) (*lumped_mass)[a] += macc[w][a];
  }
}

}  // namespace perifsi
