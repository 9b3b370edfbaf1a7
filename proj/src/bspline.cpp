#include "perifsi/bspline.hpp"

#include <cmath>
#include <cstdio>

namespace perifsi {

BSplinePatch BSplinePatch::uniform(const Rect& domain, int elems_x, int elems_y,
                                   int degree) {
  if (elems_x < 1 || elems_y < 1)
    throw Error(ErrorKind::config, "patch element counts must be >= 1");
  if (degree < 1 || degree + 1 > 6)
    throw Error(ErrorKind::config, "patch degree must be in [1, 5]");
  if (domain.width() <= 0.0 || domain.height() <= 0.0)
    throw Error(ErrorKind::config, "patch domain must have positive area");

  BSplinePatch p;
  p.domain_ = domain;
  p.degree_ = degree;
  p.nel_ = {elems_x, elems_y};
  p.ncp_ = {elems_x + degree, elems_y + degree};
  p.h_ = {domain.width() / elems_x, domain.height() / elems_y};

  const double lo[2] = {domain.x0, domain.y0};
  for (int dir = 0; dir < 2; ++dir) {
    auto& U = p.knots_[dir];
    U.assign(degree + 1, lo[dir]);
    for (int k = 1; k < p.nel_[dir]; ++k) U.push_back(lo[dir] + k * p.h_[dir]);
    const double hi = dir == 0 ? domain.x1 : domain.y1;
    U.insert(U.end(), degree + 1, hi);
  }
  return p;
}

Mat2 BSplinePatch::element_metric() const {
  Mat2 g = Mat2::Zero();
  g(0, 0) = 4.0 / (h_[0] * h_[0]);
  g(1, 1) = 4.0 / (h_[1] * h_[1]);
  return g;
}

int BSplinePatch::locate_element_1d(int dir, double x) const {
  const double lo = dir == 0 ? domain_.x0 : domain_.y0;
  const double hi = dir == 0 ? domain_.x1 : domain_.y1;
  if (x < lo || x > hi) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "point coordinate %.17g outside [%.17g, %.17g]",
                  x, lo, hi);
    throw Error(ErrorKind::domain, buf);
  }
  // Ties on span boundaries go to the lower element.
  int e = static_cast<int>(std::ceil((x - lo) / h_[dir])) - 1;
  if (e < 0) e = 0;
  if (e >= nel_[dir]) e = nel_[dir] - 1;
  // Guard against ceil landing one span off for values just below a knot.
  if (x > lo + (e + 1) * h_[dir]) ++e;
  if (e > 0 && x <= lo + e * h_[dir]) --e;
  if (e < 0) e = 0;
  if (e >= nel_[dir]) e = nel_[dir] - 1;
  return e;
}

std::array<int, 2> BSplinePatch::locate_element(const Vec2& x) const {
  return {locate_element_1d(0, x.x()), locate_element_1d(1, x.y())};
}

// Values and first derivatives of the degree+1 nonzero functions on span
// `elem`, following the standard Cox-de Boor derivative recursion.
void BSplinePatch::basis_1d(int dir, double x, int elem, double* values,
                            double* derivs, int* first_func) const {
  const int p = degree_;
  const auto& U = knots_[dir];
  const int span = elem + p;  // open uniform knots
  *first_func = elem;

  // ndu[j][r]: triangular table of basis values of degree j.
  double ndu[6][6];
  double left[6], right[6];
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - U[span + 1 - j];
    right[j] = U[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = ndu[j - 1][r] / denom;
      ndu[j][r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  for (int r = 0; r <= p; ++r) values[r] = ndu[p][r];

  // First derivative from the degree p-1 values.
  for (int r = 0; r <= p; ++r) {
    double d = 0.0;
    if (r > 0) {
      const double denom = U[span + r] - U[span + r - p];
      d += ndu[p - 1][r - 1] / denom;
    }
    if (r < p) {
      const double denom = U[span + r + 1] - U[span + r + 1 - p];
      d -= ndu[p - 1][r] / denom;
    }
    derivs[r] = p * d;
  }
}

BasisEval BSplinePatch::eval_basis(const Vec2& x) const {
  const auto elem = locate_element(x);
  const int p = degree_;

  double vx[6], dx[6], vy[6], dy[6];
  int fx = 0, fy = 0;
  basis_1d(0, x.x(), elem[0], vx, dx, &fx);
  basis_1d(1, x.y(), elem[1], vy, dy, &fy);

  BasisEval out;
  out.count = (p + 1) * (p + 1);
  int k = 0;
  for (int j = 0; j <= p; ++j) {
    for (int i = 0; i <= p; ++i, ++k) {
      out.index[k] = cp_index(fx + i, fy + j);
      out.value[k] = vx[i] * vy[j];
      out.grad[k] = Vec2(dx[i] * vy[j], vx[i] * dy[j]);
    }
  }
  return out;
}

QuadratureRule BSplinePatch::element_quadrature(int ex, int ey) const {
  if (ex < 0 || ex >= nel_[0] || ey < 0 || ey >= nel_[1])
    throw Error(ErrorKind::domain, "element index out of range");
  const int n = degree_ + 1;
  double gp[6], gw[6];
  gauss_rule(n, gp, gw);

  const double x0 = domain_.x0 + ex * h_[0];
  const double y0 = domain_.y0 + ey * h_[1];
  const double jx = 0.5 * h_[0];
  const double jy = 0.5 * h_[1];

  QuadratureRule rule;
  rule.reserve(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      rule.push_back({Vec2(x0 + jx * (gp[i] + 1.0), y0 + jy * (gp[j] + 1.0)),
                      gw[i] * gw[j] * jx * jy});
  return rule;
}

Vec2 BSplinePatch::greville(int i, int j) const {
  const int p = degree_;
  double g[2];
  const int idx[2] = {i, j};
  for (int dir = 0; dir < 2; ++dir) {
    const auto& U = knots_[dir];
    double s = 0.0;
    for (int k = 1; k <= p; ++k) s += U[idx[dir] + k];
    g[dir] = s / p;
  }
  return {g[0], g[1]};
}

void gauss_rule(int n, double* points, double* weights) {
  switch (n) {
    case 1:
      points[0] = 0.0;
      weights[0] = 2.0;
      return;
    case 2: {
      const double a = 0.57735026918962576451;
      points[0] = -a; points[1] = a;
      weights[0] = weights[1] = 1.0;
      return;
    }
    case 3: {
      const double a = 0.77459666924148337704;
      points[0] = -a; points[1] = 0.0; points[2] = a;
      weights[0] = weights[2] = 5.0 / 9.0;
      weights[1] = 8.0 / 9.0;
      return;
    }
    case 4: {
      const double a = 0.33998104358485626480, b = 0.86113631159405257522;
      const double wa = 0.65214515486254614263, wb = 0.34785484513745385737;
      points[0] = -b; points[1] = -a; points[2] = a; points[3] = b;
      weights[0] = weights[3] = wb;
      weights[1] = weights[2] = wa;
      return;
    }
    case 5: {
      const double a = 0.53846931010568309104, b = 0.90617984593866399280;
      const double w0 = 128.0 / 225.0;
      const double wa = 0.47862867049936646804, wb = 0.23692688505618908751;
      points[0] = -b; points[1] = -a; points[2] = 0.0; points[3] = a; points[4] = b;
      weights[0] = weights[4] = wb;
      weights[1] = weights[3] = wa;
      weights[2] = w0;
      return;
    }
    case 6: {
      const double a = 0.23861918608319690863, b = 0.66120938646626451366,
                   c = 0.93246951420315202781;
      const double wa = 0.46791393457269104739, wb = 0.36076157304813860757,
                   wc = 0.17132449237917034504;
      points[0] = -c; points[1] = -b; points[2] = -a;
      points[3] = a; points[4] = b; points[5] = c;
      weights[0] = weights[5] = wc;
      weights[1] = weights[4] = wb;
      weights[2] = weights[3] = wa;
      return;
    }
    default:
      throw Error(ErrorKind::config, "gauss rule supports 1..6 points");
  }
}

}  // namespace perifsi
