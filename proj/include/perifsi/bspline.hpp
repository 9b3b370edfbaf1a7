#ifndef PERIFSI_BSPLINE_HPP
#define PERIFSI_BSPLINE_HPP

#include <array>
#include <vector>

#include "perifsi/common.hpp"

namespace perifsi {

// Basis functions with support on one point: (px+1)*(py+1) entries.
struct BasisEval {
  static constexpr int kMaxFuncs = 36;  // degree up to 5
  int count = 0;
  std::array<int, kMaxFuncs> index{};    // global control-point index
  std::array<double, kMaxFuncs> value{};
  std::array<Vec2, kMaxFuncs> grad{};
};

struct QuadraturePoint {
  Vec2 x;         // physical location
  double weight;  // carries the element area
};

using QuadratureRule = std::vector<QuadraturePoint>;

// Tensor-product B-spline patch on an axis-aligned rectangle with open uniform
// knot vectors. The geometric map is the identity (knots live in physical
// coordinates), so basis derivatives are physical gradients directly.
// Immutable after construction; evaluation is safe from many threads.
class BSplinePatch {
public:
  static BSplinePatch uniform(const Rect& domain, int elems_x, int elems_y, int degree);

  const Rect& domain() const { return domain_; }
  int degree() const { return degree_; }
  int num_elems(int dir) const { return dir == 0 ? nel_[0] : nel_[1]; }
  int num_elems_total() const { return nel_[0] * nel_[1]; }
  int num_cp(int dir) const { return ncp_[0 != dir]; }
  int num_cp_total() const { return ncp_[0] * ncp_[1]; }
  double element_size(int dir) const { return h_[dir != 0]; }

  // Metric of the parent-element map, G_ij = sum_k dxi_k/dx_i dxi_k/dx_j.
  // Uniform rectangles make it constant across elements.
  Mat2 element_metric() const;

  // Knot span containing x, ties broken toward the lower element; the closed
  // upper domain boundary maps to the last element. Throws outside the domain.
  int locate_element_1d(int dir, double x) const;
  std::array<int, 2> locate_element(const Vec2& x) const;

  BasisEval eval_basis(const Vec2& x) const;

  QuadratureRule element_quadrature(int ex, int ey) const;

  // Greville abscissa of control point (i, j).
  Vec2 greville(int i, int j) const;

  int cp_index(int i, int j) const { return j * ncp_[0] + i; }

  // 1D basis values and first derivatives for the degree+1 functions that are
  // nonzero on the span containing x; first_func is the global 1D index of the
  // first of them (equal to the element index for open uniform knots).
  void basis_1d(int dir, double x, int elem, double* values, double* derivs,
                int* first_func) const;

private:
  Rect domain_;
  int degree_ = 2;
  std::array<int, 2> nel_{1, 1};
  std::array<int, 2> ncp_{2, 2};
  std::array<double, 2> h_{1.0, 1.0};
  std::array<std::vector<double>, 2> knots_;
};

// Gauss-Legendre rule with n points on [-1, 1]; n in [1, 6].
void gauss_rule(int n, double* points, double* weights);

}  // namespace perifsi

#endif
