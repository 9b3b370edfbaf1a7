#include <doctest.h>

#include <cmath>
#include <functional>

#include "perifsi/bspline.hpp"
#include "test_util.hpp"

using namespace perifsi;

TEST_CASE("uniform patch control-point counts") {
  const auto p1 = BSplinePatch::uniform({0, 0, 1, 1}, 2, 2, 2);
  CHECK(p1.num_cp(0) == 4);
  CHECK(p1.num_cp(1) == 4);

  const auto p2 = BSplinePatch::uniform({0, 0, 0.4, 0.4}, 40, 40, 2);
  CHECK(p2.num_cp(0) == 42);
  CHECK(p2.num_cp(1) == 42);

  const auto p3 = BSplinePatch::uniform({0, 0, 1, 1}, 1, 1, 1);
  CHECK(p3.num_cp(0) == 2);
  CHECK(p3.num_cp(1) == 2);
  CHECK(p3.num_cp_total() == 4);
}

TEST_CASE("uniform patch rejects bad input") {
  CHECK_THROWS_AS(BSplinePatch::uniform({0, 0, 1, 1}, 0, 2, 2), Error);
  CHECK_THROWS_AS(BSplinePatch::uniform({0, 0, 1, 1}, 2, -1, 2), Error);
  CHECK_THROWS_AS(BSplinePatch::uniform({0, 0, 0, 1}, 2, 2, 2), Error);
  CHECK_THROWS_AS(BSplinePatch::uniform({0, 0, 1, 1}, 2, 2, 0), Error);
}

TEST_CASE("partition of unity and zero gradient sum") {
  const auto patch = BSplinePatch::uniform({0, 0, 0.4, 0.4}, 7, 5, 2);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec2 x = testutil::uniform_point(patch.domain());
    const BasisEval be = patch.eval_basis(x);
    double sum = 0.0;
    Vec2 gsum = Vec2::Zero();
    for (int k = 0; k < be.count; ++k) {
      sum += be.value[k];
      gsum += be.grad[k];
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
    CHECK(gsum.norm() < 1e-12 / patch.element_size(0));
  }
}

TEST_CASE("corner interpolation") {
  const auto patch = BSplinePatch::uniform({0, 0, 1, 1}, 3, 3, 2);
  const BasisEval be = patch.eval_basis({0.0, 0.0});
  double vmax = 0.0;
  int argmax = -1;
  for (int k = 0; k < be.count; ++k)
    if (be.value[k] > vmax) {
      vmax = be.value[k];
      argmax = be.index[k];
    }
  CHECK(vmax == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(argmax == patch.cp_index(0, 0));
  for (int k = 0; k < be.count; ++k)
    if (be.index[k] != argmax) CHECK(std::abs(be.value[k]) < 1e-14);
}

TEST_CASE("linear field reproduced from Greville control values") {
  const auto patch = BSplinePatch::uniform({0, 0, 2, 1}, 4, 3, 2);
  const Vec2 a(0.7, -1.3);
  const double c = 0.25;
  std::vector<double> cp(patch.num_cp_total());
  for (int j = 0; j < patch.num_cp(1); ++j)
    for (int i = 0; i < patch.num_cp(0); ++i)
      cp[patch.cp_index(i, j)] = a.dot(patch.greville(i, j)) + c;

  for (int trial = 0; trial < 200; ++trial) {
    const Vec2 x = testutil::uniform_point(patch.domain());
    const BasisEval be = patch.eval_basis(x);
    double v = 0.0;
    Vec2 g = Vec2::Zero();
    for (int k = 0; k < be.count; ++k) {
      v += be.value[k] * cp[be.index[k]];
      g += be.grad[k] * cp[be.index[k]];
    }
    CHECK(std::abs(v - (a.dot(x) + c)) < 1e-12);
    CHECK((g - a).norm() < 1e-10);
  }
}

TEST_CASE("element location and tie-breaking") {
  const auto patch = BSplinePatch::uniform({0, 0, 1, 1}, 2, 2, 2);
  CHECK(patch.locate_element_1d(0, 0.25) == 0);
  CHECK(patch.locate_element_1d(0, 0.5) == 0);  // boundary goes down
  CHECK(patch.locate_element_1d(0, 1.0) == 1);  // closed upper boundary
  CHECK(patch.locate_element_1d(0, 0.0) == 0);
  CHECK_THROWS_AS(patch.locate_element_1d(0, -0.01), Error);
  CHECK_THROWS_AS(patch.locate_element({0.5, 1.01}), Error);
}

TEST_CASE("element quadrature") {
  const auto patch = BSplinePatch::uniform({0, 0, 0.1, 0.1}, 10, 10, 2);
  const QuadratureRule rule = patch.element_quadrature(3, 7);
  CHECK(rule.size() == 9);
  double wsum = 0.0;
  for (const auto& qp : rule) wsum += qp.weight;
  CHECK(wsum == doctest::Approx(1e-4).epsilon(1e-13));

  // integral of x over the unit square
  const auto unit = BSplinePatch::uniform({0, 0, 1, 1}, 4, 4, 2);
  double integral = 0.0;
  for (int ey = 0; ey < 4; ++ey)
    for (int ex = 0; ex < 4; ++ex)
      for (const auto& qp : unit.element_quadrature(ex, ey))
        integral += qp.weight * qp.x.x();
  CHECK(std::abs(integral - 0.5) < 1e-14);
}

namespace {

// Control values interpolating f at the Greville abscissae (collocation solve);
// gives exact reproduction for any polynomial within the spline space.
std::vector<double> collocate(const BSplinePatch& patch,
                              const std::function<double(Vec2)>& f) {
  const int n = patch.num_cp_total();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b(n);
  for (int j = 0; j < patch.num_cp(1); ++j)
    for (int i = 0; i < patch.num_cp(0); ++i) {
      const int row = patch.cp_index(i, j);
      const Vec2 g = patch.greville(i, j);
      const BasisEval be = patch.eval_basis(g);
      for (int k = 0; k < be.count; ++k) A(row, be.index[k]) = be.value[k];
      b[row] = f(g);
    }
  Eigen::VectorXd c = A.partialPivLu().solve(b);
  return {c.data(), c.data() + n};
}

}  // namespace

TEST_CASE("polynomial reproduction at the patch degree") {
  for (int degree = 1; degree <= 3; ++degree) {
    const auto patch = BSplinePatch::uniform({0, 0, 1.5, 1.0}, 4, 3, degree);
    auto poly = [degree](Vec2 x) {
      double v = 1.0 + x.x() - 0.5 * x.y();
      if (degree >= 2) v += 0.75 * x.x() * x.x() - 1.25 * x.x() * x.y();
      if (degree >= 3) v += 0.3 * x.y() * x.y() * x.x();
      return v;
    };
    const auto cp = collocate(patch, poly);
    for (int trial = 0; trial < 100; ++trial) {
      const Vec2 x = testutil::uniform_point(patch.domain());
      const BasisEval be = patch.eval_basis(x);
      double v = 0.0;
      for (int k = 0; k < be.count; ++k) v += be.value[k] * cp[be.index[k]];
      CHECK(std::abs(v - poly(x)) < 1e-10 * std::max(1.0, std::abs(poly(x))));
    }
    // quadrature integrates the representation exactly
    double num = 0.0;
    for (int ey = 0; ey < patch.num_elems(1); ++ey)
      for (int ex = 0; ex < patch.num_elems(0); ++ex)
        for (const auto& qp : patch.element_quadrature(ex, ey)) {
          const BasisEval be = patch.eval_basis(qp.x);
          double v = 0.0;
          for (int k = 0; k < be.count; ++k) v += be.value[k] * cp[be.index[k]];
          num += qp.weight * v;
        }
    double exact = 0.0;
    // dense reference quadrature of the analytic polynomial
    const int m = 80;
    const double hx = patch.domain().width() / m, hy = patch.domain().height() / m;
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        exact += hx * hy *
                 poly({patch.domain().x0 + (i + 0.5) * hx,
                       patch.domain().y0 + (j + 0.5) * hy});
    CHECK(num == doctest::Approx(exact).epsilon(1e-4));
  }
}
