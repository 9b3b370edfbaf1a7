#include <doctest.h>

#include <cmath>

#include "perifsi/integrator.hpp"
#include "perifsi/scenarios.hpp"
#include "perifsi/simulation.hpp"
#include "test_util.hpp"

using namespace perifsi;

namespace {

// scalar test system: ydot = lambda * y, unit mass
struct ScalarSystem {
  double lambda;
  double residual(double y, double ydot_alpha) const {
    return ydot_alpha - lambda * y;
  }
  double solve_mass(double r) const { return -r; }
};

double integrate_scalar(double lambda, double t_end, double dt,
                        const GenAlphaParams& p) {
  ScalarSystem sys{lambda};
  double y = 1.0, ydot = lambda;
  const long n = std::lround(t_end / dt);
  for (long k = 0; k < n; ++k) genalpha_step(sys, y, ydot, p, dt);
  return y;
}

// independent composition of the published pass algebra, as a 2x2 map on
// (y, dt*ydot); the oracle for the amplification factors
Eigen::Matrix2d amplification_oracle(double z, const GenAlphaParams& p) {
  const double am = p.alpha_m(), g = p.gamma();
  Eigen::Matrix2d M;
  for (int col = 0; col < 2; ++col) {
    double y0 = col == 0 ? 1.0 : 0.0;
    double a0 = col == 0 ? 0.0 : 1.0;  // a = dt * ydot
    const double yn = y0, an = a0;
    double a = an, y = yn;
    for (int k = 0; k < p.passes; ++k) {
      const double aal = an + am * (a - an);
      const double r = aal - z * y;
      a -= r / am;
      y = yn + (1.0 - g) * an + g * a;
    }
    M(0, col) = y;
    M(1, col) = a;
  }
  return M;
}

}  // namespace

TEST_CASE("second-order accuracy on the linear model problem") {
  GenAlphaParams p;  // rho_inf 0.5, 2 passes
  const double lambda = -2.0;
  const double exact = std::exp(lambda);
  double err[3];
  const double dts[3] = {0.02, 0.01, 0.005};
  for (int m = 0; m < 3; ++m)
    err[m] = std::abs(integrate_scalar(lambda, 1.0, dts[m], p) - exact);
  const double order1 = std::log2(err[0] / err[1]);
  const double order2 = std::log2(err[1] / err[2]);
  INFO("orders ", order1, " ", order2);
  CHECK(order1 >= 1.9);
  CHECK(order2 >= 1.9);
}

TEST_CASE("step map matches the composed amplification oracle") {
  for (double rho : {0.0, 0.3, 0.5, 1.0}) {
    GenAlphaParams p;
    p.rho_inf = rho;
    for (double z : {-0.5, -0.1, -0.01, 0.2}) {
      const Eigen::Matrix2d oracle = amplification_oracle(z, p);
      const double dt = 0.125;
      const double lambda = z / dt;
      ScalarSystem sys{lambda};
      // column probes of the linear step map
      for (int col = 0; col < 2; ++col) {
        double y = col == 0 ? 1.0 : 0.0;
        double ydot = col == 0 ? 0.0 : 1.0 / dt;  // a = dt*ydot = 1
        genalpha_step(sys, y, ydot, p, dt);
        CHECK(y == doctest::Approx(oracle(0, col)).epsilon(1e-13));
        CHECK(ydot * dt == doctest::Approx(oracle(1, col)).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("high-frequency rate mode: annihilated at rho_inf 0, kept at 1") {
  // the z -> 0 rate-mode amplification is -(1 - alpha_m)/alpha_m
  GenAlphaParams p0;
  p0.rho_inf = 0.0;
  const Eigen::Matrix2d m0 = amplification_oracle(0.0, p0);
  CHECK(m0(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  CHECK(std::pow(std::abs(m0(1, 1)), 3) < 0.05);  // gone within a few steps

  GenAlphaParams p1;
  p1.rho_inf = 1.0;
  const Eigen::Matrix2d m1 = amplification_oracle(0.0, p1);
  CHECK(m1(1, 1) == doctest::Approx(-1.0).epsilon(1e-13));

  // the production template reproduces both factors
  for (auto* p : {&p0, &p1}) {
    ScalarSystem sys{0.0};
    double y = 0.0, ydot = 1.0;
    genalpha_step(sys, y, ydot, *p, 1.0);
    const double expected = -(1.0 - p->alpha_m()) / p->alpha_m();
    CHECK(ydot == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("CFL estimate") {
  WorkerPool pool(1);
  ProblemSpec spec;
  spec.scenario = ScenarioKind::custom;
  spec.domain = {0, 0, 0.4, 0.4};
  spec.elements[0] = spec.elements[1] = 40;  // h = 0.01
  spec.ambient_pressure = 1e5;
  spec.ambient_temperature = 290.0;
  spec.end_time = 1.0;
  SimState s = build_state(spec, pool);

  const double c = std::sqrt(1.4 * 287.05 * 290.0);
  CHECK(cfl_estimate(s, pool) ==
        doctest::Approx(0.5 * 0.01 / c).epsilon(1e-6));
  CHECK(std::abs(cfl_estimate(s, pool) - 1.46e-5) < 2e-7);

  // doubling the element size doubles the bound
  ProblemSpec spec2 = spec;
  spec2.elements[0] = spec2.elements[1] = 20;
  SimState s2 = build_state(spec2, pool);
  CHECK(cfl_estimate(s2, pool) ==
        doctest::Approx(2.0 * cfl_estimate(s, pool)).epsilon(1e-9));

  // steel wave speed bound
  const MaterialParams steel;
  const double c_solid = std::sqrt(
      steel.youngs / (steel.density * (1.0 - steel.poisson * steel.poisson)));
  CHECK(std::abs(c_solid - 5.26e3) < 15.0);
  SimState s3 = build_state(spec, pool);
  s3.has_solid = true;
  s3.material = steel;
  s3.solid_spacing = 0.005;
  CHECK(cfl_estimate(s3, pool) ==
        doctest::Approx(0.5 * 0.005 / c_solid).epsilon(1e-9));
}

TEST_CASE("lumped mass blocks") {
  WorkerPool pool(1);
  const auto patch = BSplinePatch::uniform({0, 0, 0.4, 0.4}, 10, 10, 2);
  const GasParams gas;
  StabConfig stab;
  stab.y_ref = Vec4(1e5, 340, 340, 290);
  Field y(4, patch.num_cp_total());
  for (int a = 0; a < patch.num_cp_total(); ++a) y.col(a) = Vec4(1e5, 0, 0, 290);
  Field ydot = Field::Zero(4, patch.num_cp_total());

  Field r;
  std::vector<Mat4> mass;
  assemble_fluid_residual(patch, y, ydot, gas, stab, 1e-6, nullptr, nullptr, r,
                          &mass, pool);

  // continuity row total equals the integral of d(rho)/dp over the domain
  double total_p = 0.0, total_m = 0.0;
  for (const auto& m : mass) {
    total_p += m(0, 0);
    total_m += m(1, 1);
    CHECK(m(0, 0) > 0.0);
    CHECK(m(1, 1) > 0.0);
    CHECK(m(2, 2) > 0.0);
  }
  const double area = 0.4 * 0.4;
  CHECK(total_p == doctest::Approx(area / (gas.R * 290.0)).epsilon(1e-12));
  const double rho = 1e5 / (gas.R * 290.0);
  CHECK(total_m == doctest::Approx(area * rho).epsilon(1e-12));

  // the solid transfer raises momentum rows by exactly its mass
  PDNodeSet nodes;
  nodes.config.horizon = 0.01;
  append_node_grid(nodes, Vec2(0.1, 0.15), Vec2(0.2, 0.1), 30, 15, 7870.0);
  const CouplingMap map = build_coupling_map(patch, nodes, pool);
  std::vector<Mat4> with_solid = mass;
  transfer_lumped_mass(map, nodes, with_solid);
  double diff = 0.0;
  for (std::size_t a = 0; a < mass.size(); ++a)
    diff += with_solid[a](1, 1) - mass[a](1, 1);
  CHECK(diff == doctest::Approx(nodes.total_mass()).epsilon(1e-12));
}

TEST_CASE("quiescent equilibrium is a fixed point of the step") {
  WorkerPool pool(1);
  ProblemSpec spec;
  spec.domain = {0, 0, 0.4, 0.4};
  spec.elements[0] = spec.elements[1] = 12;
  spec.end_time = 1.0;
  SimState s = build_state(spec, pool);
  const Field y0 = s.y;
  step(s, pool);
  // relative drift at roundoff scale only
  CHECK((s.y.row(0) - y0.row(0)).cwiseAbs().maxCoeff() < 1e-12 * 1e5);
  CHECK((s.y.row(3) - y0.row(3)).cwiseAbs().maxCoeff() < 1e-12 * 290);
  CHECK(s.y.row(1).cwiseAbs().maxCoeff() < 1e-12 * 340);
}

TEST_CASE("closed chamber holds a quiescent state for 1000 steps") {
  WorkerPool pool(1);
  ProblemSpec spec;
  spec.domain = {0, 0, 0.4, 0.4};
  spec.elements[0] = spec.elements[1] = 12;
  spec.integrator.rho_inf = 0.5;
  spec.end_time = 1.0;
  SimState s = build_state(spec, pool);
  REQUIRE(s.dt > 0.0);
  for (int k = 0; k < 1000; ++k) step(s, pool);
  double dp = 0.0, dT = 0.0, dv = 0.0;
  for (int a = 0; a < s.y.cols(); ++a) {
    dp = std::max(dp, std::abs(s.y(0, a) - 1e5) / 1e5);
    dT = std::max(dT, std::abs(s.y(3, a) - 290.0) / 290.0);
    dv = std::max(dv, std::hypot(s.y(1, a), s.y(2, a)) / 340.0);
  }
  CHECK(dp < 1e-8);
  CHECK(dT < 1e-8);
  CHECK(dv < 1e-8);
}
