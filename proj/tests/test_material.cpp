#include <doctest.h>

#include <cmath>

#include "perifsi/material.hpp"
#include "test_util.hpp"

using namespace perifsi;

namespace {

MaterialParams steel() { return MaterialParams{}; }

// plane-strain uniaxial modulus
double uniaxial_strain_modulus(const MaterialParams& m) {
  return m.youngs * (1.0 - m.poisson) /
         ((1.0 + m.poisson) * (1.0 - 2.0 * m.poisson));
}

}  // namespace

TEST_CASE("von Mises invariant") {
  Stress3 hydro;
  hydro.s11 = hydro.s22 = hydro.s33 = 3.7e8;
  CHECK(von_mises(hydro) == doctest::Approx(0.0).scale(3.7e8).epsilon(1e-14));

  Stress3 uni;
  uni.s11 = 2.5e8;
  CHECK(von_mises(uni) == doctest::Approx(2.5e8).epsilon(1e-14));

  Stress3 shear;
  shear.s12 = 1.1e8;
  CHECK(von_mises(shear) == doctest::Approx(std::sqrt(3.0) * 1.1e8).epsilon(1e-14));
}

TEST_CASE("parameter validation") {
  MaterialParams m = steel();
  m.poisson = 0.5;
  CHECK_THROWS_AS(m.validate(), Error);
  m = steel();
  m.law = DamageLaw::ductile;
  m.eqps_threshold = 0.3;
  m.eqps_critical = 0.2;
  CHECK_THROWS_AS(m.validate(), Error);
  m = steel();
  m.youngs = -1.0;
  CHECK_THROWS_AS(m.validate(), Error);
}

TEST_CASE("zero velocity gradient leaves the state alone") {
  Stress3 s;
  s.s11 = 1e8;
  s.s12 = -3e7;
  s.s33 = 2e7;
  double eqps = 0.01;
  const Stress3 before = s;
  const double d = stress_update(s, eqps, Mat2::Zero(), 1e-6, steel());
  CHECK(d == 0.0);
  CHECK(s.s11 == before.s11);
  CHECK(s.s22 == before.s22);
  CHECK(s.s33 == before.s33);
  CHECK(s.s12 == before.s12);
  CHECK(eqps == 0.01);
}

TEST_CASE("uniaxial strain below yield matches the plane-strain modulus") {
  const MaterialParams m = steel();
  Stress3 s;
  double eqps = 0.0;
  Mat2 L = Mat2::Zero();
  const double rate = 1.0;  // 1/s
  L(0, 0) = rate;
  const double dt = 1e-6;
  const int steps = 1000;  // total strain 1e-3, well below yield
  for (int k = 0; k < steps; ++k) stress_update(s, eqps, L, dt, m);
  const double strain = rate * dt * steps;
  CHECK(eqps == 0.0);
  CHECK(s.s11 / strain ==
        doctest::Approx(uniaxial_strain_modulus(m)).epsilon(1e-6));
  // out-of-plane follows nu * (s11 + s22) in the elastic range
  CHECK(s.s33 == doctest::Approx(m.poisson * (s.s11 + s.s22)).epsilon(1e-8));
}

TEST_CASE("bilinear hardening response past yield") {
  const MaterialParams m = steel();  // sigma_Y 0.4 GPa, H 0.1 GPa
  Stress3 s;
  double eqps = 0.0;
  Mat2 L = Mat2::Zero();
  L(0, 0) = 1.0;
  const double dt = 1e-5;
  std::vector<std::pair<double, double>> flow;  // (eqps, von Mises)
  for (int k = 0; k < 10000; ++k) {
    stress_update(s, eqps, L, dt, m);
    if (eqps > 0.0) flow.emplace_back(eqps, von_mises(s));
  }
  REQUIRE(flow.size() > 100);
  // yield onset at sigma_Y
  CHECK(flow.front().second ==
        doctest::Approx(m.yield_stress + m.hardening * flow.front().first)
            .epsilon(1e-10));
  // hardening slope H on the flow curve
  const auto [e0, s0] = flow[10];
  const auto [e1, s1] = flow.back();
  CHECK((s1 - s0) / (e1 - e0) == doctest::Approx(m.hardening).epsilon(0.01));
  // consistency: never above the hardened surface
  for (const auto& [e, vm] : flow)
    CHECK(vm - (m.yield_stress + m.hardening * e) <= 1e-8 * m.yield_stress);
}

TEST_CASE("rigid rotation preserves stress eigenvalues") {
  const MaterialParams m = steel();
  Stress3 s;
  s.s11 = 3e8;
  s.s22 = -1e8;
  s.s12 = 0.8e8;
  double eqps = 0.0;
  const Eigen::SelfAdjointEigenSolver<Mat2> before(s.in_plane());

  const int steps = 1000;
  const double omega = 2.0 * M_PI;  // one revolution in one second
  Mat2 L = Mat2::Zero();
  L(0, 1) = -omega;
  L(1, 0) = omega;
  for (int k = 0; k < steps; ++k) stress_update(s, eqps, L, 1.0 / steps, m);

  const Eigen::SelfAdjointEigenSolver<Mat2> after(s.in_plane());
  for (int i = 0; i < 2; ++i)
    CHECK(after.eigenvalues()[i] ==
          doctest::Approx(before.eigenvalues()[i]).epsilon(1e-4));
  CHECK(eqps == 0.0);  // pure spin generates no plastic flow
}

TEST_CASE("plastic strain and damage are monotone along random loading") {
  MaterialParams m = steel();
  m.law = DamageLaw::ductile;
  m.eqps_threshold = 0.01;
  m.eqps_critical = 0.05;
  BondState b;
  double prev_eqps = 0.0, prev_damage = 0.0, prev_omega = 1.0;
  for (int k = 0; k < 2000; ++k) {
    Mat2 L;
    L << testutil::uniform(-300, 300), testutil::uniform(-300, 300),
        testutil::uniform(-300, 300), testutil::uniform(-300, 300);
    stress_update(b.stress, b.eqps, L, 1e-5, m);
    damage_update_ductile(b, m.eqps_threshold, m.eqps_critical);
    CHECK(b.eqps >= prev_eqps);
    CHECK(b.damage >= prev_damage);
    CHECK(b.omega_d <= prev_omega);
    CHECK(b.damage >= 0.0);
    CHECK(b.damage <= 1.0);
    prev_eqps = b.eqps;
    prev_damage = b.damage;
    prev_omega = b.omega_d;
  }
  CHECK(prev_damage == 1.0);  // random walk accumulates enough plastic strain
}

TEST_CASE("brittle damage thresholds") {
  BondState b;
  b.stress.s11 = 2.9e9;  // von Mises 2.9 GPa
  damage_update_brittle(b, 3.0e9);
  CHECK(b.damage == 0.0);
  CHECK(b.omega_d == 1.0);

  b.stress.s11 = 3.1e9;
  damage_update_brittle(b, 3.0e9);
  CHECK(b.damage == 1.0);
  CHECK(b.omega_d == 0.0);

  // a broken bond stays broken whatever the stress does
  b.stress.s11 = 0.0;
  damage_update_brittle(b, 3.0e9);
  CHECK(b.damage == 1.0);
  CHECK(b.omega_d == 0.0);
}

TEST_CASE("ductile damage interpolation") {
  const double th = 0.18, cr = 0.2;
  BondState b;
  b.eqps = 0.10;
  damage_update_ductile(b, th, cr);
  CHECK(b.damage == 0.0);
  CHECK(b.omega_d == 1.0);

  b.eqps = 0.19;
  damage_update_ductile(b, th, cr);
  CHECK(b.damage == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(b.omega_d == doctest::Approx(0.5).epsilon(1e-12));

  b.eqps = 0.25;
  damage_update_ductile(b, th, cr);
  CHECK(b.damage == 1.0);
  CHECK(b.omega_d == 0.0);

  // clamped non-decreasing even if eqps were rewound
  b.eqps = 0.0;
  damage_update_ductile(b, th, cr);
  CHECK(b.damage == 1.0);
}
