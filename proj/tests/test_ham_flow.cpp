#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "symlab/calabi.hpp"
#include "symlab/families.hpp"

#include <random>

using namespace symlab;

namespace {

PlaneMap rotation_map(const GridSpec& g, double theta) {
  const Eigen::Rotation2Dd R(theta);
  PlaneMap m = PlaneMap::from_function(g, [&](const Vec2& x) { return (R * x).eval(); }, kInf);
  return m;
}

ScalarTimeField cubic_poly() {
  return ScalarTimeField([](double, const Vec2& x) { return x.x() * x.x() * x.y() + 0.5 * x.y() * x.y() * x.y(); },
                         kInf, 8);
}

}  // namespace

TEST_CASE("vector_field examples") {
  const auto Z = ScalarTimeField::zero();
  CHECK(vector_field(Z, 0.3, Vec2(0.2, 0.1)).norm() == 0.0);
  const auto rot = rotation_hamiltonian();
  const Vec2 v = vector_field(rot, 0.0, Vec2(1, 0));
  CHECK(v.x() == doctest::Approx(0.0));
  CHECK(v.y() == doctest::Approx(-1.0));
}

TEST_CASE("finite difference field is second order") {
  const auto H = cubic_poly();
  const Vec2 x(0.3, -0.2);
  // analytic: H_q = 2 q p, H_p = q^2 + 1.5 p^2
  const Vec2 exact(x.x() * x.x() + 1.5 * x.y() * x.y(), -2 * x.x() * x.y());
  const double e1 = (vector_field_fd(H, 0, x, 1e-2) - exact).norm();
  const double e2 = (vector_field_fd(H, 0, x, 5e-3) - exact).norm();
  CHECK(e1 < 1e-4);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("vector_field rejects points outside coverage") {
  CHECK_THROWS_AS(vector_field(rotation_hamiltonian(), 0, Vec2(2, 0)), std::out_of_range);
}

TEST_CASE("integrate_flow examples") {
  const Vec2 x0(0.4, -0.3);
  CHECK(integrate_flow(ScalarTimeField::zero(), 0, 1, x0, 1e-3) == x0);
  const Vec2 x = integrate_flow(rotation_hamiltonian(), 0, kPi / 2, Vec2(1, 0), 1e-3);
  CHECK((x - Vec2(0, -1)).norm() < 1e-8);
  const auto H = radial_bump(1.0, 0.8);
  const Vec2 y = integrate_flow(H, 0, 1, x0, 1e-3);
  CHECK((integrate_flow(H, 1, 0, y, 1e-3) - x0).norm() < 1e-8);
}

TEST_CASE("points outside the support never move") {
  const auto H = radial_bump(1.0, 0.6);
  const Vec2 x0(0.61, 0.0);
  CHECK(integrate_flow(H, 0, 1, x0, 1e-3) == x0);
}

TEST_CASE("rk4 order on the rotation test") {
  const auto rot = rotation_hamiltonian();
  const Vec2 exact(std::cos(1.0), -std::sin(1.0));
  const double e1 = (integrate_flow(rot, 0, 1, Vec2(1, 0), 0.1) - exact).norm();
  const double e2 = (integrate_flow(rot, 0, 1, Vec2(1, 0), 0.05) - exact).norm();
  CHECK(e1 / e2 >= 14.0);
}

TEST_CASE("flow leaving coverage reports its last state") {
  const auto rot = rotation_hamiltonian();
  try {
    integrate_flow(rot, 0, 1, Vec2(1.2, 0), 1e-2, 1.0);
    FAIL("expected FlowExit");
  } catch (const FlowExit& e) {
    CHECK(e.last_state.norm() == doctest::Approx(1.2));
  }
}

TEST_CASE("flow_map examples") {
  const GridSpec g{64, 1.0, Vec2::Zero()};
  const auto H = radial_bump(1.0, 0.8);
  const PlaneMap m0 = flow_map(H, 0.0, g);
  CHECK(m0.identity_defect() == 0.0);
  double moved = 0;
  for (Index j = 0; j < g.nodes(); ++j)
    for (Index i = 0; i < g.nodes(); ++i) moved = std::max(moved, (m0.node_image(i, j) - g.node(i, j)).norm());
  CHECK(moved == 0.0);

  FlowOptions fo;
  fo.jacobian = true;
  const PlaneMap m1 = flow_map(H, 1.0, g, fo);
  CHECK(m1.max_det_defect() < 1e-6);
  CHECK(m1.identity_defect() == 0.0);
  CHECK(group_law_defect(H, 0.5, 0.5, g, 1e-3) < 1e-7);
}

TEST_CASE("symplecticity at the acceptance resolution") {
  const GridSpec g{256, 1.0, Vec2::Zero()};
  FlowOptions fo;
  fo.jacobian = true;
  for (const auto& H : {radial_bump(1.0, 0.8), moving_bump(0.5, 0.4, 0.3)}) {
    CHECK(flow_map(H, 1.0, g, fo).max_det_defect() < 1e-5);
  }
}

TEST_CASE("hofer_length examples") {
  CHECK(hofer_length(ScalarTimeField::zero()) == 0.0);
  const ScalarTimeField c([](double t, const Vec2&) { return std::sin(3 * t); }, kInf);
  CHECK(hofer_length(c) == doctest::Approx(0.0));
  const ScalarTimeField bump = radial_bump(1.0, 1.0, 2);
  CHECK(std::abs(hofer_length(bump) - 1.0) < 1e-6);
}

TEST_CASE("c0_distance examples") {
  const GridSpec g{64, 1.0, Vec2::Zero()};
  const PlaneMap id = PlaneMap::identity(g);
  const auto H = radial_bump(1.0, 0.8);
  const PlaneMap phi = flow_map(H, 1.0, g);
  CHECK(c0_distance(phi, phi) == 0.0);
  CHECK(c0_distance(phi, id) == doctest::Approx(c0_distance(id, phi)).epsilon(1e-12));
  const double theta = 0.7;
  CHECK(std::abs(c0_distance(id, rotation_map(g, theta)) - 2 * std::sin(theta / 2)) < 1e-6);
}

TEST_CASE("c0_distance triangle inequality") {
  const GridSpec g{32, 1.0, Vec2::Zero()};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 5; ++k) {
    const PlaneMap a = rotation_map(g, u(rng)), b = rotation_map(g, u(rng)), c = rotation_map(g, u(rng));
    CHECK(c0_distance(a, c) <= c0_distance(a, b) + c0_distance(b, c) + 1e-12);
  }
}

TEST_CASE("inverse by backward flow matches newton inversion") {
  const GridSpec g{64, 1.0, Vec2::Zero()};
  FlowOptions fo;
  fo.inverse = true;
  const auto H = radial_bump(0.3, 0.8);
  const PlaneMap a = flow_map(H, 1.0, g, fo);
  const PlaneMap b = flow_map(H, 1.0, g);
  for (const Vec2& y : {Vec2(0.2, 0.1), Vec2(-0.5, 0.3), Vec2(0.05, -0.7)}) {
    const Vec2 exact = integrate_flow(H, 1.0, 0.0, y, 1e-3);
    CHECK((a.inverse(y) - exact).norm() < 1e-4);
    CHECK((b.inverse(y) - exact).norm() < 1e-4);
  }
}

TEST_CASE("ham_distance examples") {
  const auto H = moving_bump(0.3, 0.4, 0.3);
  HamDistanceOptions o;
  o.c0_grid = 32;
  o.c0_times = 4;
  o.osc = {32, 8};
  CHECK(ham_distance(H, H, o).total() < 1e-6);

  const ScalarTimeField K([H](double t, const Vec2& x) { return H(t, x) + 0.2 * t; }, kInf, 3,
                          {[H](double t, const Vec2& x) { return H.gradient(t, x); }, {}});
  const HamDistance d = ham_distance(H, K, o);
  CHECK(d.c0 < 1e-12);  // identical flows, stored inverses
  CHECK(d.hofer < 1e-6);

  const auto scaled = [&](double s) {
    return ScalarTimeField([H, s](double t, const Vec2& x) { return s * H(t, x); }, H.support_radius(), 3,
                           {[H, s](double t, const Vec2& x) { return (s * H.gradient(t, x)).eval(); }, {}});
  };
  const double d1 = ham_distance(H, scaled(1.1), o).total();
  const double d2 = ham_distance(H, scaled(1.2), o).total();
  CHECK(d1 > 0);
  CHECK(d2 > d1);
}
