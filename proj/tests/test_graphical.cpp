#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "symlab/families.hpp"
#include "symlab/graphical.hpp"

#include <random>

using namespace symlab;

namespace {

PlaneMap time_one(const ScalarTimeField& H, int n) {
  FlowOptions fo;
  fo.jacobian = true;
  return flow_map(H, 1.0, GridSpec{n, 1.0, Vec2::Zero()}, fo);
}

const PlaneMap& small_bump_256() {
  static const PlaneMap m = time_one(radial_bump(0.05, 0.8, 4), 256);
  return m;
}

double max_node_distance(const PlaneMap& a, const PlaneMap& b) {
  const GridSpec g = a.grid();
  double worst = 0;
  for (Index j = 0; j < g.nodes(); ++j)
    for (Index i = 0; i < g.nodes(); ++i) worst = std::max(worst, (a.node_image(i, j) - b.node_image(i, j)).norm());
  return worst;
}

}  // namespace

TEST_CASE("midpoint_map examples") {
  const GridSpec g{64, 1.0, Vec2::Zero()};
  const PlaneMap id = PlaneMap::identity(g, 0.8);
  const PlaneMap k = midpoint_map(id, 0.5);
  CHECK(max_node_distance(k, id) == 0.0);

  const PlaneMap phi = time_one(moving_bump(0.1, 0.4, 0.3), 64);
  const PlaneMap k1 = midpoint_map(phi, 1.0);
  for (double a : {0.5, 0.75}) {
    const PlaneMap ka = midpoint_map(phi, a);
    double worst = 0;
    for (Index j = 0; j < g.nodes(); j += 3)
      for (Index i = 0; i < g.nodes(); i += 3) {
        const Vec2 y = g.node(i, j);
        worst = std::max(worst, std::abs(ka.jacobian(y).determinant() - k1.jacobian(y / a).determinant()));
      }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("is_graphical examples") {
  const GridSpec g{64, 1.0, Vec2::Zero()};
  const GraphicalCheck id = is_graphical(PlaneMap::identity(g, 0.8));
  CHECK(id.graphical);
  CHECK(id.min_det == 1.0);

  const GraphicalCheck small = is_graphical(time_one(radial_bump(0.05, 0.8), 64));
  CHECK(small.graphical);
  CHECK(small.min_det > 0.5);

  const GraphicalCheck strong = is_graphical(time_one(twist(), 128));
  CHECK_FALSE(strong.graphical);
  CHECK(strong.min_det < 0);
}

TEST_CASE("graphical scan matches a brute force determinant scan") {
  const PlaneMap phi = time_one(twist(0.2, 0.8), 64);
  const GridSpec g = phi.grid();
  double brute = 1.0;
  for (Index j = 0; j < g.nodes(); ++j)
    for (Index i = 0; i < g.nodes(); ++i)
      if (g.node(i, j).norm() < 0.8)
        brute = std::min(brute, (0.5 * (Mat2::Identity() + phi.node_jacobian(i, j))).determinant());
  CHECK(is_graphical(phi).min_det == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("recover_one_form of the identity vanishes") {
  const OneFormField a = recover_one_form(PlaneMap::identity(GridSpec{64, 1.0, Vec2::Zero()}, 0.8));
  CHECK(a.a1.values().abs().maxCoeff() == 0.0);
  CHECK(a.a2.values().abs().maxCoeff() == 0.0);
}

TEST_CASE("recovered one-form is closed and symmetric") {
  const OneFormField a = recover_one_form(small_bump_256());
  CHECK(closedness(a).max_circulation < 5e-5);
  CHECK(symmetry_defect(a, 1000, 3) < 5e-5);
}

TEST_CASE("recover_one_form rejects non graphical maps") {
  CHECK_THROWS_AS(recover_one_form(time_one(twist(), 64)), std::invalid_argument);
}

TEST_CASE("integrate_generating examples") {
  const GridSpec g{64, 1.0, Vec2::Zero()};
  const OneFormField zero{GridField2D(g, ArrayXXd::Zero(65, 65)), GridField2D(g, ArrayXXd::Zero(65, 65)), 0.8};
  const GeneratingFunction z = integrate_generating(zero, 0.0);
  CHECK(z.g.values().abs().maxCoeff() == 0.0);

  const OneFormField a = recover_one_form(small_bump_256());
  const GeneratingFunction gf = integrate_generating(a, 0.0);
  CHECK(gf.path_residual < 1e-5);
  const double h = gf.g.spacing();
  double worst = 0;
  for (Index j = 1; j + 1 < gf.g.size(); ++j)
    for (Index i = 1; i + 1 < gf.g.size(); ++i) {
      const Vec2 dg((gf.g.value(i + 1, j) - gf.g.value(i - 1, j)) / (2 * h),
                    (gf.g.value(i, j + 1) - gf.g.value(i, j - 1)) / (2 * h));
      worst = std::max(worst, (dg - Vec2(a.a1.value(i, j), a.a2.value(i, j))).norm());
    }
  CHECK(worst < 2 * h * h);
}

TEST_CASE("integrate_generating rejects forms that are not closed") {
  const GridSpec g{64, 1.0, Vec2::Zero()};
  // alpha = (-p, q) / 2 has curl 1
  const OneFormField rot{GridField2D::sample(g, [](const Vec2& x) { return -0.5 * x.y(); }),
                         GridField2D::sample(g, [](const Vec2& x) { return 0.5 * x.x(); }), 2.0};
  CHECK_THROWS(integrate_generating(rot, 0.0));
}

TEST_CASE("starshape_det examples") {
  for (double r : {0.0, 0.3, 1.0}) CHECK(starshape_det({}, r) == 1.0);
  CHECK(starshape_det({1, 1, 0}, 1.0) == 2.0);
  for (double r : {0.0, 0.25, 0.5, 1.0}) CHECK(starshape_det({0, 0, 1}, r) == doctest::Approx(1 - r * r));
}

TEST_CASE("star shape property on random matrices") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-3, 3);
  int tested = 0, failures = 0;
  double worst_gap = 0;
  while (tested < 10000) {
    const SymmetricMatrix2 A{u(rng), u(rng), u(rng)};
    if (!(starshape_closed_form(A, 1.0) > 0)) continue;
    ++tested;
    for (int k = 0; k <= 100; ++k) {
      const double r = k / 100.0;
      const double d = starshape_det(A, r);
      if (!(d > 0)) ++failures;
      worst_gap = std::max(worst_gap, std::abs(d - starshape_closed_form(A, r)));
    }
  }
  CHECK(failures == 0);
  CHECK(worst_gap <= 1e-14 * 30);
}

TEST_CASE("family_from_one_form examples") {
  const PlaneMap& phi = small_bump_256();
  const OneFormField a = recover_one_form(phi);
  const PlaneMap p0 = family_from_one_form(a, 0.0);
  CHECK(max_node_distance(p0, PlaneMap::identity(phi.grid(), 0.8)) < 1e-12);
  const PlaneMap p1 = family_from_one_form(a, 1.0);
  CHECK(c0_distance(p1, phi) < 1e-4);

  const double d1 = psi_min_det(a, 1.0);
  for (int k = 0; k <= 10; ++k) CHECK(psi_min_det(a, k / 10.0) >= std::min(1.0, d1) - 1e-6);

  // intermediate members stay area preserving
  const PlaneMap half = family_from_one_form(a, 0.5);
  double det_defect = 0;
  const GridSpec g = half.grid();
  for (Index j = 8; j + 8 < g.nodes(); j += 4)
    for (Index i = 8; i + 8 < g.nodes(); i += 4)
      det_defect = std::max(det_defect, std::abs(half.node_jacobian(i, j).determinant() - 1));
  CHECK(det_defect < 1e-4);
}

TEST_CASE("round trip on built-in graphical families") {
  for (const auto& H : {radial_bump(0.05, 0.8), moving_bump(0.05, 0.4, 0.3), offset_bump(0.05, 0.5, Vec2(0.2, -0.1))}) {
    const PlaneMap phi = time_one(H, 128);
    CHECK(c0_distance(family_from_one_form(recover_one_form(phi), 1.0), phi) < 1e-4);
  }
}

TEST_CASE("trace chain family scaling") {
  const PlaneMap phi = time_one(moving_bump(0.05, 0.4, 0.3), 128);
  const std::vector<double> scales{1.0, 0.875, 0.75, 0.625, 0.5};
  const TraceChainFamily fam = trace_chain_family(phi, scales);
  CHECK(fam.g.size() == scales.size());
  CHECK(scaling_defect(fam) < 5e-5);
  CHECK(dgada_defect(fam) < 0.125);

  // a = 1 member is the generating function of phi itself
  const GeneratingFunction direct = integrate_generating(recover_one_form(phi), 0.0);
  CHECK((direct.g.values() - fam.g.fields[0].values()).abs().maxCoeff() == 0.0);

  // identity region
  const GridField2D& g = fam.g.fields[4];
  CHECK(std::abs(g(Vec2(0.9, 0.0))) < 1e-9);
}

TEST_CASE("det d kappa_a stays above the a = 1 minimum") {
  const PlaneMap phi = time_one(moving_bump(0.1, 0.4, 0.3), 64);
  const double m1 = is_graphical(phi).min_det;
  for (double a : {0.25, 0.5, 0.75}) CHECK(is_graphical(rescaled_map(phi, a)).min_det >= m1 - 1e-6);
}
