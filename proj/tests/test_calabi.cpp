#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "symlab/alexander.hpp"
#include "symlab/calabi.hpp"
#include "symlab/families.hpp"

using namespace symlab;

namespace {

// (1 - r^2)^2 on the unit disc.
ScalarTimeField unit_bump() { return radial_bump(1.0, 1.0, 2); }

const GridSpec kUnit256{256, 1.0, Vec2::Zero()};

}  // namespace

TEST_CASE("cal_path examples") {
  CHECK(cal_path(ScalarTimeField::zero()) == 0.0);
  CHECK(std::abs(cal_path(unit_bump(), {512, 4}) - kPi / 3) < 1e-4);
  // gamma'(t) h(x) with gamma(0) = gamma(1)
  const ScalarTimeField loop = make_loop(radial_bump(1.0, 0.8), sine_squared());
  CHECK(std::abs(cal_path(loop)) < 1e-8);
}

TEST_CASE("cal_path is linear") {
  const auto A = radial_bump(0.7, 0.6), B = moving_bump(0.4, 0.3, 0.4);
  const ScalarTimeField S([A, B](double t, const Vec2& x) { return 2 * A(t, x) - 3 * B(t, x); }, 0.7);
  CHECK(cal_path(S) == doctest::Approx(2 * cal_path(A) - 3 * cal_path(B)).epsilon(1e-6));
}

TEST_CASE("cal_path rejects support reaching past the disc") {
  CHECK_THROWS(cal_path(radial_bump(1.0, 1.2)));
  CHECK_THROWS(cal_path(rotation_hamiltonian()));
}

TEST_CASE("cal_def1 of the identity vanishes") {
  const CalabiReport r = primitive_and_cal_def1(PlaneMap::identity(GridSpec{64, 1.0, Vec2::Zero()}));
  CHECK(r.cal_def1 == 0.0);
  CHECK(r.primitive_residual == 0.0);
}

TEST_CASE("cal_def1 agrees with cal_path on the unit bump") {
  const auto H = unit_bump();
  const PlaneMap phi = flow_map(H, 1.0, kUnit256);
  const Def1Result d = cal_def1(phi);
  const double cp = cal_path(H, {512, 4});
  CHECK(std::abs(d.cal - kPi / 3) < 2e-3);
  CHECK(std::abs(d.cal - cp) < 2e-3);
}

TEST_CASE("h is path independent on a smooth map") {
  const PlaneMap phi = flow_map(radial_bump(0.3, 0.8, 4), 1.0, kUnit256);
  CHECK(cal_def1(phi).path_residual < 1e-6);
}

TEST_CASE("cal_def1 does not depend on the primitive") {
  const auto H = moving_bump(0.15, 0.4, 0.3);
  const PlaneMap phi = flow_map(H, 1.0, GridSpec{128, 1.0, Vec2::Zero()});
  const double base = cal_def1(phi).cal;
  // alpha + d rho with rho = c (1 - |x - x0|^2 / s^2)^4
  const Vec2 x0(0.1, -0.2);
  Def1Options o;
  o.primitive.alpha = [x0](const Vec2& x) {
    const Vec2 d = x - x0;
    const double u = 1 - d.squaredNorm() / 0.25;
    const Vec2 drho = u > 0 ? (0.3 * 4 * u * u * u * (-2.0 / 0.25) * d).eval() : Vec2::Zero().eval();
    return (Vec2(-x.y(), 0.0) + drho).eval();
  };
  CHECK(std::abs(cal_def1(phi, o).cal - base) < 1e-6);
}

TEST_CASE("cal_def1 rejects maps that are not area preserving") {
  const GridSpec g{64, 1.0, Vec2::Zero()};
  const PlaneMap squash = PlaneMap::from_function(
      g, [](const Vec2& x) {
        const double r2 = x.squaredNorm();
        const double w = r2 < 0.64 ? std::pow(1 - r2 / 0.64, 3) : 0.0;
        return Vec2(x.x() * (1 + w), x.y());
      },
      0.8);
  CHECK_THROWS(cal_def1(squash));
}

TEST_CASE("calabi_report fields") {
  const auto H = radial_bump(0.8, 0.7);
  FlowOptions fo;
  fo.dt = 2e-3;
  const CalabiReport r = calabi_report(H, GridSpec{128, 1.0, Vec2::Zero()}, fo, {128, 8});
  CHECK(r.agreement_error == doctest::Approx(std::abs(r.cal_def1 - r.cal_path)));
  CHECK(r.grid == 128);
  CHECK(r.dt == 2e-3);
  CHECK(r.agreement_error < 5e-3);
}

TEST_CASE("normalize_on_sphere examples") {
  const DiscDomain d;
  const NormalizedField z = normalize_on_sphere(ScalarTimeField::zero(), d);
  CHECK(z.offset(0.3) == 0.0);

  const NormalizedField F = normalize_on_sphere(unit_bump(), d, 512);
  CHECK(std::abs(F.offset(0.5) - 1.0 / 6.0) < 1e-4 / (2 * kPi) + 1e-9);
  for (double t : {0.0, 0.4, 1.0}) CHECK(std::abs(sphere_mean(F, t)) < 1e-10);
  CHECK(F(0.2, Vec2(1.5, 0.0)) == doctest::Approx(-F.offset(0.2)));
}

TEST_CASE("normalize_on_sphere is idempotent") {
  const NormalizedField F = normalize_on_sphere(moving_bump(0.5, 0.4, 0.3), DiscDomain{});
  const NormalizedField G = normalize_on_sphere(F);
  for (double t : {0.1, 0.6}) CHECK(std::abs(G.offset(t)) < 1e-12);
}

TEST_CASE("compose_dev examples") {
  const auto H = moving_bump(0.4, 0.4, 0.3);
  const auto G = radial_bump(0.6, 0.7);

  const ScalarTimeField same = compose_dev(H, H);
  CHECK(hofer_length(same, {48, 8}) < 1e-6);

  const ScalarTimeField Z = compose_dev(H, ScalarTimeField::zero());
  for (const Vec2& x : {Vec2(0.1, 0.2), Vec2(-0.3, 0.05)}) CHECK(Z(0.37, x) == H(0.37, x));

  const ScalarTimeField D = compose_dev(H, G, 1e-3);
  double worst = 0;
  for (const Vec2& x : {Vec2(0.1, 0.2), Vec2(-0.3, 0.05), Vec2(0.45, -0.3), Vec2(0.0, 0.6)}) {
    const Vec2 lhs = integrate_flow(D, 0, 1, x, 2.5e-3);
    const Vec2 rhs = integrate_flow(H, 0, 1, integrate_flow(G, 1, 0, x, 1e-3), 1e-3);
    worst = std::max(worst, (lhs - rhs).norm());
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("flow_normalization_check examples") {
  const DiscDomain d;
  const GridSpec g{64, 1.0, Vec2::Zero()};
  const auto times = uniform_samples(0.0, 1.0, 4);
  const NormalizedField Z = normalize_on_sphere(ScalarTimeField::zero(), d);
  CHECK(flow_normalization_check(Z, hamiltonian_path(Z.field(), times, g)) == 0.0);

  const ScalarTimeField loop = reparam_loop(radial_bump(0.5, 0.8));
  const NormalizedField F = normalize_on_sphere(loop, d, 256);
  const HamiltonianPath p = hamiltonian_path(F.field(), times, kUnit256);
  CHECK(flow_normalization_check(F, p) < 5e-4);

  const HamiltonianPath q = hamiltonian_path(loop, times, kUnit256);
  const double raw = flow_normalization_check(loop, q, d);
  CHECK(raw > 1e-2);
}

TEST_CASE("concatenation is additive for cal_path") {
  const auto A = radial_bump(0.7, 0.6), B = moving_bump(0.4, 0.3, 0.4);
  const ScalarTimeField C = concatenate(A, B);
  CHECK(std::abs(cal_path(C, {256, 128}) - cal_path(A) - cal_path(B)) < 1e-8);
}
