#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "symlab/families.hpp"
#include "symlab/phase_hj.hpp"

#include <map>

using namespace symlab;

namespace {

const DiscDomain kDomain{};

// max and min of f over nodes at distance >= r from the origin
std::pair<double, double> identity_range(const GridField2D& f, double r) {
  double lo = kInf, hi = -kInf;
  for (Index j = 0; j < f.size(); ++j)
    for (Index i = 0; i < f.size(); ++i)
      if (f.node(i, j).norm() >= r) {
        lo = std::min(lo, f.value(i, j));
        hi = std::max(hi, f.value(i, j));
      }
  return {lo, hi};
}

double action_from(const ScalarTimeField& H, const Vec2& y, double dt, ChartPoint* end = nullptr) {
  std::vector<double> times;
  std::vector<ChartPoint> path = lift_trajectory(H, y, 1.0, dt, &times);
  if (end) *end = path.back();
  return classical_action(chart_lift(H), std::move(times), std::move(path)).action;
}

}  // namespace

TEST_CASE("classical_action trivial and rejects") {
  const ChartPoint z{Vec2(0.3, 0.1), Vec2::Zero()};
  CHECK(classical_action(chart_lift(ScalarTimeField::zero()), uniform_samples(0, 1, 10),
                         std::vector<ChartPoint>(11, z))
            .action == 0.0);
  CHECK_THROWS(classical_action(chart_lift(ScalarTimeField::zero()), uniform_samples(0, 1, 10),
                                std::vector<ChartPoint>(10, z)));
  CHECK_THROWS(classical_action(chart_lift(ScalarTimeField::zero()), uniform_samples(0, 1, 9),
                                std::vector<ChartPoint>(10, z)));
  CHECK_THROWS(classical_action(chart_lift(ScalarTimeField::zero()), {0.0, 0.1, 0.5},
                                std::vector<ChartPoint>(3, z)));
}

TEST_CASE("constant chord under the normalized field") {
  const auto F = moving_bump(0.3, 0.4, 0.3, 4);
  const NormalizedField Fb = normalize_on_sphere(F, kDomain);
  const double v = identity_region_value(Fb, 1.0, 1e-3);
  CHECK(std::abs(v - cal_path(F) / kDomain.sphere_volume) < 1e-6);
}

TEST_CASE("first variation of the action") {
  const auto H = moving_bump(0.3, 0.4, 0.3, 4);
  const Vec2 y(0.1, 0.2), v(1.0, -0.5);
  const double dt = 2.5e-4;
  ChartPoint z0;
  const double a0 = action_from(H, y, dt, &z0);
  std::vector<double> err;
  for (double eps : {1e-2, 5e-3}) {
    ChartPoint z1;
    const double a1 = action_from(H, y + eps * v, dt, &z1);
    // endpoint term at the arrival, the start sits on the zero section
    const double predicted = 0.5 * (z0.bp + z1.bp).dot(z1.bq - z0.bq);
    err.push_back(std::abs(a1 - a0 - predicted));
  }
  CHECK(err[0] < 1e-4);
  CHECK(err[0] / err[1] > 3.5);
}

TEST_CASE("basic generating function") {
  BasicGeneratingOptions o;
  o.n = 32;
  const BasicGenerating z = basic_generating(ScalarTimeField::zero(), 1.0, o);
  CHECK(z.h.abs().maxCoeff() == 0.0);

  o.n = 256;
  const BasicGenerating b = basic_generating(moving_bump(0.3, 0.4, 0.3, 4), 1.0, o);
  CHECK(b.exactness < 5e-4);
}

TEST_CASE("phase function of the zero field") {
  PhaseOptions o;
  o.n = 64;
  const PhaseFunction p = phase_function_graphical(ScalarTimeField::zero(), kDomain, 1.0, o);
  CHECK(p.f.values().abs().maxCoeff() == 0.0);
}

TEST_CASE("phase function on the identity region and against chord actions") {
  const auto F = radial_bump(0.15, 0.9, 4);
  PhaseOptions o;
  o.n = 128;
  const PhaseFunction p = phase_function_graphical(F, kDomain, 1.0, o);
  const double expected = cal_path(F) / kDomain.sphere_volume;
  const auto [lo, hi] = identity_range(p.f, F.support_radius() + 0.05);
  CHECK(std::abs(lo - expected) < 2e-3);
  CHECK(std::abs(hi - expected) < 2e-3);

  // f o pi = h on the graph
  BasicGeneratingOptions bo;
  bo.n = 32;
  const BasicGenerating b = basic_generating(normalize_on_sphere(F, kDomain), 1.0, bo);
  double worst = 0;
  for (Index j = 0; j < b.seeds.nodes(); ++j)
    for (Index i = 0; i < b.seeds.nodes(); ++i)
      worst = std::max(worst, std::abs(p.f(Vec2(b.q1(i, j), b.q2(i, j))) - b.h(i, j)));
  CHECK(worst < 1e-4);

  // |df| <= max |p| over the graph
  const OneFormField df = lagrangian_selector(p.f);
  double dmax = 0;
  for (Index j = 0; j < df.a1.size(); ++j)
    for (Index i = 0; i < df.a1.size(); ++i) dmax = std::max(dmax, std::hypot(df.a1.value(i, j), df.a2.value(i, j)));
  CHECK(dmax <= p.max_p * (1 + 1e-3));
  CHECK(p.path_residual < 1e-5);
}

TEST_CASE("phase function rejects non graphical slices") {
  PhaseOptions o;
  o.n = 64;
  CHECK_THROWS_AS(phase_function_graphical(twist(), kDomain, 1.0, o), std::invalid_argument);
}

TEST_CASE("phase functions are Lipschitz in the Hamiltonian") {
  PhaseOptions o;
  o.n = 64;
  const PhaseFunction a = phase_function_graphical(radial_bump(0.1, 0.8, 4), kDomain, 1.0, o);
  const PhaseFunction b = phase_function_graphical(radial_bump(0.12, 0.8, 4), kDomain, 1.0, o);
  // H - H' is the bump of amplitude 0.02 with osc 0.02 at every t
  const double dist = hofer_length(radial_bump(0.02, 0.8, 4), {128, 8});
  CHECK(dist == doctest::Approx(0.02));
  CHECK((a.f.values() - b.f.values()).abs().maxCoeff() <= dist);
}

TEST_CASE("lagrangian selector") {
  const GridSpec g{32, 1.0, Vec2::Zero()};
  const OneFormField s = lagrangian_selector(GridField2D(g, ArrayXXd::Constant(33, 33, 0.7)));
  CHECK(s.a1.values().abs().maxCoeff() < 1e-14);
  CHECK(s.a2.values().abs().maxCoeff() < 1e-14);

  const auto F = radial_bump(0.15, 0.9, 4);
  PhaseOptions o;
  o.n = 256;
  const PhaseFunction p = phase_function_graphical(F, kDomain, 1.0, o);
  const OneFormField sigma = lagrangian_selector(p.f);
  double worst = 0;
  for (Index j = 2; j + 2 < sigma.a1.size(); ++j)
    for (Index i = 2; i + 2 < sigma.a1.size(); ++i)
      worst = std::max(worst, std::hypot(sigma.a1.value(i, j) - p.alpha.a1.value(i, j),
                                         sigma.a2.value(i, j) - p.alpha.a2.value(i, j)));
  CHECK(worst < 5e-4);

  // nearest sampled graph point (bq, bp) = chart image of (phi(y), y) at the nodes of a coarser map
  FlowOptions fo;
  const PlaneMap phi = flow_map(F, 1.0, GridSpec{128, 1.0, Vec2::Zero()}, fo);
  const double h = phi.grid().spacing();
  std::map<std::pair<long, long>, std::vector<ChartPoint>> buckets;
  for (Index j = 0; j < phi.grid().nodes(); ++j)
    for (Index i = 0; i < phi.grid().nodes(); ++i) {
      const ChartPoint z = to_chart(phi.node_image(i, j), phi.grid().node(i, j));
      buckets[{long(std::floor(z.bq.x() / h)), long(std::floor(z.bq.y() / h))}].push_back(z);
    }
  double far = 0;
  for (Index j = 0; j < sigma.a1.size(); j += 4)
    for (Index i = 0; i < sigma.a1.size(); i += 4) {
      const Vec2 q = sigma.a1.node(i, j);
      const Eigen::Vector4d pt(q.x(), q.y(), sigma.a1.value(i, j), sigma.a2.value(i, j));
      double best = kInf;
      const long bx = long(std::floor(q.x() / h)), by = long(std::floor(q.y() / h));
      for (long dx = -2; dx <= 2; ++dx)
        for (long dy = -2; dy <= 2; ++dy) {
          auto it = buckets.find({bx + dx, by + dy});
          if (it == buckets.end()) continue;
          for (const ChartPoint& z : it->second)
            best = std::min(best, (pt - Eigen::Vector4d(z.bq.x(), z.bq.y(), z.bp.x(), z.bp.y())).norm());
        }
      far = std::max(far, best);
    }
  CHECK(far < 2 * h);
}

TEST_CASE("hj_residual exact cases and rejects") {
  const GridSpec g{16, 1.0, Vec2::Zero()};
  PhaseFamily still;
  still.parameter_samples = {0.0, 0.5, 1.0};
  still.fields.assign(3, GridField2D(g, ArrayXXd::Constant(17, 17, 0.3)));
  CHECK(hj_residual(still, [](double, const ChartPoint&) { return 0.0; }).residual == 0.0);

  PhaseFamily shift;
  const double c = 0.37;
  shift.parameter_samples = uniform_samples(0.0, 1.0, 4);
  for (double a : shift.parameter_samples) shift.fields.emplace_back(g, ArrayXXd::Constant(17, 17, -a * c));
  CHECK(hj_residual(shift, [c](double, const ChartPoint&) { return c; }).residual < 1e-12);

  PhaseFamily two = shift;
  two.fields.resize(2);
  two.parameter_samples.resize(2);
  CHECK_THROWS(hj_residual(two, [](double, const ChartPoint&) { return 0.0; }));
}

TEST_CASE("hj residual converges on a graphical loop") {
  const auto F = reparam_loop(radial_bump(0.2, 0.8, 4));
  const NormalizedField Fb = normalize_on_sphere(F, kDomain);
  std::vector<double> res;
  for (int level = 0; level < 2; ++level) {
    PhaseOptions o;
    o.n = 64 << level;
    const PhaseFamily fam = timewise_family(F, kDomain, uniform_samples(0.0, 1.0, 10 << level), o);
    res.push_back(hj_residual(fam, chart_lift(Fb)).residual);
  }
  MESSAGE("hj residuals " << res[0] << " " << res[1]);
  CHECK(res[0] / res[1] >= 1.7);
}

TEST_CASE("suspension identity") {
  SuspensionOptions o;
  o.n = 16;
  CHECK(suspension_check(ScalarTimeField::zero(), o).total == 0.0);
  const SuspensionDefect d = suspension_check(moving_bump(0.1, 0.4, 0.3, 4));
  MESSAGE("suspension " << d.spatial << " " << d.temporal);
  CHECK(d.total < 5e-4);
  CHECK(d.temporal < 5e-4);
}

TEST_CASE("phase integral") {
  const GridSpec g{32, 1.0, Vec2::Zero()};
  PhaseFamily cst;
  cst.parameter_samples = {0.0, 1.0};
  cst.fields.assign(2, GridField2D(g, ArrayXXd::Constant(33, 33, 0.25)));
  const PhaseIntegral pi = phase_integral(cst, kDomain);
  for (double v : pi.I) CHECK(v == doctest::Approx(0.25 * kDomain.sphere_volume).epsilon(1e-12));

  // I(0) = 0 and I' = -int G(t, df) along the timewise family
  const auto F = moving_bump(0.05, 0.4, 0.3, 4);
  const NormalizedField Fb = normalize_on_sphere(F, kDomain);
  std::vector<double> gap;
  for (int level = 0; level < 2; ++level) {
    PhaseOptions o;
    o.n = 128;
    const PhaseFamily fam = timewise_family(F, kDomain, uniform_samples(0.0, 1.0, 8 << level), o);
    const PhaseIntegral I = phase_integral(fam, kDomain);
    CHECK(std::abs(I.I.front()) < 1e-12);
    const std::vector<double> J = hamiltonian_integral(fam, chart_lift(Fb), kDomain);
    double worst = 0;
    for (size_t k = 1; k + 1 < J.size(); ++k) worst = std::max(worst, std::abs(I.dI[k] + J[k]));
    gap.push_back(worst);
  }
  MESSAGE("I' gaps " << gap[0] << " " << gap[1]);
  CHECK(gap[1] < gap[0]);
  CHECK(gap[1] < 1e-3);
}
