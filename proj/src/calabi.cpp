#include "symlab/calabi.hpp"

#include <mutex>
#include <unordered_map>

namespace symlab {

namespace {

void require_disc_support(const ScalarTimeField& H, const char* who) {
  if (!H.compact() || H.support_radius() > 1.0 + 1e-12)
    throw std::invalid_argument(std::string(who) + ": support extends beyond the unit disc");
}

double slice_integral(const ScalarTimeField& H, double t, const GridSpec& g, double R) {
  const GridField2D f = GridField2D::sample(g, [&](const Vec2& x) { return H(t, x); });
  return integrate_disc(f, R);
}

}  // namespace

double cal_path(const ScalarTimeField& H, const CalPathOptions& opts) {
  if (H.is_zero()) return 0.0;
  require_disc_support(H, "cal_path");
  const double R = H.support_radius();
  const GridSpec g = GridSpec::fitted(R, opts.n);
  return simpson([&](double t) { return slice_integral(H, t, g, R); }, 0.0, 1.0, opts.nt);
}

Estimate cal_path_estimate(const ScalarTimeField& H, const CalPathOptions& opts) {
  const double fine = cal_path(H, opts);
  CalPathOptions coarse = opts;
  coarse.n = std::max(16, opts.n / 2);
  coarse.nt = std::max(2, opts.nt / 2 + (opts.nt / 2) % 2);
  const double c = cal_path(H, coarse);
  return {fine, std::abs(fine - c) / 3.0};
}

Primitive Primitive::standard() {
  return {[](const Vec2& x) { return Vec2(-x.y(), 0.0); }};
}

namespace {

// Line integral of alpha along the quadratic through a, m, b. Five point Gauss-Legendre,
// exact for the standard primitive.
double quad_line(const Primitive& P, const Vec2& a, const Vec2& m, const Vec2& b) {
  static constexpr double node[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                     0.9061798459386640};
  static constexpr double weight[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                       0.4786286704993665, 0.2369268850561891};
  double sum = 0;
  for (int k = 0; k < 5; ++k) {
    const double s = 0.5 * (node[k] + 1);
    // gamma(s) = a (1-s)(1-2s) + 4 m s (1-s) + b s (2s-1)
    const Vec2 g = a * (1 - s) * (1 - 2 * s) + 4 * m * s * (1 - s) + b * s * (2 * s - 1);
    const Vec2 dg = a * (4 * s - 3) + 4 * m * (1 - 2 * s) + b * (4 * s - 1);
    sum += 0.5 * weight[k] * P.alpha(g).dot(dg);
  }
  return sum;
}

}  // namespace

Def1Result cal_def1(const PlaneMap& phi, const Def1Options& opts) {
  const GridSpec g = phi.grid();
  const int s = opts.stride;
  if (s < 2 || s % 2) throw std::invalid_argument("cal_def1: stride must be even and >= 2");
  if (g.n % s) throw std::invalid_argument("cal_def1: grid intervals must be divisible by the stride");
  if (g.half_width < 1.0 - 1e-12) throw std::invalid_argument("cal_def1: map grid must cover the unit disc");
  const Index m = g.n / s + 1;
  const Index hs = s / 2;
  // bx(I, J): edge (I, J) -> (I+1, J); by(I, J): edge (I, J) -> (I, J+1).
  ArrayXXd bx = ArrayXXd::Zero(m, m), by = ArrayXXd::Zero(m, m);
  auto beta = [&](Index i0, Index j0, Index im, Index jm, Index i1, Index j1) {
    const double pulled = quad_line(opts.primitive, phi.node_image(i0, j0), phi.node_image(im, jm),
                                    phi.node_image(i1, j1));
    const double plain = quad_line(opts.primitive, g.node(i0, j0), g.node(im, jm), g.node(i1, j1));
    return pulled - plain;
  };
  for (Index J = 0; J < m; ++J)
    for (Index I = 0; I < m; ++I) {
      const Index i = I * s, j = J * s;
      if (I + 1 < m) bx(I, J) = beta(i, j, i + hs, j, i + s, j);
      if (J + 1 < m) by(I, J) = beta(i, j, i, j + hs, i, j + s);
    }
  const double H = s * g.spacing();
  Def1Result r;
  for (Index J = 0; J + 1 < m; ++J)
    for (Index I = 0; I + 1 < m; ++I) {
      const double circ = bx(I, J) + by(I + 1, J) - bx(I, J + 1) - by(I, J);
      r.primitive_residual = std::max(r.primitive_residual, std::abs(circ));
    }
  if (r.primitive_residual > opts.residual_tolerance * H * H)
    throw std::runtime_error("cal_def1: pullback one-form not closed, max plaquette circulation " +
                             std::to_string(r.primitive_residual));
  ArrayXXd ha = ArrayXXd::Zero(m, m), hb = ArrayXXd::Zero(m, m);
  for (Index J = 0; J < m; ++J)
    for (Index I = 1; I < m; ++I) ha(I, J) = ha(I - 1, J) + bx(I - 1, J);
  for (Index I = 0; I < m; ++I)
    for (Index J = 1; J < m; ++J) hb(I, J) = hb(I, J - 1) + by(I, J - 1);
  r.path_residual = (ha - hb).abs().maxCoeff();
  const GridSpec coarse{int(m - 1), g.half_width, g.center};
  r.h = GridField2D(coarse, 0.5 * (ha + hb));
  r.cal = 0.5 * integrate_disc(r.h, 1.0, g.center);
  return r;
}

CalabiReport primitive_and_cal_def1(const PlaneMap& phi, std::optional<Estimate> cal_path_value,
                                    const Def1Options& opts) {
  const Def1Result fine = cal_def1(phi, opts);
  CalabiReport rep;
  rep.cal_def1 = fine.cal;
  rep.primitive_residual = fine.primitive_residual;
  rep.path_residual = fine.path_residual;
  rep.grid = phi.grid().n;
  rep.dt = phi.dt();
  if (phi.grid().n % (2 * opts.stride) == 0 && phi.grid().n / (2 * opts.stride) >= 16) {
    Def1Options coarse = opts;
    coarse.stride = 2 * opts.stride;
    coarse.residual_tolerance = kInf;
    rep.cal_def1_error = std::abs(fine.cal - cal_def1(phi, coarse).cal) / 15.0;
  }
  if (cal_path_value) {
    rep.cal_path = cal_path_value->value;
    rep.cal_path_error = cal_path_value->error;
    rep.agreement_error = std::abs(rep.cal_def1 - rep.cal_path);
  }
  return rep;
}

CalabiReport calabi_report(const ScalarTimeField& H, const GridSpec& grid, const FlowOptions& flow,
                           const CalPathOptions& quad) {
  const PlaneMap phi = flow_map(H, 1.0, grid, flow);
  return primitive_and_cal_def1(phi, cal_path_estimate(H, quad));
}

struct NormalizedField::Memo {
  std::mutex mu;
  std::unordered_map<double, double> integral;

  double disc_integral(const ScalarTimeField& disc, const DiscDomain& d, int n, double t) {
    {
      std::lock_guard<std::mutex> lock(mu);
      auto it = integral.find(t);
      if (it != integral.end()) return it->second;
    }
    const double v = slice_integral(disc, t, GridSpec::fitted(d.radius, n), d.radius);
    std::lock_guard<std::mutex> lock(mu);
    integral.emplace(t, v);
    return v;
  }
};

NormalizedField::NormalizedField(ScalarTimeField disc_part, std::function<double(double)> outside_value,
                                 DiscDomain domain, int quad_n)
    : disc_(std::move(disc_part)),
      outside_(std::move(outside_value)),
      domain_(domain),
      quad_n_(quad_n),
      memo_(std::make_shared<Memo>()) {
  if (!outside_) outside_ = [](double) { return 0.0; };
  if (!(domain_.radius > 0) || !(domain_.sphere_volume > domain_.area()))
    throw std::invalid_argument("NormalizedField: invalid domain");
  auto offset = [memo = memo_, disc = disc_, outside = outside_, d = domain_, n = quad_n_](double t) {
    return (memo->disc_integral(disc, d, n, t) + (d.sphere_volume - d.area()) * outside(t)) /
           d.sphere_volume;
  };
  ScalarTimeField::Derivatives der;
  der.gradient = [disc = disc_, d = domain_](double t, const Vec2& x) {
    return x.norm() <= d.radius ? disc.gradient(t, x) : Vec2::Zero().eval();
  };
  field_ = ScalarTimeField(
      [disc = disc_, outside = outside_, offset, d = domain_](double t, const Vec2& x) {
        return (x.norm() <= d.radius ? disc(t, x) : outside(t)) - offset(t);
      },
      kInf, disc_.smoothness_order(), der);
}

double NormalizedField::disc_integral(double t) const {
  return memo_->disc_integral(disc_, domain_, quad_n_, t);
}

double NormalizedField::offset(double t) const {
  return (disc_integral(t) + (domain_.sphere_volume - domain_.area()) * outside_(t)) /
         domain_.sphere_volume;
}

double NormalizedField::operator()(double t, const Vec2& x) const { return field_(t, x); }

NormalizedField normalize_on_sphere(const ScalarTimeField& H, const DiscDomain& domain, int quad_n) {
  if (H.compact() && H.support_radius() > domain.radius + 1e-12)
    throw std::invalid_argument("normalize_on_sphere: field not supported in the disc");
  return NormalizedField(H, [](double) { return 0.0; }, domain, quad_n);
}

NormalizedField normalize_on_sphere(const NormalizedField& F) {
  const NormalizedField copy = F;
  return NormalizedField(F.field(), [copy](double t) { return copy.outside_value(t); }, F.domain(),
                         F.quad_n());
}

double sphere_mean(const NormalizedField& F, double t) {
  const DiscDomain& d = F.domain();
  const GridSpec g = GridSpec::fitted(d.radius, F.quad_n());
  const double disc = slice_integral(F.field(), t, g, d.radius);
  return (disc + (d.sphere_volume - d.area()) * F.outside_value(t)) / d.sphere_volume;
}

ScalarTimeField compose_dev(const ScalarTimeField& H, const ScalarTimeField& G, double dt) {
  if (G.is_zero()) return H;
  const double support = std::max(H.support_radius(), G.support_radius());
  constexpr double cover = 1e3;
  auto value = [H, G, dt](double t, const Vec2& x) {
    const Vec2 z = integrate_flow(H, t, 0.0, x, dt, cover);
    const Vec2 w = integrate_flow(G, 0.0, t, z, dt, cover);
    return H(t, x) - G(t, w);
  };
  ScalarTimeField::Derivatives der;
  der.gradient = [H, G, dt](double t, const Vec2& x) {
    const FlowState back = integrate_flow_jacobian(H, t, 0.0, x, dt, cover);
    const FlowState fwd = integrate_flow_jacobian(G, 0.0, t, back.x, dt, cover);
    const Mat2 D = fwd.jac * back.jac;
    return (H.gradient(t, x) - D.transpose() * G.gradient(t, fwd.x)).eval();
  };
  return ScalarTimeField(value, support, std::min(H.smoothness_order(), G.smoothness_order()), der);
}

namespace {

double pushed_integral(const std::function<double(double, const Vec2&)>& f, const PlaneMap& m,
                       double t) {
  const GridSpec g = m.grid();
  ArrayXXd v(g.nodes(), g.nodes());
  for (Index j = 0; j < g.nodes(); ++j)
    for (Index i = 0; i < g.nodes(); ++i) v(i, j) = f(t, m.node_image(i, j));
  return integrate_disc(GridField2D(g, std::move(v)), 1.0, g.center);
}

}  // namespace

double flow_normalization_check(const NormalizedField& F, const HamiltonianPath& path) {
  const DiscDomain& d = F.domain();
  double worst = 0;
  for (size_t k = 0; k < path.maps.size(); ++k) {
    const double t = path.time_samples[k];
    const double disc = pushed_integral([&](double s, const Vec2& x) { return F(s, x); }, path.maps[k], t);
    worst = std::max(worst, std::abs(disc + (d.sphere_volume - d.area()) * F.outside_value(t)));
  }
  return worst;
}

double flow_normalization_check(const ScalarTimeField& H, const HamiltonianPath& path,
                                const DiscDomain&) {
  double worst = 0;
  for (size_t k = 0; k < path.maps.size(); ++k) {
    const double t = path.time_samples[k];
    worst = std::max(worst, std::abs(pushed_integral([&](double s, const Vec2& x) { return H(s, x); },
                                                     path.maps[k], t)));
  }
  return worst;
}

ScalarTimeField concatenate(const ScalarTimeField& H1, const ScalarTimeField& H2) {
  auto sigma = [](double u) { return u - std::sin(2 * kPi * u) / (2 * kPi); };
  auto dsigma = [](double u) { return 1 - std::cos(2 * kPi * u); };
  auto value = [=](double t, const Vec2& x) {
    if (t < 0.5) return 2 * dsigma(2 * t) * H1(sigma(2 * t), x);
    return 2 * dsigma(2 * t - 1) * H2(sigma(2 * t - 1), x);
  };
  ScalarTimeField::Derivatives der;
  der.gradient = [=](double t, const Vec2& x) {
    if (t < 0.5) return (2 * dsigma(2 * t) * H1.gradient(sigma(2 * t), x)).eval();
    return (2 * dsigma(2 * t - 1) * H2.gradient(sigma(2 * t - 1), x)).eval();
  };
  return ScalarTimeField(value, std::max(H1.support_radius(), H2.support_radius()),
                         std::min(H1.smoothness_order(), H2.smoothness_order()), der);
}

}  // namespace symlab
