#include "symlab/alexander.hpp"

#include <algorithm>
#include <cmath>

namespace symlab {

namespace {

ScalarTimeField scaled(const ScalarTimeField& H, double a, double amplitude) {
  ScalarTimeField::Derivatives d;
  d.gradient = [H, a, amplitude](double t, const Vec2& x) { return (amplitude / a * H.gradient(t, x / a)).eval(); };
  d.hessian = [H, a, amplitude](double t, const Vec2& x) { return (amplitude / (a * a) * H.hessian(t, x / a)).eval(); };
  return ScalarTimeField([H, a, amplitude](double t, const Vec2& x) { return amplitude * H(t, x / a); },
                         a * H.support_radius(), H.smoothness_order(), d);
}

std::function<double(double)> derivative_of(const TimeReparam& chi) {
  if (chi.dchi) return chi.dchi;
  auto f = chi.chi;
  return [f](double t) {
    constexpr double h = 1e-6;
    const double lo = std::max(0.0, t - h), hi = std::min(1.0, t + h);
    return (f(hi) - f(lo)) / (hi - lo);
  };
}

ScalarTimeField time_changed(const ScalarTimeField& H, const TimeReparam& chi) {
  auto c = chi.chi;
  auto dc = derivative_of(chi);
  ScalarTimeField::Derivatives d;
  d.gradient = [H, c, dc](double t, const Vec2& x) { return (dc(t) * H.gradient(c(t), x)).eval(); };
  d.hessian = [H, c, dc](double t, const Vec2& x) { return (dc(t) * H.hessian(c(t), x)).eval(); };
  return ScalarTimeField([H, c, dc](double t, const Vec2& x) { return dc(t) * H(c(t), x); },
                         H.support_radius(), H.smoothness_order(), d);
}

double smoothstep(double s) { return s * s * (3 - 2 * s); }

double max_hessian_norm(const ScalarTimeField& H) {
  const double R = H.support_radius();
  const GridSpec g = GridSpec::fitted(R, 32);
  double worst = 0;
  for (double t : uniform_samples(0.0, 1.0, 8))
    for (Index j = 0; j < g.nodes(); ++j)
      for (Index i = 0; i < g.nodes(); ++i) {
        const Vec2 x = g.node(i, j);
        if (x.norm() >= R) continue;
        const Eigen::SelfAdjointEigenSolver<Mat2> es(H.hessian(t, x));
        worst = std::max(worst, es.eigenvalues().cwiseAbs().maxCoeff());
      }
  return worst;
}

}  // namespace

RescaledPath rescale(const ScalarTimeField& H, double a, double eta) {
  if (!(a > 0 && a <= 1)) throw std::invalid_argument("rescale: scale must lie in (0, 1]");
  if (H.compact() && H.support_radius() > 1 - eta + 1e-12)
    throw std::invalid_argument("rescale: support exceeds 1 - eta");
  if (a == 1.0) return {H, a, eta, H};
  return {H, a, eta, scaled(H, a, a * a)};
}

TimeReparam linear_ramp(double a) {
  return {[a](double t) { return a * t; }, [a](double) { return a; }};
}

TimeReparam sine_squared() {
  return {[](double t) { return std::pow(std::sin(kPi * t), 2); },
          [](double t) { return kPi * std::sin(2 * kPi * t); }};
}

TimeReparam smooth_ramp(double eps) {
  return {[eps](double s) { return eps + (1 - eps) * smoothstep(s); },
          [eps](double s) { return (1 - eps) * 6 * s * (1 - s); }};
}

ScalarTimeField reparametrize(const ScalarTimeField& H, const TimeReparam& chi) {
  if (!chi.chi) throw std::invalid_argument("reparametrize: missing chi");
  bool up = false, down = false;
  double prev = chi.chi(0.0);
  for (double t : uniform_samples(0.0, 1.0, 1000)) {
    const double v = chi.chi(t);
    if (v < -1e-12 || v > 1 + 1e-12) throw std::invalid_argument("reparametrize: chi leaves [0, 1]");
    if (v > prev + 1e-14) up = true;
    if (v < prev - 1e-14) down = true;
    prev = v;
  }
  if (up && down) throw std::invalid_argument("reparametrize: chi is not monotone");
  return time_changed(H, chi);
}

ScalarTimeField make_loop(const ScalarTimeField& H, const TimeReparam& chi) {
  if (!chi.chi) throw std::invalid_argument("make_loop: missing chi");
  if (std::abs(chi.chi(0.0) - chi.chi(1.0)) > 1e-12)
    throw std::invalid_argument("make_loop: chi(0) and chi(1) differ");
  return time_changed(H, chi);
}

ScalarTimeField TwoParameterField::slice(double s) const {
  auto f = value;
  auto g = gradient;
  ScalarTimeField::Derivatives d;
  if (g) d.gradient = [g, s](double t, const Vec2& x) { return g(s, t, x); };
  return ScalarTimeField([f, s](double t, const Vec2& x) { return f(s, t, x); }, support_radius,
                         smoothness_order, d);
}

TwoParameterField alexander_family(const ScalarTimeField& H) {
  TwoParameterField F;
  F.value = [H](double s, double t, const Vec2& x) { return s > 0 ? s * s * H(t, x / s) : 0.0; };
  F.gradient = [H](double s, double t, const Vec2& x) {
    return s > 0 ? (s * H.gradient(t, x / s)).eval() : Vec2::Zero().eval();
  };
  F.support_radius = H.support_radius();
  F.smoothness_order = H.smoothness_order();
  return F;
}

std::pair<double, double> upsilon(double s, double t) {
  if (s <= 0.5) return {t, 1 + 2 * s * (t - 1)};
  return {2 * (s - 0.5) + 2 * t * (1 - s), t};
}

ScalarTimeField SHamiltonian::s_path(size_t it) const {
  std::vector<GridField2D> slices;
  slices.reserve(s.size());
  for (const auto& row : K) slices.push_back(row.at(it));
  if (std::abs(s.front()) > 1e-12 || std::abs(s.back() - 1) > 1e-12)
    throw std::invalid_argument("SHamiltonian::s_path: s samples must span [0, 1]");
  return grid_time_field(s, std::move(slices), support_radius);
}

double SHamiltonian::calabi(size_t it) const {
  if (s.size() < 3 || s.size() % 2 == 0)
    throw std::invalid_argument("SHamiltonian::calabi: need an even number of s intervals");
  Eigen::ArrayXd v(Index(s.size()));
  for (size_t k = 0; k < s.size(); ++k) v(Index(k)) = integrate_disc(K[k].at(it), support_radius);
  return simpson(v, (s.back() - s.front()) / double(s.size() - 1));
}

SHamiltonian s_hamiltonian(const TwoParameterField& H, std::vector<double> s_samples,
                           const SHamiltonianOptions& opts) {
  if (opts.nu < 2 || opts.nu % 2) throw std::invalid_argument("s_hamiltonian: nu must be even");
  if (!(opts.h_s > 0)) throw std::invalid_argument("s_hamiltonian: h_s must be positive");
  if (!std::isfinite(H.support_radius)) throw std::invalid_argument("s_hamiltonian: needs compact support");
  const double R = H.support_radius;
  const double hs = opts.h_s;
  const double dt = opts.dt > 0 ? opts.dt : 1.0 / (4.0 * opts.nu);
  const GridSpec g = GridSpec::fitted(R, opts.n);
  const std::vector<double> u = uniform_samples(0.0, 1.0, opts.nu);
  const double du = 1.0 / opts.nu;
  const Index N = g.nodes();
  FlowOptions fo;
  fo.dt = dt;
  fo.coverage_radius = std::max(kDefaultCoverage, 1.25 * R);

  SHamiltonian out;
  out.support_radius = R;
  out.grid = g;
  out.h_s = hs;
  out.dt = dt;
  for (int k = 0; k <= opts.nu; k += 2) out.t.push_back(u[size_t(k)]);

  for (double s : s_samples) {
    // Stencil for d/ds: centered inside [0, 1], one sided second order at the ends.
    std::vector<std::pair<double, double>> stencil;
    if (s - hs < 0)
      stencil = {{s, -1.5}, {s + hs, 2.0}, {s + 2 * hs, -0.5}};
    else if (s + hs > 1)
      stencil = {{s, 1.5}, {s - hs, -2.0}, {s - 2 * hs, 0.5}};
    else
      stencil = {{s + hs, 0.5}, {s - hs, -0.5}};

    std::vector<ArrayXXd> D(u.size(), ArrayXXd::Zero(N, N));
    for (const auto& [sm, c] : stencil) {
      const HamiltonianPath p = hamiltonian_path(H.slice(sm), u, g, fo);
      for (size_t k = 0; k < u.size(); ++k)
        for (Index j = 0; j < N; ++j)
          for (Index i = 0; i < N; ++i)
            D[k](i, j) += c / hs * H.value(sm, u[k], p.maps[k].node_image(i, j));
    }

    FlowOptions fb = fo;
    fb.inverse = true;  // backward flow is far more accurate than Newton on the interpolant
    const HamiltonianPath base = hamiltonian_path(H.slice(s), u, g, fb);
    std::vector<ArrayXXd> E(u.size(), ArrayXXd::Zero(N, N));
    for (size_t k = 0; k < u.size(); ++k) {
      const GridField2D Dk(g, D[k]);
      const auto [zx, zy] = base.maps[k].inverse_nodes();
      for (Index j = 0; j < N; ++j)
        for (Index i = 0; i < N; ++i) {
          const Vec2 z(zx(i, j), zy(i, j));
          E[k](i, j) = z.allFinite() && z.norm() < R ? Dk(z) : 0.0;
        }
      // Gauge: K vanishes at a reference node outside every support.
      E[k] -= E[k](0, 0);
    }

    std::vector<GridField2D> row;
    ArrayXXd acc = ArrayXXd::Zero(N, N);
    row.emplace_back(g, acc);
    for (int k = 0; k + 2 <= opts.nu; k += 2) {
      acc += du / 3.0 * (E[size_t(k)] + 4 * E[size_t(k + 1)] + E[size_t(k + 2)]);
      row.emplace_back(g, acc);
    }
    out.K.push_back(std::move(row));
  }
  out.s = std::move(s_samples);
  return out;
}

AlexanderDecomposition alexander_decomposition(const ScalarTimeField& H, double s, double t,
                                               const SHamiltonianOptions& opts) {
  if (!(s > 0 && s <= 1)) throw std::invalid_argument("alexander_decomposition: s must lie in (0, 1]");
  TwoParameterField F = alexander_family(H);
  F.support_radius = std::min(1.0, s + 2 * opts.h_s) * H.support_radius();
  const SHamiltonian K = s_hamiltonian(F, {s}, opts);
  size_t it = K.t.size();
  for (size_t k = 0; k < K.t.size(); ++k)
    if (std::abs(K.t[k] - t) < 1e-12) it = k;
  if (it == K.t.size()) throw std::invalid_argument("alexander_decomposition: t is not an output node");

  const GridField2D& Kst = K.K[0][it];
  const int nu_t = std::max(2, int(std::lround(t * opts.nu)) + int(std::lround(t * opts.nu)) % 2);
  const GridField2D first = GridField2D::sample(K.grid, [&](const Vec2& x) {
    if (t == 0) return 0.0;
    return 2 * s * simpson([&](double w) { return H(w, x / s); }, 0.0, t, nu_t);
  });
  AlexanderDecomposition r;
  r.k_integral = integrate_disc(Kst, K.support_radius);
  r.first_integral = integrate_disc(first, K.support_radius);
  r.remainder_integral = r.k_integral - r.first_integral;
  const double R = H.support_radius();
  const GridSpec gh = GridSpec::fitted(R, opts.n * 2);
  const double HH = t == 0 ? 0.0 : simpson([&](double w) {
    return integrate_disc(GridField2D::sample(gh, [&](const Vec2& x) { return H(w, x); }), R);
  }, 0.0, t, nu_t);
  r.remainder_expected = 2 * s * s * s * HH;
  r.remainder_literal = s * r.remainder_expected;
  r.max_first_pointwise = first.values().abs().maxCoeff();
  return r;
}

ScalarTimeField modified_alexander(const ScalarTimeField& H, double s, double eps, double dt) {
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("modified_alexander: eps must lie in (0, 1)");
  const double a = smooth_ramp(eps).chi(s);
  return compose_dev(rescale(H, a).hamiltonian, rescale(H, eps).hamiltonian, dt);
}

std::vector<SequenceMember> shrinking_calabi_sequence(const ScalarTimeField& H,
                                                      const std::vector<double>& scales,
                                                      const SequenceOptions& opts) {
  if (!H.compact() || H.support_radius() > 1)
    throw std::invalid_argument("shrinking_calabi_sequence: H must be supported in the disc");
  for (size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0 && scales[i] <= 1))
      throw std::invalid_argument("shrinking_calabi_sequence: scales must lie in (0, 1]");
    if (i > 0 && !(scales[i] < scales[i - 1]))
      throw std::invalid_argument("shrinking_calabi_sequence: scales must decrease");
  }
  // Loops give Cal at roundoff level; compare against the Hofer scale of H.
  if (std::abs(cal_path(H, opts.cal)) <= 1e-9 * kPi * hofer_length(H, opts.osc))
    throw std::invalid_argument("shrinking_calabi_sequence: cal_path(H) vanishes");
  const GridSpec g{opts.grid_n, 1.0, Vec2::Zero()};
  const double hess = max_hessian_norm(H);
  const PlaneMap id = PlaneMap::identity(g);

  std::vector<SequenceMember> out;
  for (double a : scales) {
    if (2 * a * H.support_radius() < 4 * g.spacing())
      throw std::invalid_argument("shrinking_calabi_sequence: support at scale " + std::to_string(a) +
                                  " spans fewer than 4 grid cells");
    SequenceMember m;
    m.a = a;
    m.hamiltonian = scaled(H, a, 1.0 / (a * a));
    m.cal = cal_path(m.hamiltonian, opts.cal);
    m.hofer_len = hofer_length(m.hamiltonian, opts.osc);
    const double omega = hess / std::pow(a, 4);
    m.dt = omega > 0 ? std::min(opts.dt, opts.theta_step / omega) : opts.dt;
    FlowOptions fo;
    fo.dt = m.dt;
    fo.inverse = true;
    m.c0_dist = c0_distance(flow_map(m.hamiltonian, 1.0, g, fo), id);
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<double> alexander_endpoint_monitor(const ScalarTimeField& H, const std::vector<double>& s,
                                               int grid_n, double dt, int nt) {
  const GridSpec g{grid_n, 1.0, Vec2::Zero()};
  const PlaneMap id = PlaneMap::identity(g);
  std::vector<double> out;
  for (double a : s) {
    if (a == 0) {
      out.push_back(0.0);
      continue;
    }
    const ScalarTimeField Ha = rescale(H, a).hamiltonian;
    double worst = 0;
    FlowOptions fo;
    fo.dt = dt;
    fo.inverse = true;
    for (int k = 1; k <= nt; ++k) worst = std::max(worst, c0_distance(flow_map(Ha, double(k) / nt, g, fo), id));
    out.push_back(worst);
  }
  return out;
}

}  // namespace symlab
