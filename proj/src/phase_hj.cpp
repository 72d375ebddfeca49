#include "symlab/phase_hj.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>

namespace symlab {

namespace {

// Running chord action: trapezoid for bp . dbq, Simpson over sample pairs for H.
class ActionSum {
 public:
  explicit ActionSum(double h) : h_(h) {}

  void push(double H, const ChartPoint& z) {
    if (count_ > 0) theta_ += 0.5 * (prev_.bp + z.bp).dot(z.bq - prev_.bq);
    if (count_ == 0) {
      even_ = H;
    } else if (count_ % 2 == 1) {
      odd_ = H;
    } else {
      simpson_ += h_ / 3.0 * (even_ + 4.0 * odd_ + H);
      even_ = H;
    }
    prev_ = z;
    ++count_;
  }
  // Only meaningful after an odd number of samples.
  bool complete() const { return count_ % 2 == 1; }
  double theta() const { return theta_; }
  double hamiltonian() const { return simpson_; }
  double action() const { return theta_ - simpson_; }

 private:
  double h_;
  long count_ = 0;
  ChartPoint prev_{Vec2::Zero(), Vec2::Zero()};
  double theta_ = 0, simpson_ = 0, even_ = 0, odd_ = 0;
};

int even_steps(double t, double dt) {
  const int m = step_count(0.0, t, dt);
  return m + m % 2;
}

// Integer index of t on the lattice k h, or -1 when t is off the lattice.
long lattice_index(double t, double h) {
  const double k = std::round(t / h);
  return std::abs(k * h - t) <= 1e-9 * std::max(1.0, std::abs(t)) ? long(k) : -1;
}

void check_uniform(const std::vector<double>& s, const char* who) {
  if (s.size() < 2) return;
  const double h = (s.back() - s.front()) / double(s.size() - 1);
  if (!(h > 0)) throw std::invalid_argument(std::string(who) + ": samples must increase");
  for (size_t k = 1; k < s.size(); ++k)
    if (std::abs(s[k] - s[k - 1] - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw std::invalid_argument(std::string(who) + ": samples are not uniform");
}

struct SeedRecord {
  ArrayXXd x1, x2, h;
};

// Chords of every seed, recorded at the given even step indices (ascending).
std::vector<SeedRecord> lift_seeds(const ScalarTimeField& H, const std::vector<double>& offsets, const GridSpec& g,
                                   double h, const std::vector<long>& record, double cover) {
  const Index n = g.nodes();
  std::vector<SeedRecord> out(record.size(), SeedRecord{ArrayXXd(n, n), ArrayXXd(n, n), ArrayXXd(n, n)});
  const long last = record.empty() ? 0 : record.back();
  const double support = H.compact() ? H.support_radius() : kInf;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const Vec2 y = g.node(i, j);
      const bool moves = !H.is_zero() && y.norm() < support;
      Vec2 x = y;
      ActionSum acc(h);
      size_t r = 0;
      for (long k = 0; k <= last; ++k) {
        const double s = k * h;
        if (k > 0 && moves) x = integrate_flow(H, s - h, s, x, h, cover);
        acc.push(H(s, x) - offsets[k], to_chart(x, y));
        if (r < record.size() && record[r] == k) {
          out[r].x1(i, j) = x.x();
          out[r].x2(i, j) = x.y();
          out[r].h(i, j) = acc.action();
          ++r;
        }
      }
    }
  return out;
}

std::vector<double> sampled_offsets(const NormalizedField* F, long m, double h) {
  std::vector<double> c(m + 1, 0.0);
  if (F)
    for (long k = 0; k <= m; ++k) c[k] = F->offset(k * h);
  return c;
}

BasicGenerating basic_core(const ScalarTimeField& H, const NormalizedField* F, double t,
                           const BasicGeneratingOptions& opts) {
  if (!(t >= 0)) throw std::invalid_argument("basic_generating: t must be nonnegative");
  if (opts.n < 4) throw std::invalid_argument("basic_generating: need at least 4 seed intervals");
  BasicGenerating out;
  out.seeds = GridSpec{opts.n, 1.0, Vec2::Zero()};
  out.t = t;
  const long m = t == 0 ? 0 : even_steps(t, opts.dt);
  const double h = m == 0 ? opts.dt : t / double(m);
  std::vector<SeedRecord> rec = lift_seeds(H, sampled_offsets(F, m, h), out.seeds, h, {m}, opts.coverage_radius);
  SeedRecord& r = rec.front();
  const Index n = out.seeds.nodes();
  out.q1.resize(n, n);
  out.q2.resize(n, n);
  out.p1.resize(n, n);
  out.p2.resize(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const ChartPoint z = to_chart(Vec2(r.x1(i, j), r.x2(i, j)), out.seeds.node(i, j));
      out.q1(i, j) = z.bq.x();
      out.q2(i, j) = z.bq.y();
      out.p1(i, j) = z.bp.x();
      out.p2(i, j) = z.bp.y();
    }
  out.h = std::move(r.h);

  const OneFormField dh = differential(GridField2D(out.seeds, out.h));
  const OneFormField dq1 = differential(GridField2D(out.seeds, out.q1));
  const OneFormField dq2 = differential(GridField2D(out.seeds, out.q2));
  for (Index j = 2; j + 2 < n; ++j)
    for (Index i = 2; i + 2 < n; ++i) {
      const double e1 = dh.a1.value(i, j) - out.p1(i, j) * dq1.a1.value(i, j) - out.p2(i, j) * dq2.a1.value(i, j);
      const double e2 = dh.a2.value(i, j) - out.p1(i, j) * dq1.a2.value(i, j) - out.p2(i, j) * dq2.a2.value(i, j);
      out.exactness = std::max(out.exactness, std::hypot(e1, e2));
    }
  return out;
}

GridSpec chart_grid(const DiscDomain& d, int n) { return GridSpec{n, d.radius, Vec2::Zero()}; }

// A point of the chart grid outside the disc, hence outside every support.
Vec2 outside_point(const DiscDomain& d) { return Vec2(d.radius, d.radius); }

}  // namespace

ChartHamiltonian chart_lift(const ScalarTimeField& F) {
  return [F](double t, const ChartPoint& z) { return F(t, (z.bq + 0.5 * jmap<double>(z.bp)).eval()); };
}

ChartHamiltonian chart_lift(const NormalizedField& F) {
  return [F](double t, const ChartPoint& z) { return F(t, (z.bq + 0.5 * jmap<double>(z.bp)).eval()); };
}

ActionRecord classical_action(const ChartHamiltonian& H, std::vector<double> times, std::vector<ChartPoint> path) {
  if (times.size() != path.size())
    throw std::invalid_argument("classical_action: path and time samples differ in length");
  if (times.size() < 3 || times.size() % 2 == 0)
    throw std::invalid_argument("classical_action: need an even number of time intervals");
  check_uniform(times, "classical_action");
  ActionRecord rec;
  ActionSum acc(times[1] - times[0]);
  for (size_t k = 0; k < times.size(); ++k) acc.push(H(times[k], path[k]), path[k]);
  rec.theta_part = acc.theta();
  rec.hamiltonian_part = acc.hamiltonian();
  rec.action = acc.action();
  rec.times = std::move(times);
  rec.trajectory = std::move(path);
  return rec;
}

std::vector<ChartPoint> lift_trajectory(const ScalarTimeField& H, const Vec2& x, double t, double dt,
                                        std::vector<double>* times) {
  const int m = std::max(2, even_steps(t, dt));
  const double h = t / m;
  std::vector<ChartPoint> out;
  out.reserve(m + 1);
  if (times) times->assign(m + 1, 0.0);
  Vec2 z = x;
  for (int k = 0; k <= m; ++k) {
    if (k > 0) z = integrate_flow(H, (k - 1) * h, k * h, z, h);
    out.push_back(to_chart(z, x));
    if (times) (*times)[k] = k * h;
  }
  return out;
}

BasicGenerating basic_generating(const ScalarTimeField& H, double t, const BasicGeneratingOptions& opts) {
  return basic_core(H, nullptr, t, opts);
}

BasicGenerating basic_generating(const NormalizedField& F, double t, const BasicGeneratingOptions& opts) {
  return basic_core(F.disc_part(), &F, t, opts);
}

double identity_region_value(const NormalizedField& F, double t, double dt) {
  if (t == 0) return 0.0;
  const int m = std::max(2, even_steps(t, dt));
  const Vec2 q0 = outside_point(F.domain());
  std::vector<double> times(m + 1);
  for (int k = 0; k <= m; ++k) times[k] = k * (t / m);
  return classical_action(chart_lift(F), std::move(times),
                          std::vector<ChartPoint>(m + 1, ChartPoint{q0, Vec2::Zero()}))
      .action;
}

PhaseFunction phase_function_from_map(const PlaneMap& phi, double identity_value, const PhaseOptions& opts) {
  const GraphicalCheck chk = is_graphical(phi, opts.recover.delta);
  if (!chk)
    throw std::invalid_argument("phase function: time slice is not graphical (min det " +
                                std::to_string(chk.min_det) + ")");
  PhaseFunction out;
  out.min_det = chk.min_det;
  out.identity_value = identity_value;
  out.alpha = recover_one_form(phi, opts.recover);
  GeneratingFunction gf = integrate_generating(out.alpha, identity_value, opts.generating);
  out.f = std::move(gf.g);
  out.path_residual = gf.path_residual;
  out.max_p = std::sqrt((out.alpha.a1.values().square() + out.alpha.a2.values().square()).maxCoeff());
  return out;
}

PhaseFunction phase_function_graphical(const ScalarTimeField& F, const DiscDomain& domain, double t,
                                       const PhaseOptions& opts) {
  domain.validate();
  const NormalizedField Fbar = normalize_on_sphere(F, domain, opts.quad_n);
  FlowOptions fo;
  fo.dt = opts.dt;
  fo.jacobian = true;
  const PlaneMap phi = flow_map(F, t, chart_grid(domain, opts.n), fo);
  return phase_function_from_map(phi, identity_region_value(Fbar, t, opts.dt), opts);
}

PhaseFamily timewise_family(const ScalarTimeField& F, const DiscDomain& domain, const std::vector<double>& times,
                            const PhaseOptions& opts) {
  if (times.empty() || times.front() != 0.0) throw std::invalid_argument("timewise_family: times must start at 0");
  domain.validate();
  const NormalizedField Fbar = normalize_on_sphere(F, domain, opts.quad_n);

  // identity values from one constant chord when every time sits on an even lattice index
  std::vector<double> ident(times.size(), 0.0);
  const long m = std::max(2, even_steps(times.back(), opts.dt));
  const double h = times.back() / m;
  bool aligned = true;
  for (double t : times) {
    const long k = lattice_index(t, h);
    aligned = aligned && k >= 0 && k % 2 == 0;
  }
  if (aligned) {
    const ChartHamiltonian G = chart_lift(Fbar);
    const ChartPoint z0{outside_point(domain), Vec2::Zero()};
    ActionSum acc(h);
    size_t r = 0;
    for (long k = 0; k <= m && r < times.size(); ++k) {
      acc.push(G(k * h, z0), z0);
      while (r < times.size() && lattice_index(times[r], h) == k) ident[r++] = acc.action();
    }
  } else {
    for (size_t k = 0; k < times.size(); ++k) ident[k] = identity_region_value(Fbar, times[k], opts.dt);
  }

  FlowOptions fo;
  fo.dt = opts.dt;
  fo.jacobian = true;
  const HamiltonianPath path = hamiltonian_path(F, times, chart_grid(domain, opts.n), fo);
  PhaseFamily fam;
  fam.parameter_samples = times;
  for (size_t k = 0; k < times.size(); ++k)
    fam.fields.push_back(phase_function_from_map(path.maps[k], ident[k], opts).f);
  fam.normalization_value = ident.back();
  return fam;
}

OneFormField lagrangian_selector(const GridField2D& f) { return differential(f); }

HJResidual hj_residual(const PhaseFamily& family, const ChartHamiltonian& G) {
  const size_t m = family.size();
  if (m < 3 || family.parameter_samples.size() != m)
    throw std::invalid_argument("hj_residual: need at least 3 parameter samples");
  check_uniform(family.parameter_samples, "hj_residual");
  for (const GridField2D& f : family.fields)
    if (!f.same_geometry(family.fields.front()))
      throw std::invalid_argument("hj_residual: members on different grids");
  HJResidual out;
  out.h = family.fields.front().spacing();
  out.h_a = family.parameter_samples[1] - family.parameter_samples[0];
  const Index n = family.fields.front().size();
  for (size_t k = 1; k + 1 < m; ++k) {
    const double a = family.parameter_samples[k];
    const OneFormField df = differential(family.fields[k]);
    const ArrayXXd dfda = (family.fields[k + 1].values() - family.fields[k - 1].values()) / (2 * out.h_a);
    for (Index j = 2; j + 2 < n; ++j)
      for (Index i = 2; i + 2 < n; ++i) {
        const ChartPoint z{family.fields[k].node(i, j), Vec2(df.a1.value(i, j), df.a2.value(i, j))};
        out.residual = std::max(out.residual, std::abs(dfda(i, j) + G(a, z)));
      }
  }
  return out;
}

SuspensionDefect suspension_check(const ScalarTimeField& H, const SuspensionOptions& opts) {
  if (opts.times.empty()) throw std::invalid_argument("suspension_check: no sample times");
  const double h = opts.dt;
  const long d = lattice_index(opts.dtau, h);
  if (d <= 0 || d % 2) throw std::invalid_argument("suspension_check: dtau must be an even multiple of dt");
  std::map<long, size_t> slot;
  for (double t : opts.times) {
    const long k = lattice_index(t, h);
    if (k < 0 || k % 2 || k - 2 * d < 0) throw std::invalid_argument("suspension_check: bad sample time");
    for (long o = -2; o <= 2; ++o) slot[k + o * d] = 0;
  }
  std::vector<long> record;
  for (auto& [k, s] : slot) {
    s = record.size();
    record.push_back(k);
  }
  const GridSpec g{opts.n, 1.0, Vec2::Zero()};
  const std::vector<SeedRecord> rec =
      lift_seeds(H, std::vector<double>(record.back() + 1, 0.0), g, h, record, kDefaultCoverage);

  SuspensionDefect out;
  const Index n = g.nodes();
  const double D = d * h;
  for (double t : opts.times) {
    const long k = lattice_index(t, h);
    const SeedRecord& r = rec[slot[k]];
    const OneFormField dh = differential(GridField2D(g, r.h));
    std::array<OneFormField, 2> dq;
    std::array<ArrayXXd, 2> q, p;
    for (int c = 0; c < 2; ++c) {
      q[c].resize(n, n);
      p[c].resize(n, n);
    }
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) {
        const ChartPoint z = to_chart(Vec2(r.x1(i, j), r.x2(i, j)), g.node(i, j));
        q[0](i, j) = z.bq.x();
        q[1](i, j) = z.bq.y();
        p[0](i, j) = z.bp.x();
        p[1](i, j) = z.bp.y();
      }
    for (int c = 0; c < 2; ++c) dq[c] = differential(GridField2D(g, q[c]));

    // fourth order time differences from the records at t +- D, t +- 2D
    auto ddt = [&](auto&& value, Index i, Index j) {
      auto v = [&](long o) { return value(rec[slot[k + o * d]], i, j); };
      return (-v(2) + 8 * v(1) - 8 * v(-1) + v(-2)) / (12 * D);
    };
    for (Index j = 2; j + 2 < n; ++j)
      for (Index i = 2; i + 2 < n; ++i) {
        const Vec2 y = g.node(i, j);
        const Vec2 x(r.x1(i, j), r.x2(i, j));
        const Vec2 bp(p[0](i, j), p[1](i, j));
        const Vec2 spatial(dh.a1.value(i, j) - bp.x() * dq[0].a1.value(i, j) - bp.y() * dq[1].a1.value(i, j),
                           dh.a2.value(i, j) - bp.x() * dq[0].a2.value(i, j) - bp.y() * dq[1].a2.value(i, j));
        const double dht = ddt([](const SeedRecord& s, Index a, Index b) { return s.h(a, b); }, i, j);
        Vec2 dbq;
        dbq.x() = ddt([&](const SeedRecord& s, Index a, Index b) { return 0.5 * (s.x1(a, b) + y.x()); }, i, j);
        dbq.y() = ddt([&](const SeedRecord& s, Index a, Index b) { return 0.5 * (s.x2(a, b) + y.y()); }, i, j);
        // a = dh/dt - bp . dbq/dt must equal -H(t, phi^t(o_q))
        const double a = dht - bp.dot(dbq);
        const double temporal = std::abs(a + H(t, x));
        out.spatial = std::max(out.spatial, spatial.norm());
        out.temporal = std::max(out.temporal, temporal);
        out.total = std::max(out.total, std::hypot(spatial.norm(), temporal));
      }
  }
  return out;
}

namespace {

std::vector<double> parameter_derivative(const std::vector<double>& a, const std::vector<double>& v) {
  const size_t m = v.size();
  std::vector<double> d(m, 0.0);
  if (m < 2) return d;
  const double h = a[1] - a[0];
  if (m == 2) {
    d[0] = d[1] = (v[1] - v[0]) / h;
    return d;
  }
  for (size_t k = 1; k + 1 < m; ++k) d[k] = (v[k + 1] - v[k - 1]) / (2 * h);
  d[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h);
  d[m - 1] = (3 * v[m - 1] - 4 * v[m - 2] + v[m - 3]) / (2 * h);
  return d;
}

double rest_of_sphere(const DiscDomain& d) { return d.sphere_volume - d.area(); }

}  // namespace

PhaseIntegral phase_integral(const PhaseFamily& family, const DiscDomain& domain) {
  check_uniform(family.parameter_samples, "phase_integral");
  if (family.parameter_samples.size() != family.size())
    throw std::invalid_argument("phase_integral: parameter and field counts differ");
  PhaseIntegral out;
  for (const GridField2D& f : family.fields)
    out.I.push_back(integrate_disc(f, domain.radius) + f.value(0, 0) * rest_of_sphere(domain));
  out.dI = parameter_derivative(family.parameter_samples, out.I);
  return out;
}

std::vector<double> hamiltonian_integral(const PhaseFamily& family, const ChartHamiltonian& G,
                                         const DiscDomain& domain) {
  std::vector<double> out;
  for (size_t k = 0; k < family.size(); ++k) {
    const double a = family.parameter_samples[k];
    const GridField2D& f = family.fields[k];
    const OneFormField df = differential(f);
    const Index n = f.size();
    ArrayXXd v(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        v(i, j) = G(a, ChartPoint{f.node(i, j), Vec2(df.a1.value(i, j), df.a2.value(i, j))});
    const double outside = G(a, ChartPoint{f.node(0, 0), Vec2::Zero()});
    out.push_back(integrate_disc(GridField2D(f.spec(), std::move(v)), domain.radius) +
                  outside * rest_of_sphere(domain));
  }
  return out;
}

}  // namespace symlab
