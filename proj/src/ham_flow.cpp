#include "symlab/ham_flow.hpp"

#include "symlab/calabi.hpp"

#include <algorithm>
#include <sstream>

namespace symlab {

namespace {

inline Vec2 rotate_gradient(const Vec2& g) { return Vec2(g.y(), -g.x()); }

// S * Hess with S = [[0, 1], [-1, 0]].
inline Mat2 field_jacobian(const Mat2& hess) {
  Mat2 m;
  m.row(0) = hess.row(1);
  m.row(1) = -hess.row(0);
  return m;
}

std::string point_str(const Vec2& x) {
  std::ostringstream os;
  os << "(" << x.x() << ", " << x.y() << ")";
  return os.str();
}

}  // namespace

int step_count(double t0, double t1, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("flow: dt must be positive");
  const double span = std::abs(t1 - t0);
  if (span == 0) return 0;
  return std::max(1, int(std::ceil(span / dt - 1e-9)));
}

Vec2 vector_field(const ScalarTimeField& H, double t, const Vec2& x, double coverage_radius) {
  if (x.norm() > coverage_radius)
    throw std::out_of_range("vector_field: point " + point_str(x) + " outside coverage");
  return rotate_gradient(H.gradient(t, x));
}

Vec2 vector_field_fd(const ScalarTimeField& H, double t, const Vec2& x, double h_d,
                     double coverage_radius) {
  if (x.norm() > coverage_radius)
    throw std::out_of_range("vector_field: point " + point_str(x) + " outside coverage");
  return rotate_gradient(H.gradient_fd(t, x, h_d));
}

Vec2 integrate_flow(const ScalarTimeField& H, double t0, double t1, const Vec2& x0, double dt,
                    double coverage_radius) {
  if (H.is_zero() || (H.compact() && x0.norm() >= H.support_radius())) return x0;
  const int n = step_count(t0, t1, dt);
  if (n == 0) return x0;
  const double h = (t1 - t0) / n;
  auto X = [&](double t, const Vec2& x) { return rotate_gradient(H.gradient(t, x)); };
  Vec2 x = x0;
  for (int k = 0; k < n; ++k) {
    const double t = t0 + k * h;
    const Vec2 k1 = X(t, x);
    const Vec2 k2 = X(t + h / 2, x + h / 2 * k1);
    const Vec2 k3 = X(t + h / 2, x + h / 2 * k2);
    const Vec2 k4 = X(t + h, x + h * k3);
    const Vec2 next = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    if (!(next.norm() <= coverage_radius))
      throw FlowExit("integrate_flow: trajectory left coverage at t=" + std::to_string(t + h) +
                         ", last valid state " + point_str(x),
                     x, t);
    x = next;
  }
  return x;
}

FlowState integrate_flow_jacobian(const ScalarTimeField& H, double t0, double t1, const Vec2& x0,
                                  double dt, double coverage_radius) {
  if (H.is_zero() || (H.compact() && x0.norm() >= H.support_radius())) return {x0, Mat2::Identity()};
  const int n = step_count(t0, t1, dt);
  if (n == 0) return {x0, Mat2::Identity()};
  const double h = (t1 - t0) / n;
  Vec2 x = x0;
  Mat2 J = Mat2::Identity();
  auto X = [&](double t, const Vec2& y) { return rotate_gradient(H.gradient(t, y)); };
  auto DX = [&](double t, const Vec2& y) { return field_jacobian(H.hessian(t, y)); };
  for (int k = 0; k < n; ++k) {
    const double t = t0 + k * h;
    const Vec2 k1 = X(t, x);
    const Mat2 m1 = DX(t, x) * J;
    const Vec2 x2 = x + h / 2 * k1;
    const Vec2 k2 = X(t + h / 2, x2);
    const Mat2 m2 = DX(t + h / 2, x2) * (J + h / 2 * m1);
    const Vec2 x3 = x + h / 2 * k2;
    const Vec2 k3 = X(t + h / 2, x3);
    const Mat2 m3 = DX(t + h / 2, x3) * (J + h / 2 * m2);
    const Vec2 x4 = x + h * k3;
    const Vec2 k4 = X(t + h, x4);
    const Mat2 m4 = DX(t + h, x4) * (J + h * m3);
    const Vec2 next = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    if (!(next.norm() <= coverage_radius))
      throw FlowExit("integrate_flow: trajectory left coverage at t=" + std::to_string(t + h) +
                         ", last valid state " + point_str(x),
                     x, t);
    x = next;
    J += h / 6 * (m1 + 2 * m2 + 2 * m3 + m4);
  }
  return {x, J};
}

PlaneMap::PlaneMap(GridField2D fx, GridField2D fy, double support_radius, double jacobian_tolerance)
    : fx_(std::move(fx)), fy_(std::move(fy)), support_(support_radius), jac_tol_(jacobian_tolerance) {
  if (!fx_.same_geometry(fy_)) throw std::invalid_argument("PlaneMap: component grids differ");
  if (!(support_radius >= 0)) throw std::invalid_argument("PlaneMap: negative support radius");
}

PlaneMap PlaneMap::identity(const GridSpec& g, double support_radius) {
  return from_function(g, [](const Vec2& y) { return y; }, support_radius);
}

void PlaneMap::set_jacobian(std::array<GridField2D, 4> j) {
  for (const auto& f : j)
    if (!f.same_geometry(fx_)) throw std::invalid_argument("PlaneMap: jacobian grid mismatch");
  jac_ = std::move(j);
}

void PlaneMap::set_inverse(GridField2D gx, GridField2D gy) {
  if (!gx.same_geometry(fx_) || !gy.same_geometry(fx_))
    throw std::invalid_argument("PlaneMap: inverse grid mismatch");
  inv_ = std::make_pair(std::move(gx), std::move(gy));
}

Vec2 PlaneMap::operator()(const Vec2& x) const {
  if (x.norm() >= support_) return x;
  return Vec2(fx_(x), fy_(x));
}

Mat2 PlaneMap::interpolant_jacobian(const Vec2& x) const {
  if (x.norm() >= support_) return Mat2::Identity();
  Mat2 m;
  m.row(0) = fx_.gradient(x).transpose();
  m.row(1) = fy_.gradient(x).transpose();
  return m;
}

Mat2 PlaneMap::jacobian(const Vec2& x) const {
  if (!jac_) return interpolant_jacobian(x);
  if (x.norm() >= support_) return Mat2::Identity();
  const auto& j = *jac_;
  Mat2 m;
  m << j[0](x), j[1](x), j[2](x), j[3](x);
  return m;
}

Mat2 PlaneMap::node_jacobian(Index i, Index j) const {
  if (jac_) {
    const auto& f = *jac_;
    Mat2 m;
    m << f[0].value(i, j), f[1].value(i, j), f[2].value(i, j), f[3].value(i, j);
    return m;
  }
  // Fourth order differences where the stencil fits, second order otherwise.
  const Index n = fx_.size();
  const double h = fx_.spacing();
  auto diff = [&](const GridField2D& f, bool along_i) {
    auto v = [&](Index k) { return along_i ? f.value(k, j) : f.value(i, k); };
    const Index c = along_i ? i : j;
    if (c >= 2 && c + 2 < n) return (-v(c + 2) + 8 * v(c + 1) - 8 * v(c - 1) + v(c - 2)) / (12 * h);
    if (c >= 1 && c + 1 < n) return (v(c + 1) - v(c - 1)) / (2 * h);
    if (c == 0) return (-3 * v(0) + 4 * v(1) - v(2)) / (2 * h);
    return (3 * v(c) - 4 * v(c - 1) + v(c - 2)) / (2 * h);
  };
  Mat2 m;
  m << diff(fx_, true), diff(fx_, false), diff(fy_, true), diff(fy_, false);
  return m;
}

Vec2 PlaneMap::newton_inverse(const Vec2& y, const Vec2& seed, double tol, int max_iter) const {
  Vec2 x = seed;
  if (!fx_.covers(x)) x = y;
  Vec2 r = (*this)(x) - y;
  for (int it = 0; it < max_iter; ++it) {
    if (r.norm() <= tol) return x;
    const Mat2 J = interpolant_jacobian(x);
    const double det = J.determinant();
    if (!(std::abs(det) > 1e-14)) break;
    const Vec2 step = J.inverse() * r;
    double lam = 1.0;
    bool improved = false;
    for (int b = 0; b < 30; ++b) {
      const Vec2 cand = x - lam * step;
      if (fx_.covers(cand)) {
        const Vec2 rc = (*this)(cand) - y;
        if (rc.norm() < r.norm()) {
          x = cand;
          r = rc;
          improved = true;
          break;
        }
      }
      lam *= 0.5;
    }
    if (!improved) break;
  }
  if (r.norm() <= tol) return x;
  throw InversionError("Newton inversion stalled at target " + point_str(y) +
                           " (residual " + std::to_string(r.norm()) + ")",
                       y);
}

Vec2 PlaneMap::inverse(const Vec2& y) const {
  if (y.norm() >= support_) return y;
  if (inv_) return Vec2(inv_->first(y), inv_->second(y));
  return newton_inverse(y, y);
}

std::pair<ArrayXXd, ArrayXXd> PlaneMap::inverse_nodes() const {
  const Index n = fx_.size();
  ArrayXXd gx(n, n), gy(n, n);
  if (inv_) return {inv_->first.values(), inv_->second.values()};
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const Vec2 y = fx_.node(i, j);
      Vec2 x = y;
      if (y.norm() < support_) {
        bool done = false;
        // Previous node in the sweep, then the node below, then the target itself.
        std::array<std::optional<Vec2>, 3> seeds;
        if (i > 0) seeds[0] = Vec2(gx(i - 1, j), gy(i - 1, j)) + (y - fx_.node(i - 1, j));
        if (j > 0) seeds[1] = Vec2(gx(i, j - 1), gy(i, j - 1)) + (y - fx_.node(i, j - 1));
        seeds[2] = y;
        for (const auto& s : seeds) {
          if (!s || !s->allFinite()) continue;
          try {
            x = newton_inverse(y, *s);
            done = true;
            break;
          } catch (const InversionError&) {
          }
        }
        const GridSpec g = grid();
        if (!done && (y - g.center).norm() > g.half_width * (1 + 1e-12)) {
          x = Vec2::Constant(std::numeric_limits<double>::quiet_NaN());
          done = true;
        }
        if (!done)
          throw InversionError("inverse_nodes: Newton failed at node (" + std::to_string(i) + ", " +
                                   std::to_string(j) + ") " + point_str(y),
                               y);
      }
      gx(i, j) = x.x();
      gy(i, j) = x.y();
    }
  }
  return {gx, gy};
}

double PlaneMap::max_det_defect() const {
  const GridSpec g = grid();
  double worst = 0;
  for (Index j = 0; j < g.nodes(); ++j)
    for (Index i = 0; i < g.nodes(); ++i) {
      if ((g.node(i, j) - g.center).norm() > g.half_width * (1 + 1e-12)) continue;
      worst = std::max(worst, std::abs(node_jacobian(i, j).determinant() - 1.0));
    }
  return worst;
}

double PlaneMap::identity_defect() const {
  const GridSpec g = grid();
  double worst = 0;
  for (Index j = 0; j < g.nodes(); ++j)
    for (Index i = 0; i < g.nodes(); ++i) {
      const Vec2 y = g.node(i, j);
      if (y.norm() >= support_) worst = std::max(worst, (node_image(i, j) - y).norm());
    }
  return worst;
}

HamiltonianPath hamiltonian_path(const ScalarTimeField& H, std::vector<double> times,
                                 const GridSpec& g, const FlowOptions& opts) {
  if (times.empty() || times.front() != 0.0)
    throw std::invalid_argument("hamiltonian_path: time samples must start at 0");
  if (!std::is_sorted(times.begin(), times.end()))
    throw std::invalid_argument("hamiltonian_path: time samples must be increasing");
  const Index n = g.nodes();
  const size_t m = times.size();
  std::vector<ArrayXXd> vx(m, ArrayXXd(n, n)), vy(m, ArrayXXd(n, n));
  std::vector<std::array<ArrayXXd, 4>> vj;
  if (opts.jacobian) vj.assign(m, {ArrayXXd(n, n), ArrayXXd(n, n), ArrayXXd(n, n), ArrayXXd(n, n)});
  const double support = H.compact() ? H.support_radius() : kInf;
  // The grid itself is always covered.
  const double cover = std::max(opts.coverage_radius, (g.center.norm() + std::sqrt(2.0) * g.half_width) * (1 + 1e-9));
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      Vec2 x = g.node(i, j);
      Mat2 J = Mat2::Identity();
      const bool moves = !H.is_zero() && x.norm() < support;
      for (size_t k = 0; k < m; ++k) {
        if (k > 0 && moves) {
          if (opts.jacobian) {
            const FlowState s = integrate_flow_jacobian(H, times[k - 1], times[k], x, opts.dt, cover);
            x = s.x;
            J = s.jac * J;
          } else {
            x = integrate_flow(H, times[k - 1], times[k], x, opts.dt, cover);
          }
        }
        vx[k](i, j) = x.x();
        vy[k](i, j) = x.y();
        if (opts.jacobian) {
          vj[k][0](i, j) = J(0, 0);
          vj[k][1](i, j) = J(0, 1);
          vj[k][2](i, j) = J(1, 0);
          vj[k][3](i, j) = J(1, 1);
        }
      }
    }
  HamiltonianPath path{H, times, {}};
  path.maps.reserve(m);
  const double map_support = H.compact() ? H.support_radius() : kInf;
  for (size_t k = 0; k < m; ++k) {
    PlaneMap pm(GridField2D(g, std::move(vx[k])), GridField2D(g, std::move(vy[k])), map_support);
    if (opts.jacobian)
      pm.set_jacobian({GridField2D(g, std::move(vj[k][0])), GridField2D(g, std::move(vj[k][1])),
                       GridField2D(g, std::move(vj[k][2])), GridField2D(g, std::move(vj[k][3]))});
    pm.set_dt(opts.dt);
    if (opts.inverse) {
      // Backward flow from each snapshot time.
      ArrayXXd gx(n, n), gy(n, n);
      for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) {
          Vec2 y = g.node(i, j);
          if (k > 0 && !H.is_zero() && y.norm() < support) y = integrate_flow(H, times[k], 0.0, y, opts.dt, cover);
          gx(i, j) = y.x();
          gy(i, j) = y.y();
        }
      pm.set_inverse(GridField2D(g, std::move(gx)), GridField2D(g, std::move(gy)));
    }
    path.maps.push_back(std::move(pm));
  }
  return path;
}

PlaneMap flow_map(const ScalarTimeField& H, double t, const GridSpec& g, const FlowOptions& opts) {
  if (!(t >= 0 && t <= 1)) throw std::invalid_argument("flow_map: time must lie in [0, 1]");
  HamiltonianPath p = hamiltonian_path(H, t == 0 ? std::vector<double>{0.0} : std::vector<double>{0.0, t},
                                       g, opts);
  return std::move(p.maps.back());
}

double group_law_defect(const ScalarTimeField& H, double t, double s, const GridSpec& g, double dt) {
  if (t + s > 1 + 1e-12) throw std::invalid_argument("group_law_defect: t + s must not exceed 1");
  double worst = 0;
  const Index stride = std::max<Index>(1, g.nodes() / 16);
  for (Index j = 0; j < g.nodes(); j += stride)
    for (Index i = 0; i < g.nodes(); i += stride) {
      const Vec2 x = g.node(i, j);
      const Vec2 direct = integrate_flow(H, 0.0, t + s, x, dt);
      const Vec2 restarted = integrate_flow(H, t, t + s, integrate_flow(H, 0.0, t, x, dt), dt);
      worst = std::max(worst, (direct - restarted).norm());
    }
  return worst;
}

double osc(const ScalarTimeField& H, double t, int n) {
  if (H.is_zero()) return 0.0;
  const double R = std::min(H.compact() ? H.support_radius() : kInf, 1.0);
  const GridSpec g = GridSpec::fitted(R, n);
  double lo = kInf, hi = -kInf;
  if (H.compact() && H.support_radius() < 1.0) lo = hi = 0.0;
  for (Index j = 0; j < g.nodes(); ++j)
    for (Index i = 0; i < g.nodes(); ++i) {
      const Vec2 x = g.node(i, j);
      if (x.norm() > R * (1 + 1e-12)) continue;
      const double v = H(t, x);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  return hi - lo;
}

double hofer_length(const ScalarTimeField& H, const OscOptions& opts) {
  if (H.is_zero()) return 0.0;
  return simpson([&](double t) { return osc(H, t, opts.n); }, 0.0, 1.0, opts.nt);
}

double c0_distance(const PlaneMap& phi, const PlaneMap& psi) {
  if (!phi.fx().same_geometry(psi.fx()))
    throw std::invalid_argument("c0_distance: maps live on different grids");
  const GridSpec g = phi.grid();
  const auto [ax, ay] = phi.inverse_nodes();
  const auto [bx, by] = psi.inverse_nodes();
  double worst = 0;
  for (Index j = 0; j < g.nodes(); ++j)
    for (Index i = 0; i < g.nodes(); ++i) {
      if ((g.node(i, j) - g.center).norm() > g.half_width * (1 + 1e-12)) continue;
      worst = std::max(worst, (phi.node_image(i, j) - psi.node_image(i, j)).norm());
      worst = std::max(worst, std::hypot(ax(i, j) - bx(i, j), ay(i, j) - by(i, j)));
    }
  return worst;
}

HamDistance ham_distance(const ScalarTimeField& H, const ScalarTimeField& K,
                         const HamDistanceOptions& opts) {
  const GridSpec g{opts.c0_grid, 1.0, Vec2::Zero()};
  const auto times = uniform_samples(0.0, 1.0, opts.c0_times);
  FlowOptions fo;
  fo.dt = opts.dt;
  fo.inverse = true;
  const HamiltonianPath ph = hamiltonian_path(H, times, g, fo);
  const HamiltonianPath pk = hamiltonian_path(K, times, g, fo);
  HamDistance d;
  for (size_t k = 0; k < times.size(); ++k) d.c0 = std::max(d.c0, c0_distance(ph.maps[k], pk.maps[k]));
  // leng(l^-1 m) = leng(m l^-1): the two paths are conjugate by l.
  d.hofer = hofer_length(compose_dev(K, H, opts.dt), opts.osc);
  return d;
}

}  // namespace symlab
