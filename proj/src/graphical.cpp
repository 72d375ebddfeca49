#include "symlab/graphical.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <unordered_map>

namespace symlab {

namespace {

// d/dq_k of a grid field at node (i, j): fourth order centered where the stencil fits.
double node_diff(const GridField2D& f, Index i, Index j, int k) {
  const Index n = f.size();
  const double h = f.spacing();
  const Index c = k == 0 ? i : j;
  auto v = [&](Index m) { return k == 0 ? f.value(m, j) : f.value(i, m); };
  if (c >= 2 && c + 2 < n) return (-v(c + 2) + 8 * v(c + 1) - 8 * v(c - 1) + v(c - 2)) / (12 * h);
  if (c >= 1 && c + 1 < n) return (v(c + 1) - v(c - 1)) / (2 * h);
  if (c == 0) return (-3 * v(0) + 4 * v(1) - v(2)) / (2 * h);
  return (3 * v(c) - 4 * v(c - 1) + v(c - 2)) / (2 * h);
}

// Cumulative integral along a line of samples: trapezoid plus the Hermite end correction
// h/12 (m_i - m_{i+1}) with difference tangents, fourth order for smooth data.
Eigen::ArrayXd cumulative(const Eigen::ArrayXd& f, double h) {
  const Index m = f.size();
  Eigen::ArrayXd tang(m);
  for (Index i = 0; i < m; ++i) {
    if (i >= 1 && i + 1 < m)
      tang(i) = 0.5 * (f(i + 1) - f(i - 1));
    else if (i == 0)
      tang(i) = 0.5 * (-3 * f(0) + 4 * f(1) - f(2));
    else
      tang(i) = 0.5 * (3 * f(i) - 4 * f(i - 1) + f(i - 2));
  }
  Eigen::ArrayXd out(m);
  out(0) = 0;
  for (Index i = 0; i + 1 < m; ++i)
    out(i + 1) = out(i) + 0.5 * h * (f(i) + f(i + 1)) + h / 12.0 * (tang(i) - tang(i + 1));
  return out;
}

PlaneMap map_with_jacobian(const GridSpec& g, double support, const std::function<Vec2(const Vec2&)>& f,
                           const std::function<Mat2(const Vec2&)>& df) {
  const Index n = g.nodes();
  ArrayXXd vx(n, n), vy(n, n);
  std::array<ArrayXXd, 4> J;
  for (auto& a : J) a.resize(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const Vec2 y = g.node(i, j);
      const bool inside = y.norm() < support;
      const Vec2 z = inside ? f(y) : y;
      const Mat2 D = inside ? df(y) : Mat2::Identity();
      vx(i, j) = z.x();
      vy(i, j) = z.y();
      J[0](i, j) = D(0, 0);
      J[1](i, j) = D(0, 1);
      J[2](i, j) = D(1, 0);
      J[3](i, j) = D(1, 1);
    }
  PlaneMap m(GridField2D(g, std::move(vx)), GridField2D(g, std::move(vy)), support);
  m.set_jacobian({GridField2D(g, std::move(J[0])), GridField2D(g, std::move(J[1])),
                  GridField2D(g, std::move(J[2])), GridField2D(g, std::move(J[3]))});
  return m;
}

std::string node_str(Index i, Index j) { return "(" + std::to_string(i) + ", " + std::to_string(j) + ")"; }

}  // namespace

Vec2 OneFormField::operator()(const Vec2& q) const {
  if (q.norm() >= support_radius || !a1.covers(q)) return Vec2::Zero();
  return Vec2(a1(q), a2(q));
}

Mat2 OneFormField::derivative(const Vec2& q) const {
  if (q.norm() >= support_radius || !a1.covers(q)) return Mat2::Zero();
  Mat2 D;
  D.row(0) = a1.gradient(q).transpose();
  D.row(1) = a2.gradient(q).transpose();
  return D;
}

Mat2 OneFormField::node_derivative(Index i, Index j) const {
  Mat2 D;
  D << node_diff(a1, i, j, 0), node_diff(a1, i, j, 1), node_diff(a2, i, j, 0), node_diff(a2, i, j, 1);
  return D;
}

OneFormField differential(const GridField2D& f, double support_radius) {
  const Index n = f.size();
  ArrayXXd d1(n, n), d2(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      d1(i, j) = node_diff(f, i, j, 0);
      d2(i, j) = node_diff(f, i, j, 1);
    }
  const GridSpec g = f.spec();
  return {GridField2D(g, std::move(d1)), GridField2D(g, std::move(d2)), support_radius};
}

Closedness closedness(const OneFormField& alpha) {
  const Index n = alpha.a1.size();
  const double h = alpha.a1.spacing();
  const auto& A = alpha.a1.values();
  const auto& B = alpha.a2.values();
  Closedness c;
  for (Index j = 0; j + 1 < n; ++j)
    for (Index i = 0; i + 1 < n; ++i) {
      const double circ = 0.5 * h *
                          ((A(i, j) + A(i + 1, j)) + (B(i + 1, j) + B(i + 1, j + 1)) -
                           (A(i, j + 1) + A(i + 1, j + 1)) - (B(i, j) + B(i, j + 1)));
      c.max_circulation = std::max(c.max_circulation, std::abs(circ));
    }
  c.max_curl = c.max_circulation / (h * h);
  return c;
}

double symmetry_defect(const OneFormField& alpha, int samples, std::uint64_t seed) {
  const Index n = alpha.a1.size();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> node(1, n - 2);
  std::uniform_real_distribution<double> angle(0, 2 * kPi);
  double worst = 0;
  for (int k = 0; k < samples; ++k) {
    const Index i = node(rng), j = node(rng);
    const double tv = angle(rng), tw = angle(rng);
    const Vec2 v(std::cos(tv), std::sin(tv)), w(std::cos(tw), std::sin(tw));
    const Mat2 D = alpha.node_derivative(i, j);
    // <D_v alpha, w> = w^T D v
    worst = std::max(worst, std::abs(w.dot(D * v) - v.dot(D * w)));
  }
  return worst;
}

double starshape_closed_form(const SymmetricMatrix2& A, double r) {
  return 1 + r * r * (A.a * A.b - A.c * A.c);
}

double starshape_det(const SymmetricMatrix2& A, double r) {
  // I - r jA = [[1 + r c, r b], [-r a, 1 - r c]]
  const double m00 = 1 + r * A.c, m01 = r * A.b, m10 = -r * A.a, m11 = 1 - r * A.c;
  const double direct = m00 * m11 - m01 * m10;
  const double closed = starshape_closed_form(A, r);
  const double scale = 1 + r * r * (std::abs(A.a * A.b) + A.c * A.c);
  if (std::abs(direct - closed) > 8 * std::numeric_limits<double>::epsilon() * scale)
    throw std::logic_error("starshape_det: direct expansion disagrees with the closed form");
  return direct;
}

PlaneMap rescaled_map(const PlaneMap& phi, double a) {
  if (!(a > 0 && a <= 1)) throw std::invalid_argument("rescaled_map: a must lie in (0, 1]");
  return map_with_jacobian(
      phi.grid(), a * phi.support_radius(), [&](const Vec2& y) { return (a * phi(y / a)).eval(); },
      [&](const Vec2& y) { return phi.jacobian(y / a); });
}

PlaneMap midpoint_map(const PlaneMap& phi, double a) {
  if (!(a > 0 && a <= 1)) throw std::invalid_argument("midpoint_map: a must lie in (0, 1]");
  return map_with_jacobian(
      phi.grid(), a * phi.support_radius(), [&](const Vec2& y) { return (0.5 * (y + a * phi(y / a))).eval(); },
      [&](const Vec2& y) { return (0.5 * (Mat2::Identity() + phi.jacobian(y / a))).eval(); });
}

GraphicalCheck is_graphical(const PlaneMap& phi, double delta) {
  const PlaneMap kappa = midpoint_map(phi, 1.0);
  const GridSpec g = kappa.grid();
  const Index n = g.nodes();
  const double R = phi.support_radius();
  GraphicalCheck out;
  out.min_det = 1.0;
  double inv_lip = 1.0;  // max |d kappa^{-1}| over the support nodes
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      if (g.node(i, j).norm() >= R) continue;
      const Mat2 D = kappa.node_jacobian(i, j);
      const double d = D.determinant();
      if (d > 0) inv_lip = std::max(inv_lip, D.norm() / d);  // |D^{-1}|_F = |D|_F / det
      if (d < out.min_det) {
        out.min_det = d;
        out.worst_node = g.node(i, j);
      }
    }

  // Collision probe: bucket images at half a cell; two images that close must come from
  // sources no further apart than the local inverse Lipschitz bound allows.
  const double reach = 2.0 * inv_lip * 0.5 * g.spacing() + 2.0 * g.spacing();
  const double cell = 0.5 * g.spacing();
  std::unordered_map<std::int64_t, std::vector<Index>> buckets;
  auto key = [](std::int64_t bx, std::int64_t by) { return (bx << 32) ^ (by & 0xffffffff); };
  std::vector<Vec2> img(size_t(n * n));
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const Vec2 z = kappa.node_image(i, j);
      img[size_t(i + n * j)] = z;
      buckets[key(std::int64_t(std::floor(z.x() / cell)), std::int64_t(std::floor(z.y() / cell)))].push_back(i + n * j);
    }
  for (Index k = 0; k < n * n && out.injective; ++k) {
    const Vec2& z = img[size_t(k)];
    const auto bx = std::int64_t(std::floor(z.x() / cell)), by = std::int64_t(std::floor(z.y() / cell));
    for (std::int64_t dx = -1; dx <= 1 && out.injective; ++dx)
      for (std::int64_t dy = -1; dy <= 1 && out.injective; ++dy) {
        const auto it = buckets.find(key(bx + dx, by + dy));
        if (it == buckets.end()) continue;
        for (Index m : it->second)
          if (m != k && (img[size_t(m)] - z).norm() < cell &&
              (g.node(m % n, m / n) - g.node(k % n, k / n)).norm() > reach) {
            out.injective = false;
            out.worst_node = g.node(k % n, k / n);
            break;
          }
      }
  }
  out.graphical = out.min_det > delta && out.injective;
  return out;
}

OneFormField recover_one_form(const PlaneMap& phi, const RecoverOptions& opts) {
  const GraphicalCheck chk = is_graphical(phi, opts.delta);
  if (!chk)
    throw std::invalid_argument("recover_one_form: map is not graphical (min det " + std::to_string(chk.min_det) +
                                (chk.injective ? "" : ", collision") + ")");
  const PlaneMap kappa = midpoint_map(phi, 1.0);
  const GridSpec g = kappa.grid();
  const Index n = g.nodes();
  std::pair<ArrayXXd, ArrayXXd> y;
  try {
    y = kappa.inverse_nodes();
  } catch (const InversionError& e) {
    throw std::runtime_error(std::string("recover_one_form: ") + e.what());
  }
  ArrayXXd a1(n, n), a2(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const Vec2 q = g.node(i, j);
      const Vec2 yy(y.first(i, j), y.second(i, j));
      if (!yy.allFinite()) throw std::runtime_error("recover_one_form: no preimage at node " + node_str(i, j));
      const Vec2 al = 2.0 * jmap<double>(yy - q);
      a1(i, j) = al.x();
      a2(i, j) = al.y();
    }
  return {GridField2D(g, std::move(a1)), GridField2D(g, std::move(a2)), phi.support_radius()};
}

GeneratingFunction integrate_generating(const OneFormField& alpha, double base_value,
                                        const GeneratingOptions& opts) {
  const Closedness c = closedness(alpha);
  if (c.max_curl > opts.max_curl)
    throw std::invalid_argument("integrate_generating: one-form is not closed (cell curl " +
                                std::to_string(c.max_curl) + ")");
  const Index n = alpha.a1.size();
  const double h = alpha.a1.spacing();
  const auto& A = alpha.a1.values();
  const auto& B = alpha.a2.values();

  // rows first: along j = 0, then up every column
  ArrayXXd g1(n, n), g2(n, n);
  const Eigen::ArrayXd bottom = cumulative(A.col(0), h);
  for (Index i = 0; i < n; ++i) {
    const Eigen::ArrayXd up = cumulative(B.row(i).transpose(), h);
    g1.row(i) = (base_value + bottom(i) + up).transpose();
  }
  // columns first: along i = 0, then across every row
  const Eigen::ArrayXd left = cumulative(B.row(0).transpose(), h);
  for (Index j = 0; j < n; ++j) {
    const Eigen::ArrayXd across = cumulative(A.col(j), h);
    g2.col(j) = base_value + left(j) + across;
  }
  GeneratingFunction out;
  out.path_residual = (g1 - g2).abs().maxCoeff();
  out.g = GridField2D(alpha.a1.spec(), std::move(g1));
  return out;
}

double psi_min_det(const OneFormField& alpha, double r) {
  const Index n = alpha.a1.size();
  const Mat2 J = jmatrix<double>();
  double worst = kInf;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      worst = std::min(worst, (Mat2::Identity() - 0.5 * r * J * alpha.node_derivative(i, j)).determinant());
  return worst;
}

PlaneMap family_from_one_form(const OneFormField& alpha, double r) {
  if (!(r >= 0 && r <= 1)) throw std::invalid_argument("family_from_one_form: r must lie in [0, 1]");
  const GridSpec g = alpha.grid();
  const Index n = g.nodes();
  const double R = alpha.support_radius;
  const Mat2 J = jmatrix<double>();
  ArrayXXd px(n, n), py(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const Vec2 q = g.node(i, j);
      const double d = (Mat2::Identity() - 0.5 * r * J * alpha.node_derivative(i, j)).determinant();
      if (!(d > 0))
        throw std::runtime_error("family_from_one_form: psi_r is not immersive at node " + node_str(i, j) +
                                 " (det " + std::to_string(d) + ")");
      const Vec2 z = q - 0.5 * r * jmap<double>(Vec2(alpha.a1.value(i, j), alpha.a2.value(i, j)));
      px(i, j) = z.x();
      py(i, j) = z.y();
    }
  const PlaneMap psi(GridField2D(g, std::move(px)), GridField2D(g, std::move(py)), R);
  const auto [qx, qy] = psi.inverse_nodes();
  ArrayXXd fx(n, n), fy(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const Vec2 y = g.node(i, j);
      const Vec2 q(qx(i, j), qy(i, j));
      if (!q.allFinite()) throw std::runtime_error("family_from_one_form: no preimage at node " + node_str(i, j));
      const Vec2 z = 2 * q - y;
      fx(i, j) = z.x();
      fy(i, j) = z.y();
    }
  return PlaneMap(GridField2D(g, std::move(fx)), GridField2D(g, std::move(fy)), R);
}

double PhaseFamily::lipschitz(size_t k) const {
  const auto& v = fields.at(k).values();
  const double h = fields[k].spacing();
  const Index n = v.rows();
  const double dx = (v.bottomRows(n - 1) - v.topRows(n - 1)).abs().maxCoeff();
  const double dy = (v.rightCols(n - 1) - v.leftCols(n - 1)).abs().maxCoeff();
  return std::max(dx, dy) / h;
}

TraceChainFamily trace_chain_family(const PlaneMap& phi, const std::vector<double>& scales,
                                    const RecoverOptions& opts) {
  const GraphicalCheck chk = is_graphical(phi, opts.delta);
  if (!chk) throw std::invalid_argument("trace_chain_family: base map is not graphical");
  TraceChainFamily fam;
  fam.scales = scales;
  fam.base_map = phi;
  fam.g.parameter_samples = scales;
  fam.g.normalization_value = 0;
  for (double a : scales) {
    const PlaneMap phi_a = a == 1.0 ? phi : rescaled_map(phi, a);
    OneFormField alpha;
    try {
      alpha = recover_one_form(phi_a, opts);
    } catch (const std::exception& e) {
      throw std::runtime_error("trace_chain_family: graphicality lost at a = " + std::to_string(a) +
                               " (grid too coarse?): " + e.what());
    }
    GeneratingFunction gf = integrate_generating(alpha, 0.0);
    fam.path_residuals.push_back(gf.path_residual);
    fam.g.fields.push_back(std::move(gf.g));
  }
  return fam;
}

namespace {

size_t unit_member(const TraceChainFamily& fam) {
  for (size_t k = 0; k < fam.scales.size(); ++k)
    if (std::abs(fam.scales[k] - 1.0) < 1e-12) return k;
  throw std::invalid_argument("trace chain family has no a = 1 member");
}

}  // namespace

double scaling_defect(const TraceChainFamily& fam) {
  const GridField2D& g1 = fam.g.fields[unit_member(fam)];
  const GridSpec s = g1.spec();
  double worst = 0;
  for (size_t k = 0; k < fam.scales.size(); ++k) {
    const double a = fam.scales[k];
    const GridField2D& ga = fam.g.fields[k];
    for (Index j = 0; j < s.nodes(); ++j)
      for (Index i = 0; i < s.nodes(); ++i) {
        const Vec2 q = s.node(i, j);
        if (!ga.covers(a * q)) continue;
        worst = std::max(worst, std::abs(ga(a * q) - a * a * g1.value(i, j)));
      }
  }
  return worst;
}

double dgada_defect(const TraceChainFamily& fam) {
  const GridField2D& g1 = fam.g.fields[unit_member(fam)];
  std::vector<size_t> order(fam.scales.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](size_t x, size_t y) { return fam.scales[x] < fam.scales[y]; });
  const GridSpec s = g1.spec();
  const double R = fam.base_map.support_radius();
  double worst = 0;
  for (size_t m = 1; m + 1 < order.size(); ++m) {
    const size_t lo = order[m - 1], k = order[m], hi = order[m + 1];
    const double a = fam.scales[k];
    const double ha = fam.scales[hi] - fam.scales[lo];
    if (std::abs((fam.scales[hi] - a) - (a - fam.scales[lo])) > 1e-9)
      throw std::invalid_argument("dgada_defect: scales must be uniform");
    const GridField2D& ga = fam.g.fields[k];
    for (Index j = 1; j + 1 < s.nodes(); ++j)
      for (Index i = 1; i + 1 < s.nodes(); ++i) {
        const Vec2 q = s.node(i, j);
        if (q.norm() >= a * R) continue;
        const double fd = (fam.g.fields[hi].value(i, j) - fam.g.fields[lo].value(i, j)) / ha;
        const Vec2 dg(node_diff(ga, i, j, 0), node_diff(ga, i, j, 1));
        const double rhs = 2 * a * g1(q / a) - dg.dot(q) / a;
        worst = std::max(worst, std::abs(fd - rhs));
      }
  }
  return worst;
}

}  // namespace symlab
