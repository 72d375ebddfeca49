#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace symlab {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Eigen::ArrayXXd;
using Eigen::Index;

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// j(p1, p2) = (-p2, p1)
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> jmap(const Eigen::Matrix<Scalar, 2, 1>& p) {
  return Eigen::Matrix<Scalar, 2, 1>(-p.y(), p.x());
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> jmatrix() {
  Eigen::Matrix<Scalar, 2, 2> m;
  m << Scalar(0), Scalar(-1), Scalar(1), Scalar(0);
  return m;
}

struct DiscDomain {
  double radius = 1.0;
  double support_radius = 0.9;
  double sphere_volume = 2.0 * kPi;

  double area() const { return kPi * radius * radius; }
  void validate() const;
};

// Time dependent Hamiltonian on the plane with a declared support radius.
// An infinite support radius marks fields that are not compactly supported.
class ScalarTimeField {
 public:
  using Evaluator = std::function<double(double, const Vec2&)>;
  using Gradient = std::function<Vec2(double, const Vec2&)>;
  using Hessian = std::function<Mat2(double, const Vec2&)>;

  struct Derivatives {
    Gradient gradient;
    Hessian hessian;
  };

  ScalarTimeField();
  ScalarTimeField(Evaluator f, double support_radius, int smoothness_order = 3,
                  Derivatives d = {});

  static ScalarTimeField zero(double support_radius = 1.0);

  double operator()(double t, const Vec2& x) const {
    if (zero_ || x.norm() >= support_) return 0.0;
    return f_(t, x);
  }
  Vec2 gradient(double t, const Vec2& x) const;
  Mat2 hessian(double t, const Vec2& x) const;
  Vec2 gradient_fd(double t, const Vec2& x, double h) const;

  double support_radius() const { return support_; }
  int smoothness_order() const { return smoothness_; }
  bool compact() const { return std::isfinite(support_); }
  bool is_zero() const { return zero_; }
  bool has_gradient() const { return static_cast<bool>(d_.gradient); }
  bool has_hessian() const { return static_cast<bool>(d_.hessian); }
  double fd_step() const { return fd_step_; }
  ScalarTimeField with_fd_step(double h) const;

 private:
  Evaluator f_;
  Derivatives d_;
  double support_ = 0.0;
  int smoothness_ = 3;
  double fd_step_ = 5e-6;
  bool zero_ = false;
};

// Square grid of (n+1) x (n+1) nodes over [c - w, c + w]^2.
struct GridSpec {
  int n = 256;
  double half_width = 1.0;
  Vec2 center = Vec2::Zero();

  Index nodes() const { return n + 1; }
  double spacing() const { return 2.0 * half_width / n; }
  Vec2 origin() const { return center - Vec2::Constant(half_width); }
  Vec2 node(Index i, Index j) const {
    return origin() + spacing() * Vec2(double(i), double(j));
  }
  static GridSpec fitted(double radius, int n) { return {n, radius, Vec2::Zero()}; }
};

// values(i, j) sits at origin + spacing * (i, j).
class GridField2D {
 public:
  GridField2D() = default;
  GridField2D(Vec2 origin, double spacing, ArrayXXd values, int interpolation_order = 3);
  GridField2D(const GridSpec& g, ArrayXXd values, int interpolation_order = 3);

  template <typename F>
  static GridField2D sample(const GridSpec& g, F&& f, int interpolation_order = 3) {
    ArrayXXd v(g.nodes(), g.nodes());
    for (Index j = 0; j < g.nodes(); ++j)
      for (Index i = 0; i < g.nodes(); ++i) v(i, j) = f(g.node(i, j));
    return GridField2D(g, std::move(v), interpolation_order);
  }

  Index size() const { return values_.rows(); }
  double spacing() const { return h_; }
  const Vec2& origin() const { return origin_; }
  int interpolation_order() const { return order_; }
  const ArrayXXd& values() const { return values_; }
  double value(Index i, Index j) const { return values_(i, j); }
  Vec2 node(Index i, Index j) const { return origin_ + h_ * Vec2(double(i), double(j)); }
  GridSpec spec() const;
  bool same_geometry(const GridField2D& o) const;

  bool covers(const Vec2& x, double slack = 1e-9) const;
  double operator()(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;

 private:
  void locate(const Vec2& x, Index& i, Index& j, double& s, double& r) const;
  double ext(Index i, Index j) const;

  Vec2 origin_ = Vec2::Zero();
  double h_ = 1.0;
  ArrayXXd values_;
  int order_ = 3;
};

template <typename Scalar>
struct ChartPointT {
  Eigen::Matrix<Scalar, 2, 1> bq;
  Eigen::Matrix<Scalar, 2, 1> bp;
};
using ChartPoint = ChartPointT<double>;

// x = (Q, P) on the image side, y = (q, p).
template <typename Scalar>
ChartPointT<Scalar> to_chart(const Eigen::Matrix<Scalar, 2, 1>& x,
                             const Eigen::Matrix<Scalar, 2, 1>& y) {
  return {(x + y) / Scalar(2), Eigen::Matrix<Scalar, 2, 1>(x.y() - y.y(), y.x() - x.x())};
}

template <typename Scalar>
std::pair<Eigen::Matrix<Scalar, 2, 1>, Eigen::Matrix<Scalar, 2, 1>> from_chart(
    const ChartPointT<Scalar>& c) {
  const Eigen::Matrix<Scalar, 2, 1> half = jmap(c.bp) / Scalar(2);
  return {c.bq + half, c.bq - half};
}

// Quadrature over the disc |x - center| <= radius. Node weights are h^2 times the
// fraction of the node's cell inside the disc, rescaled so constants integrate exactly.
double integrate_disc(const GridField2D& f, double radius = 1.0,
                      const Vec2& center = Vec2::Zero());
std::shared_ptr<const ArrayXXd> disc_weights(const GridField2D& f, double radius,
                                             const Vec2& center = Vec2::Zero());

// Composite Simpson over uniform samples (even number of intervals).
template <typename Derived>
double simpson(const Eigen::DenseBase<Derived>& y, double h) {
  const Index m = y.size() - 1;
  if (m < 2 || m % 2 != 0) throw std::invalid_argument("simpson: need an even number of intervals");
  double s = y(0) + y(m);
  for (Index k = 1; k < m; ++k) s += (k % 2 ? 4.0 : 2.0) * y(k);
  return s * h / 3.0;
}

template <typename F>
double simpson(F&& f, double a, double b, int intervals) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int k = 1; k < intervals; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

std::vector<double> uniform_samples(double a, double b, int intervals);

// Field interpolated from grid slices at uniform times: cubic in time, bicubic in space.
ScalarTimeField grid_time_field(std::vector<double> times, std::vector<GridField2D> slices,
                                double support_radius);

}  // namespace symlab
