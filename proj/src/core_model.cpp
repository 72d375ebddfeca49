#include "symlab/core_model.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

namespace symlab {

void DiscDomain::validate() const {
  if (!(radius > 0)) throw std::invalid_argument("DiscDomain: radius must be positive");
  if (!(support_radius > 0 && support_radius < radius))
    throw std::invalid_argument("DiscDomain: need 0 < support_radius < radius");
  if (!(sphere_volume > area()))
    throw std::invalid_argument("DiscDomain: sphere_volume must exceed the disc area");
}

ScalarTimeField::ScalarTimeField() : support_(1.0), zero_(true) {}

ScalarTimeField::ScalarTimeField(Evaluator f, double support_radius, int smoothness_order,
                                 Derivatives d)
    : f_(std::move(f)), d_(std::move(d)), support_(support_radius), smoothness_(smoothness_order) {
  if (!f_) throw std::invalid_argument("ScalarTimeField: empty evaluator");
  if (!(support_radius > 0)) throw std::invalid_argument("ScalarTimeField: support radius must be positive");
  if (smoothness_order < 1) throw std::invalid_argument("ScalarTimeField: smoothness order must be >= 1");
}

ScalarTimeField ScalarTimeField::zero(double support_radius) {
  ScalarTimeField z;
  z.support_ = support_radius;
  return z;
}

ScalarTimeField ScalarTimeField::with_fd_step(double h) const {
  if (!(h > 0)) throw std::invalid_argument("fd step must be positive");
  ScalarTimeField c = *this;
  c.fd_step_ = h;
  return c;
}

Vec2 ScalarTimeField::gradient_fd(double t, const Vec2& x, double h) const {
  if (zero_) return Vec2::Zero();
  const Vec2 ex(h, 0.0), ey(0.0, h);
  return Vec2(((*this)(t, x + ex) - (*this)(t, x - ex)) / (2 * h),
              ((*this)(t, x + ey) - (*this)(t, x - ey)) / (2 * h));
}

Vec2 ScalarTimeField::gradient(double t, const Vec2& x) const {
  if (zero_ || x.norm() >= support_ + 2 * fd_step_) return Vec2::Zero();
  if (d_.gradient) return x.norm() >= support_ ? Vec2::Zero() : d_.gradient(t, x);
  return gradient_fd(t, x, fd_step_);
}

Mat2 ScalarTimeField::hessian(double t, const Vec2& x) const {
  if (zero_) return Mat2::Zero();
  if (d_.hessian) return x.norm() >= support_ ? Mat2::Zero() : d_.hessian(t, x);
  Mat2 m;
  if (d_.gradient) {
    const double h = 1e-5;
    if (x.norm() >= support_ + 2 * h) return Mat2::Zero();
    const Vec2 ex(h, 0.0), ey(0.0, h);
    m.col(0) = (gradient(t, x + ex) - gradient(t, x - ex)) / (2 * h);
    m.col(1) = (gradient(t, x + ey) - gradient(t, x - ey)) / (2 * h);
  } else {
    const double h = 1e-4;
    if (x.norm() >= support_ + 2 * h) return Mat2::Zero();
    const Vec2 ex(h, 0.0), ey(0.0, h);
    const double f0 = (*this)(t, x);
    m(0, 0) = ((*this)(t, x + ex) - 2 * f0 + (*this)(t, x - ex)) / (h * h);
    m(1, 1) = ((*this)(t, x + ey) - 2 * f0 + (*this)(t, x - ey)) / (h * h);
    m(0, 1) = ((*this)(t, x + ex + ey) - (*this)(t, x + ex - ey) - (*this)(t, x - ex + ey) +
               (*this)(t, x - ex - ey)) /
              (4 * h * h);
    m(1, 0) = m(0, 1);
  }
  return (m + m.transpose()) / 2;
}

GridField2D::GridField2D(Vec2 origin, double spacing, ArrayXXd values, int interpolation_order)
    : origin_(std::move(origin)), h_(spacing), values_(std::move(values)), order_(interpolation_order) {
  if (!(h_ > 0)) throw std::invalid_argument("GridField2D: spacing must be positive");
  if (values_.rows() != values_.cols()) throw std::invalid_argument("GridField2D: values must be square");
  if (values_.rows() < 16) throw std::invalid_argument("GridField2D: need at least 16 nodes per axis");
  if (order_ != 1 && order_ != 3) throw std::invalid_argument("GridField2D: interpolation order must be 1 or 3");
}

GridField2D::GridField2D(const GridSpec& g, ArrayXXd values, int interpolation_order)
    : GridField2D(g.origin(), g.spacing(), std::move(values), interpolation_order) {
  if (values_.rows() != g.nodes()) throw std::invalid_argument("GridField2D: values do not match grid");
}

GridSpec GridField2D::spec() const {
  const int n = int(size() - 1);
  const double w = 0.5 * n * h_;
  return {n, w, origin_ + Vec2::Constant(w)};
}

bool GridField2D::same_geometry(const GridField2D& o) const {
  return size() == o.size() && std::abs(h_ - o.h_) <= 1e-14 * h_ &&
         (origin_ - o.origin_).norm() <= 1e-13;
}

bool GridField2D::covers(const Vec2& x, double slack) const {
  const double top = double(size() - 1) * h_;
  const Vec2 u = x - origin_;
  return u.x() >= -slack && u.y() >= -slack && u.x() <= top + slack && u.y() <= top + slack;
}

void GridField2D::locate(const Vec2& x, Index& i, Index& j, double& s, double& r) const {
  if (!covers(x)) {
    std::ostringstream os;
    os << "GridField2D: point (" << x.x() << ", " << x.y() << ") outside grid coverage";
    throw std::out_of_range(os.str());
  }
  const Index last = size() - 2;
  auto cell = [&](double u, Index& k, double& f) {
    const double ru = std::round(u);
    if (std::abs(u - ru) < 1e-10) u = ru;
    k = std::clamp<Index>(Index(std::floor(u)), 0, last);
    f = u - double(k);
  };
  cell((x.x() - origin_.x()) / h_, i, s);
  cell((x.y() - origin_.y()) / h_, j, r);
}

// Linear extrapolation for one ghost layer.
double GridField2D::ext(Index i, Index j) const {
  const Index n = size();
  if (i < 0) return 2 * ext(0, j) - ext(1, j);
  if (i >= n) return 2 * ext(n - 1, j) - ext(n - 2, j);
  if (j < 0) return 2 * values_(i, 0) - values_(i, 1);
  if (j >= n) return 2 * values_(i, n - 1) - values_(i, n - 2);
  return values_(i, j);
}

namespace {

inline void cr_weights(double s, double w[4]) {
  const double s2 = s * s, s3 = s2 * s;
  w[0] = 0.5 * (-s3 + 2 * s2 - s);
  w[1] = 0.5 * (3 * s3 - 5 * s2 + 2);
  w[2] = 0.5 * (-3 * s3 + 4 * s2 + s);
  w[3] = 0.5 * (s3 - s2);
}

inline void cr_dweights(double s, double w[4]) {
  const double s2 = s * s;
  w[0] = 0.5 * (-3 * s2 + 4 * s - 1);
  w[1] = 0.5 * (9 * s2 - 10 * s);
  w[2] = 0.5 * (-9 * s2 + 8 * s + 1);
  w[3] = 0.5 * (3 * s2 - 2 * s);
}

}  // namespace

double GridField2D::operator()(const Vec2& x) const {
  Index i, j;
  double s, r;
  locate(x, i, j, s, r);
  if (order_ == 1) {
    return (1 - s) * (1 - r) * values_(i, j) + s * (1 - r) * values_(i + 1, j) +
           (1 - s) * r * values_(i, j + 1) + s * r * values_(i + 1, j + 1);
  }
  double wx[4], wy[4];
  cr_weights(s, wx);
  cr_weights(r, wy);
  const bool interior = i >= 1 && j >= 1 && i + 2 < size() && j + 2 < size();
  double acc = 0;
  for (int b = 0; b < 4; ++b) {
    double row = 0;
    for (int a = 0; a < 4; ++a) {
      const Index ii = i - 1 + a, jj = j - 1 + b;
      row += wx[a] * (interior ? values_(ii, jj) : ext(ii, jj));
    }
    acc += wy[b] * row;
  }
  return acc;
}

Vec2 GridField2D::gradient(const Vec2& x) const {
  Index i, j;
  double s, r;
  locate(x, i, j, s, r);
  if (order_ == 1) {
    const double gx = (1 - r) * (values_(i + 1, j) - values_(i, j)) + r * (values_(i + 1, j + 1) - values_(i, j + 1));
    const double gy = (1 - s) * (values_(i, j + 1) - values_(i, j)) + s * (values_(i + 1, j + 1) - values_(i + 1, j));
    return Vec2(gx, gy) / h_;
  }
  double wx[4], wy[4], dx[4], dy[4];
  cr_weights(s, wx);
  cr_weights(r, wy);
  cr_dweights(s, dx);
  cr_dweights(r, dy);
  const bool interior = i >= 1 && j >= 1 && i + 2 < size() && j + 2 < size();
  double gx = 0, gy = 0;
  for (int b = 0; b < 4; ++b)
    for (int a = 0; a < 4; ++a) {
      const Index ii = i - 1 + a, jj = j - 1 + b;
      const double v = interior ? values_(ii, jj) : ext(ii, jj);
      gx += dx[a] * wy[b] * v;
      gy += wx[a] * dy[b] * v;
    }
  return Vec2(gx, gy) / h_;
}

namespace {

ArrayXXd build_disc_weights(Index n, const Vec2& origin, double h, double R, const Vec2& c) {
  ArrayXXd w = ArrayXXd::Zero(n, n);
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> cut = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
  constexpr int sub = 16;
  double full = 0, partial = 0;
  const double half = 0.5 * h;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const Vec2 x = origin + h * Vec2(double(i), double(j)) - c;
      const double far = std::hypot(std::abs(x.x()) + half, std::abs(x.y()) + half);
      const double nx = std::max(0.0, std::abs(x.x()) - half), ny = std::max(0.0, std::abs(x.y()) - half);
      const double near = std::hypot(nx, ny);
      if (far <= R) {
        w(i, j) = h * h;
        full += w(i, j);
      } else if (near < R) {
        int inside = 0;
        for (int b = 0; b < sub; ++b)
          for (int a = 0; a < sub; ++a) {
            const double px = x.x() + h * ((a + 0.5) / sub - 0.5);
            const double py = x.y() + h * ((b + 0.5) / sub - 0.5);
            if (px * px + py * py <= R * R) ++inside;
          }
        w(i, j) = h * h * double(inside) / (sub * sub);
        cut(i, j) = true;
        partial += w(i, j);
      }
    }
  }
  const double target = kPi * R * R;
  if (partial > 0) {
    const double scale = (target - full) / partial;
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        if (cut(i, j)) w(i, j) *= scale;
  }
  return w;
}

}  // namespace

std::shared_ptr<const ArrayXXd> disc_weights(const GridField2D& f, double radius, const Vec2& center) {
  const double slack = 1e-9 * std::max(1.0, radius);
  const Vec2 lo = center - Vec2::Constant(radius), hi = center + Vec2::Constant(radius);
  if (!f.covers(lo, slack) || !f.covers(hi, slack))
    throw std::invalid_argument("integrate_disc: grid does not cover the disc");
  using Key = std::tuple<Index, double, double, double, double, double, double>;
  static std::map<Key, std::shared_ptr<const ArrayXXd>> cache;
  static std::mutex mu;
  const Key key{f.size(), f.origin().x(), f.origin().y(), f.spacing(), radius, center.x(), center.y()};
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) {
    if (cache.size() > 64) cache.clear();
    it = cache.emplace(key, std::make_shared<const ArrayXXd>(
                               build_disc_weights(f.size(), f.origin(), f.spacing(), radius, center)))
             .first;
  }
  return it->second;
}

double integrate_disc(const GridField2D& f, double radius, const Vec2& center) {
  if (!(radius > 0)) throw std::invalid_argument("integrate_disc: radius must be positive");
  const auto w = disc_weights(f, radius, center);
  return (*w * f.values()).sum();
}

std::vector<double> uniform_samples(double a, double b, int intervals) {
  if (intervals < 1) throw std::invalid_argument("uniform_samples: need at least one interval");
  std::vector<double> t(intervals + 1);
  for (int k = 0; k <= intervals; ++k) t[k] = a + (b - a) * double(k) / intervals;
  t.back() = b;
  return t;
}

namespace {

struct TimeSlices {
  std::vector<double> times;
  std::vector<GridField2D> slices;

  // Catmull-Rom weights over four neighbouring slices. Ghosts extrapolate quadratically so the
  // end intervals keep third order.
  template <typename Eval>
  auto blend(double t, Eval&& eval) const {
    const Index m = Index(slices.size());
    const double u = std::clamp((t - times.front()) / (times.back() - times.front()), 0.0, 1.0) * double(m - 1);
    const Index k = std::clamp<Index>(Index(std::floor(u)), 0, m - 2);
    const double s = u - double(k);
    double w[4];
    cr_weights(s, w);
    auto at = [&](Index i) {
      if (m < 3) {
        if (i < 0) return (2 * eval(slices[0]) - eval(slices[1])).eval();
        if (i >= m) return (2 * eval(slices[m - 1]) - eval(slices[m - 2])).eval();
      }
      if (i < 0) return (3 * eval(slices[0]) - 3 * eval(slices[1]) + eval(slices[2])).eval();
      if (i >= m) return (3 * eval(slices[m - 1]) - 3 * eval(slices[m - 2]) + eval(slices[m - 3])).eval();
      return eval(slices[i]);
    };
    return (w[0] * at(k - 1) + w[1] * at(k) + w[2] * at(k + 1) + w[3] * at(k + 2)).eval();
  }
};

}  // namespace

ScalarTimeField grid_time_field(std::vector<double> times, std::vector<GridField2D> slices,
                                double support_radius) {
  if (times.size() != slices.size() || times.size() < 2)
    throw std::invalid_argument("grid_time_field: need matching times and slices (at least 2)");
  for (size_t k = 1; k < slices.size(); ++k)
    if (!slices[k].same_geometry(slices[0])) throw std::invalid_argument("grid_time_field: slice grids differ");
  const double step = (times.back() - times.front()) / double(times.size() - 1);
  for (size_t k = 0; k < times.size(); ++k)
    if (std::abs(times[k] - (times.front() + double(k) * step)) > 1e-9 * std::abs(step))
      throw std::invalid_argument("grid_time_field: times must be uniform");
  auto data = std::make_shared<const TimeSlices>(TimeSlices{std::move(times), std::move(slices)});
  auto inside = [data](const Vec2& x) { return data->slices[0].covers(x, 0.0); };
  ScalarTimeField::Derivatives d;
  d.gradient = [data, inside](double t, const Vec2& x) {
    if (!inside(x)) return Vec2::Zero().eval();
    return data->blend(t, [&](const GridField2D& g) { return g.gradient(x); });
  };
  return ScalarTimeField(
      [data, inside](double t, const Vec2& x) {
        if (!inside(x)) return 0.0;
        return data->blend(t, [&](const GridField2D& g) { return Eigen::Matrix<double, 1, 1>(g(x)); })(0);
      },
      support_radius, 2, d);
}

}  // namespace symlab
