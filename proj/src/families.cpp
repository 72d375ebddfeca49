#include "symlab/families.hpp"

namespace symlab {

namespace {

double ipow(double b, int e) {
  double r = 1;
  for (; e > 0; --e) r *= b;
  return r;
}

struct Bump {
  double A, R;
  int k;

  double value(const Vec2& d) const {
    const double s = d.squaredNorm() / (R * R);
    return s >= 1 ? 0.0 : A * ipow(1 - s, k);
  }
  Vec2 gradient(const Vec2& d) const {
    const double s = d.squaredNorm() / (R * R);
    if (s >= 1) return Vec2::Zero();
    return -A * k * ipow(1 - s, k - 1) * 2.0 / (R * R) * d;
  }
  Mat2 hessian(const Vec2& d) const {
    const double s = d.squaredNorm() / (R * R);
    if (s >= 1) return Mat2::Zero();
    const double R2 = R * R;
    Mat2 m = -A * k * ipow(1 - s, k - 1) * 2.0 / R2 * Mat2::Identity();
    if (k >= 2) m += A * k * (k - 1) * ipow(1 - s, k - 2) * 4.0 / (R2 * R2) * (d * d.transpose());
    return m;
  }
};

Vec2 circle_center(double rho, double t) {
  return rho * Vec2(std::cos(2 * kPi * t), std::sin(2 * kPi * t));
}

}  // namespace

ScalarTimeField radial_bump(double amplitude, double radius, int k) {
  return offset_bump(amplitude, radius, Vec2::Zero(), k);
}

ScalarTimeField offset_bump(double amplitude, double radius, const Vec2& center, int k) {
  if (!(radius > 0) || k < 2) throw std::invalid_argument("bump: need radius > 0 and k >= 2");
  const Bump b{amplitude, radius, k};
  const Vec2 c = center;
  ScalarTimeField::Derivatives d;
  d.gradient = [b, c](double, const Vec2& x) { return b.gradient(x - c); };
  d.hessian = [b, c](double, const Vec2& x) { return b.hessian(x - c); };
  return ScalarTimeField([b, c](double, const Vec2& x) { return b.value(x - c); },
                         c.norm() + radius, k - 1, d);
}

ScalarTimeField moving_bump(double amplitude, double radius, double rho, int k) {
  if (!(radius > 0) || k < 2) throw std::invalid_argument("bump: need radius > 0 and k >= 2");
  const Bump b{amplitude, radius, k};
  ScalarTimeField::Derivatives d;
  d.gradient = [b, rho](double t, const Vec2& x) { return b.gradient(x - circle_center(rho, t)); };
  d.hessian = [b, rho](double t, const Vec2& x) { return b.hessian(x - circle_center(rho, t)); };
  return ScalarTimeField([b, rho](double t, const Vec2& x) { return b.value(x - circle_center(rho, t)); },
                         rho + radius, k - 1, d);
}

ScalarTimeField twist(double amplitude, double radius) { return radial_bump(amplitude, radius, 3); }

ScalarTimeField rotation_hamiltonian() {
  ScalarTimeField::Derivatives d;
  d.gradient = [](double, const Vec2& x) { return x; };
  d.hessian = [](double, const Vec2&) { return Mat2::Identity().eval(); };
  return ScalarTimeField([](double, const Vec2& x) { return 0.5 * x.squaredNorm(); }, kInf, 8, d);
}

ScalarTimeField reparam_loop(const ScalarTimeField& h) {
  return make_loop(h, sine_squared());
}

TwoParameterField homotopy_family(double amplitude, double radius, double rho) {
  const Bump b{amplitude, radius, 4};
  TwoParameterField F;
  F.value = [b, rho](double s, double t, const Vec2& x) { return s * b.value(x - s * circle_center(rho, t)); };
  F.gradient = [b, rho](double s, double t, const Vec2& x) {
    return (s * b.gradient(x - s * circle_center(rho, t))).eval();
  };
  F.support_radius = rho + radius;
  F.smoothness_order = 2;
  return F;
}

}  // namespace symlab
