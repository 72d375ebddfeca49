#pragma once

#include "symlab/calabi.hpp"

#include <utility>
#include <vector>

namespace symlab {

struct RescaledPath {
  ScalarTimeField base;
  double scale = 1.0;
  double eta = 0.0;
  ScalarTimeField hamiltonian;  // a^2 H(t, x / a), support a * R
};

RescaledPath rescale(const ScalarTimeField& H, double a, double eta = 0.0);

// Time change s = chi(t). dchi may be left empty, then it is taken by central differences.
struct TimeReparam {
  std::function<double(double)> chi;
  std::function<double(double)> dchi;
};

TimeReparam linear_ramp(double a);          // chi(t) = a t
TimeReparam sine_squared();                 // chi(t) = sin^2(pi t), chi(0) = chi(1) = 0
TimeReparam smooth_ramp(double eps);        // chi(s) = eps + (1 - eps) smoothstep(s)

// chi'(t) H(chi(t), x). chi must be monotone on [0, 1].
ScalarTimeField reparametrize(const ScalarTimeField& H, const TimeReparam& chi);
// Same formula without the monotonicity requirement; chi(0) = chi(1) makes the result a loop.
ScalarTimeField make_loop(const ScalarTimeField& H, const TimeReparam& chi);

// H(s, t, x): a family of time dependent Hamiltonians indexed by s in [0, 1].
struct TwoParameterField {
  std::function<double(double, double, const Vec2&)> value;
  std::function<Vec2(double, double, const Vec2&)> gradient;  // optional, spatial
  double support_radius = 1.0;
  int smoothness_order = 3;

  ScalarTimeField slice(double s) const;
};

// Lambda(s, t) = lambda_s(t): Hamiltonian s^2 H(t, x / s), zero at s = 0.
TwoParameterField alexander_family(const ScalarTimeField& H);

// Parameters (sigma, tau) with Upsilon(s, t) = Lambda(sigma, tau): the homotopy between
// s -> Lambda(s, 1) and t -> Lambda(1, t) relative to the ends.
std::pair<double, double> upsilon(double s, double t);

struct SHamiltonianOptions {
  int n = 64;          // spatial intervals across the support disc
  int nu = 64;         // time intervals for the u quadrature (even)
  double h_s = 1e-3;   // half width of the s difference
  double dt = 0.0;     // flow step; 0 selects 1 / (4 nu)
};

// K(s, t, x) on a support fitted grid, K(s, 0, .) = 0.
struct SHamiltonian {
  std::vector<double> s;
  std::vector<double> t;                       // even u nodes
  std::vector<std::vector<GridField2D>> K;     // K[is][it]
  double support_radius = 0;
  GridSpec grid;
  double h_s = 0, dt = 0;

  // s -> K(s, t[it], .) as a time dependent field in the variable s (needs s uniform on [0, 1]).
  ScalarTimeField s_path(size_t it) const;
  // Simpson in s of the disc integral of K(., t[it], .).
  double calabi(size_t it) const;
};

SHamiltonian s_hamiltonian(const TwoParameterField& H, std::vector<double> s_samples,
                           const SHamiltonianOptions& opts = {});

// Splits K of the Alexander family of an autonomous H at (s, t) into the explicit summand
// 2 s int_0^t H(u, x / s) du and the remainder, and reports disc integrals.
struct AlexanderDecomposition {
  double k_integral = 0;          // integral of the measured K(s, t, .)
  double first_integral = 0;      // integral of 2 s int_0^t H(u, x / s) du
  double remainder_integral = 0;  // k_integral - first_integral
  double remainder_expected = 0;  // 2 s^3 int_0^t int H
  double remainder_literal = 0;   // 2 s^4 int_0^t int H, the summand as printed with its extra s
  double max_first_pointwise = 0;
};
AlexanderDecomposition alexander_decomposition(const ScalarTimeField& H, double s, double t,
                                               const SHamiltonianOptions& opts = {});

// t -> Dev(lambda_{chi(s)}(t) o lambda_eps(t)^{-1}) at a fixed s.
ScalarTimeField modified_alexander(const ScalarTimeField& H, double s, double eps, double dt = 1e-2);

struct SequenceMember {
  double a = 0;
  ScalarTimeField hamiltonian;  // a^{-2} H(t, x / a)
  double cal = 0;
  double c0_dist = 0;
  double hofer_len = 0;
  double dt = 0;                // flow step used for the C0 measurement
};

struct SequenceOptions {
  int grid_n = 512;            // unit disc grid for the C0 measurement
  double dt = 1e-3;
  double theta_step = 0.05;    // max rotation per step, bounds dt by theta / |Hess K|
  CalPathOptions cal{256, 64};
  OscOptions osc{256, 64};
};

std::vector<SequenceMember> shrinking_calabi_sequence(const ScalarTimeField& H,
                                                      const std::vector<double>& scales,
                                                      const SequenceOptions& opts = {});

// max over t samples of d(lambda_s(t), id) for each s: checks Lambda(0+, t) -> id.
std::vector<double> alexander_endpoint_monitor(const ScalarTimeField& H, const std::vector<double>& s,
                                               int grid_n = 64, double dt = 1e-3, int nt = 4);

}  // namespace symlab
