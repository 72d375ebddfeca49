#pragma once

#include "symlab/calabi.hpp"
#include "symlab/graphical.hpp"

#include <functional>
#include <vector>

namespace symlab {

// Hamiltonian on the chart T*Delta, evaluated at (t, (bq, bp)).
using ChartHamiltonian = std::function<double(double, const ChartPoint&)>;

// F(t, x) with x = bq + j bp / 2 the image-side point: the lift through the first factor.
ChartHamiltonian chart_lift(const ScalarTimeField& F);
ChartHamiltonian chart_lift(const NormalizedField& F);

struct ActionRecord {
  std::vector<double> times;
  std::vector<ChartPoint> trajectory;
  double theta_part = 0;    // sum of bp . dbq, trapezoid
  double hamiltonian_part = 0;  // Simpson integral of H along the samples
  double action = 0;        // theta_part - hamiltonian_part
};

// Times must be uniform with an even number of intervals and match the path samples.
ActionRecord classical_action(const ChartHamiltonian& H, std::vector<double> times,
                              std::vector<ChartPoint> path);

// Chord z(s) = (phi^s(x), x), s in [0, t], sampled at step dt (rounded to an even count).
std::vector<ChartPoint> lift_trajectory(const ScalarTimeField& H, const Vec2& x, double t, double dt,
                                        std::vector<double>* times = nullptr);

struct BasicGeneratingOptions {
  int n = 64;        // seeds on the grid over [-1, 1]^2
  double dt = 1e-3;
  double coverage_radius = kDefaultCoverage;
};

struct BasicGenerating {
  GridSpec seeds;
  ArrayXXd q1, q2, p1, p2;  // endpoint chart coordinates per seed
  ArrayXXd h;               // action of the arriving chord
  double exactness = 0;     // max |dh - bp . dbq| by seed differences
  double t = 0;
};

// Offset c(s) is subtracted from H along each chord (zero for the plain field).
BasicGenerating basic_generating(const ScalarTimeField& H, double t, const BasicGeneratingOptions& opts = {});
BasicGenerating basic_generating(const NormalizedField& F, double t, const BasicGeneratingOptions& opts = {});

struct PhaseOptions {
  int n = 256;        // intervals over [-radius, radius]^2 of the domain
  double dt = 1e-3;
  RecoverOptions recover;
  GeneratingOptions generating;
  int quad_n = 128;   // sphere normalization quadrature
};

struct PhaseFunction {
  GridField2D f;
  double identity_value = 0;  // constant chord action, int_0^t c(s) ds
  double path_residual = 0;
  double max_p = 0;           // max |bp| over the sampled graph
  double min_det = 0;         // graphicality margin of the time-t map
  OneFormField alpha;
};

// Generating function of Graph phi^t of the sphere-normalized field, chart grid fitted to the domain.
PhaseFunction phase_function_graphical(const ScalarTimeField& F, const DiscDomain& domain, double t,
                                       const PhaseOptions& opts = {});
// Same from a sampled time-t map; identity_value supplied by the caller.
PhaseFunction phase_function_from_map(const PlaneMap& phi, double identity_value, const PhaseOptions& opts = {});

// -int_0^t Fbar(s, q0) ds at a point q0 outside every support.
double identity_region_value(const NormalizedField& F, double t, double dt);

// f at each time sample; the time steps must be multiples of dt.
PhaseFamily timewise_family(const ScalarTimeField& F, const DiscDomain& domain, const std::vector<double>& times,
                            const PhaseOptions& opts = {});

// sigma = df, centered differences.
OneFormField lagrangian_selector(const GridField2D& f);

struct HJResidual {
  double residual = 0;
  double h = 0;    // grid spacing
  double h_a = 0;  // parameter step
};
// max over interior nodes and interior parameters of |df/da + G(a, (q, df))|.
HJResidual hj_residual(const PhaseFamily& family, const ChartHamiltonian& G);

struct SuspensionOptions {
  int n = 128;                                  // seeds over [-1, 1]^2
  double dt = 1e-3;
  std::vector<double> times{0.25, 0.5, 0.75};  // sample times, multiples of 2 dt
  double dtau = 0.02;                           // time difference step, a multiple of 2 dt
};

struct SuspensionDefect {
  double total = 0;
  double spatial = 0;   // |dh/dq - bp . dbq/dq|
  double temporal = 0;  // |dh/dt - bp . dbq/dt - a| with a = -H(t, phi^t(o_q))
};
SuspensionDefect suspension_check(const ScalarTimeField& H, const SuspensionOptions& opts = {});

struct PhaseIntegral {
  std::vector<double> I;
  std::vector<double> dI;  // centered differences, second order one-sided at the ends
};
// Disc integral of each member plus its identity value (read at the grid corner) times the
// rest of the sphere.
PhaseIntegral phase_integral(const PhaseFamily& family, const DiscDomain& domain);

// int G(a, (q, df_a(q))) over the sphere model, the outside value read at the grid corner.
std::vector<double> hamiltonian_integral(const PhaseFamily& family, const ChartHamiltonian& G,
                                         const DiscDomain& domain);

}  // namespace symlab
