#pragma once

#include "symlab/ham_flow.hpp"

#include <memory>
#include <optional>

namespace symlab {

struct CalPathOptions {
  int n = 256;   // spatial intervals across the support disc
  int nt = 64;   // time intervals (even)
};

// Double integral of H over [0,1] x D on a grid fitted to the support disc.
double cal_path(const ScalarTimeField& H, const CalPathOptions& opts = {});

struct Estimate {
  double value = 0;
  double error = 0;  // Richardson estimate from two resolutions
};
Estimate cal_path_estimate(const ScalarTimeField& H, const CalPathOptions& opts = {});

// One-form alpha with d(alpha) = dq ^ dp, returned as (alpha_q, alpha_p).
struct Primitive {
  std::function<Vec2(const Vec2&)> alpha;
  static Primitive standard();  // alpha = -p dq
};

struct Def1Options {
  Primitive primitive = Primitive::standard();
  int stride = 2;                     // coarse lattice stride on the map grid
  // Max plaquette circulation relative to plaquette area. Maps that are only C^1 across the
  // support boundary already reach about 0.4 there, so this only rejects gross area changes.
  double residual_tolerance = 0.5;
};

struct Def1Result {
  GridField2D h;            // h_{phi,alpha} on the coarse lattice
  double cal = 0;           // (1/2) integral of h
  double primitive_residual = 0;
  double path_residual = 0;  // max difference between row-wise and column-wise integration
};
Def1Result cal_def1(const PlaneMap& phi, const Def1Options& opts = {});

struct CalabiReport {
  double cal_def1 = 0;
  double cal_path = std::numeric_limits<double>::quiet_NaN();
  double primitive_residual = 0;
  double agreement_error = std::numeric_limits<double>::quiet_NaN();
  double path_residual = 0;
  double cal_def1_error = 0;
  double cal_path_error = 0;
  int grid = 0;
  double dt = 0;
};

CalabiReport primitive_and_cal_def1(const PlaneMap& phi, std::optional<Estimate> cal_path_value = {},
                                    const Def1Options& opts = {});
CalabiReport calabi_report(const ScalarTimeField& H, const GridSpec& grid, const FlowOptions& flow,
                           const CalPathOptions& quad = {});

// H - c(t) with c(t) = (1/vol) * integral over the sphere model. The disc part is
// evaluated on the closed unit disc, the rest of the sphere carries a constant value.
class NormalizedField {
 public:
  NormalizedField(ScalarTimeField disc_part, std::function<double(double)> outside_value,
                  DiscDomain domain, int quad_n = 128);

  double offset(double t) const;            // c(t)
  double disc_integral(double t) const;     // integral of the disc part over the disc
  double outside_value(double t) const { return outside_(t) - offset(t); }
  double operator()(double t, const Vec2& x) const;
  const ScalarTimeField& field() const { return field_; }
  const ScalarTimeField& disc_part() const { return disc_; }
  const DiscDomain& domain() const { return domain_; }
  double base_outside_value(double t) const { return outside_(t); }
  int quad_n() const { return quad_n_; }

 private:
  struct Memo;
  ScalarTimeField disc_;
  std::function<double(double)> outside_;
  DiscDomain domain_;
  int quad_n_;
  std::shared_ptr<Memo> memo_;
  ScalarTimeField field_;
};

NormalizedField normalize_on_sphere(const ScalarTimeField& H, const DiscDomain& domain,
                                    int quad_n = 128);
NormalizedField normalize_on_sphere(const NormalizedField& F);

// Mean of the normalized field over the sphere model, independent quadrature of field().
double sphere_mean(const NormalizedField& F, double t);

// Hamiltonian of t -> phi_H^t o (phi_G^t)^{-1}:
// H(t,x) - G(t, phi_G^t (phi_H^t)^{-1} x). Flows are integrated on demand with step dt.
ScalarTimeField compose_dev(const ScalarTimeField& H, const ScalarTimeField& G, double dt = 1e-2);

double flow_normalization_check(const NormalizedField& F, const HamiltonianPath& path);
double flow_normalization_check(const ScalarTimeField& H, const HamiltonianPath& path,
                                const DiscDomain& domain);

// Path concatenation: first H1 then H2, each run at double speed with a smooth
// reparametrization so the result is smooth in t.
ScalarTimeField concatenate(const ScalarTimeField& H1, const ScalarTimeField& H2);

}  // namespace symlab
