#pragma once

#include "symlab/ham_flow.hpp"

#include <cstdint>
#include <vector>

namespace symlab {

// Closed one-form on the chart, components along bq1 and bq2.
struct OneFormField {
  GridField2D a1, a2;
  double support_radius = 0;

  Vec2 operator()(const Vec2& q) const;
  // D(i, k) = d a_i / d q_k, from the bicubic interpolants.
  Mat2 derivative(const Vec2& q) const;
  // D at a node by centered differences.
  Mat2 node_derivative(Index i, Index j) const;
  GridSpec grid() const { return a1.spec(); }
};

// df by fourth order centered differences (lower order at the grid edge).
OneFormField differential(const GridField2D& f, double support_radius = kInf);

struct Closedness {
  double max_circulation = 0;  // trapezoid circulation around one cell
  double max_curl = 0;         // the same divided by the cell area
};
Closedness closedness(const OneFormField& alpha);

// max |<D_v alpha, w> - <D_w alpha, v>| over random unit v, w at random interior nodes.
double symmetry_defect(const OneFormField& alpha, int samples = 1000, std::uint64_t seed = 1);

// [[a, c], [c, b]]
struct SymmetricMatrix2 {
  double a = 0, b = 0, c = 0;
  Mat2 matrix() const {
    Mat2 m;
    m << a, c, c, b;
    return m;
  }
};

// det(I - r jA) by direct 2x2 expansion; throws std::logic_error if it disagrees with
// the closed form 1 + r^2 (ab - c^2) beyond roundoff.
double starshape_det(const SymmetricMatrix2& A, double r);
double starshape_closed_form(const SymmetricMatrix2& A, double r);

// y -> a phi(y / a) inside the scaled support, identity outside.
PlaneMap rescaled_map(const PlaneMap& phi, double a);

// kappa_a(y) = (y + phi_a(y)) / 2 with phi_a = rescaled_map(phi, a); carries its Jacobian.
PlaneMap midpoint_map(const PlaneMap& phi, double a = 1.0);

struct GraphicalCheck {
  bool graphical = false;
  double min_det = 0;     // min det d kappa_1 over nodes in the support disc
  bool injective = true;  // collision probe
  Vec2 worst_node = Vec2::Zero();
  explicit operator bool() const { return graphical; }
};
GraphicalCheck is_graphical(const PlaneMap& phi, double delta = 1e-3);

struct RecoverOptions {
  double delta = 1e-3;
};
// alpha(q) = -j(phi(y) - y) where kappa_1(y) = q, i.e. alpha(q) = 2 j(y - q).
OneFormField recover_one_form(const PlaneMap& phi, const RecoverOptions& opts = {});

struct GeneratingOptions {
  double max_curl = 5e-2;  // rejects forms whose cell-averaged curl exceeds this
};
struct GeneratingFunction {
  GridField2D g;
  double path_residual = 0;  // rows-first against columns-first integration
};
// g with dg = alpha and g = base_value at the corner node, integrated along grid lines
// with the Hermite corrected trapezoid rule.
GeneratingFunction integrate_generating(const OneFormField& alpha, double base_value,
                                        const GeneratingOptions& opts = {});

// psi_r(q) = q - (r/2) j alpha(q)
double psi_min_det(const OneFormField& alpha, double r);
// phi_r with Image r alpha = Graph phi_r: phi_r(y) = 2q - y where psi_r(q) = y.
PlaneMap family_from_one_form(const OneFormField& alpha, double r);

// Parameter family of grid functions on the chart (time or scale).
struct PhaseFamily {
  std::vector<double> parameter_samples;
  std::vector<GridField2D> fields;
  double normalization_value = 0;

  size_t size() const { return fields.size(); }
  // Largest grid difference quotient of member k.
  double lipschitz(size_t k) const;
};

struct TraceChainFamily {
  std::vector<double> scales;
  PhaseFamily g;
  PlaneMap base_map;
  std::vector<double> path_residuals;
};
TraceChainFamily trace_chain_family(const PlaneMap& phi, const std::vector<double>& scales,
                                    const RecoverOptions& opts = {});

// max over nodes of |g_a(a q) - a^2 g_1(q)|, g_1 taken as the member with a = 1.
double scaling_defect(const TraceChainFamily& fam);

// Centered a-differences of g against 2a g_1(q/a) - (1/a) dg_a(q).q at interior scales.
// The scales must be uniform and include 1.
double dgada_defect(const TraceChainFamily& fam);

}  // namespace symlab
