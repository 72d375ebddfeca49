#pragma once

#include "symlab/core_model.hpp"

#include <array>
#include <optional>
#include <vector>

namespace symlab {

constexpr double kDefaultCoverage = 1.25;

struct FlowOptions {
  double dt = 1e-3;
  double coverage_radius = kDefaultCoverage;
  bool jacobian = false;  // integrate the variational equation alongside
  bool inverse = false;   // also sample the inverse map by backward integration
};

class FlowExit : public std::runtime_error {
 public:
  FlowExit(const std::string& what, Vec2 last_state, double last_time)
      : std::runtime_error(what), last_state(std::move(last_state)), last_time(last_time) {}
  Vec2 last_state;
  double last_time;
};

class InversionError : public std::runtime_error {
 public:
  InversionError(const std::string& what, Vec2 target)
      : std::runtime_error(what), target(std::move(target)) {}
  Vec2 target;
};

// X_H = (dH/dp, -dH/dq), so that i_X (dq ^ dp) = dH.
Vec2 vector_field(const ScalarTimeField& H, double t, const Vec2& x,
                  double coverage_radius = kDefaultCoverage);
Vec2 vector_field_fd(const ScalarTimeField& H, double t, const Vec2& x, double h_d,
                     double coverage_radius = kDefaultCoverage);

Vec2 integrate_flow(const ScalarTimeField& H, double t0, double t1, const Vec2& x0, double dt,
                    double coverage_radius = kDefaultCoverage);

struct FlowState {
  Vec2 x;
  Mat2 jac;
};
FlowState integrate_flow_jacobian(const ScalarTimeField& H, double t0, double t1, const Vec2& x0,
                                  double dt, double coverage_radius = kDefaultCoverage);

int step_count(double t0, double t1, double dt);

// Grid sampled area preserving map, identity outside support_radius.
class PlaneMap {
 public:
  PlaneMap() = default;
  PlaneMap(GridField2D fx, GridField2D fy, double support_radius, double jacobian_tolerance = 1e-5);

  static PlaneMap identity(const GridSpec& g, double support_radius = 0.0);
  template <typename F>
  static PlaneMap from_function(const GridSpec& g, F&& map, double support_radius) {
    ArrayXXd vx(g.nodes(), g.nodes()), vy(g.nodes(), g.nodes());
    for (Index j = 0; j < g.nodes(); ++j)
      for (Index i = 0; i < g.nodes(); ++i) {
        const Vec2 y = g.node(i, j);
        const Vec2 z = y.norm() >= support_radius ? y : Vec2(map(y));
        vx(i, j) = z.x();
        vy(i, j) = z.y();
      }
    return PlaneMap(GridField2D(g, std::move(vx)), GridField2D(g, std::move(vy)), support_radius);
  }

  void set_jacobian(std::array<GridField2D, 4> j);  // (J00, J01, J10, J11)
  void set_inverse(GridField2D gx, GridField2D gy);
  void set_dt(double dt) { dt_ = dt; }

  Vec2 operator()(const Vec2& x) const;
  Mat2 jacobian(const Vec2& x) const;
  Mat2 interpolant_jacobian(const Vec2& x) const;
  Vec2 node_image(Index i, Index j) const { return Vec2(fx_.value(i, j), fy_.value(i, j)); }
  Mat2 node_jacobian(Index i, Index j) const;

  // Preimage of y: stored inverse samples if present, else damped Newton.
  Vec2 inverse(const Vec2& y) const;
  Vec2 newton_inverse(const Vec2& y, const Vec2& seed, double tol = 1e-10, int max_iter = 50) const;
  // Preimages of every node, Newton seeded along a sweep when no inverse is stored.
  std::pair<ArrayXXd, ArrayXXd> inverse_nodes() const;

  const GridField2D& fx() const { return fx_; }
  const GridField2D& fy() const { return fy_; }
  const std::optional<std::array<GridField2D, 4>>& jacobian_fields() const { return jac_; }
  const std::optional<std::pair<GridField2D, GridField2D>>& inverse_fields() const { return inv_; }
  GridSpec grid() const { return fx_.spec(); }
  double support_radius() const { return support_; }
  double jacobian_tolerance() const { return jac_tol_; }
  double dt() const { return dt_; }

  // max |det D - 1| over nodes in the closed unit disc of the grid.
  double max_det_defect() const;
  // max |phi(x) - x| over nodes with |x| >= support_radius.
  double identity_defect() const;

 private:
  GridField2D fx_, fy_;
  std::optional<std::array<GridField2D, 4>> jac_;
  std::optional<std::pair<GridField2D, GridField2D>> inv_;
  double support_ = 0.0;
  double jac_tol_ = 1e-5;
  double dt_ = 0.0;
};

struct HamiltonianPath {
  ScalarTimeField hamiltonian;
  std::vector<double> time_samples;
  std::vector<PlaneMap> maps;
};

PlaneMap flow_map(const ScalarTimeField& H, double t, const GridSpec& grid,
                  const FlowOptions& opts = {});
HamiltonianPath hamiltonian_path(const ScalarTimeField& H, std::vector<double> times,
                                 const GridSpec& grid, const FlowOptions& opts = {});

// Compares phi^{t+s}(x) with phi^s restarted at phi^t(x) on a coarse set of nodes.
double group_law_defect(const ScalarTimeField& H, double t, double s, const GridSpec& grid,
                        double dt);

struct OscOptions {
  int n = 256;   // grid intervals across the support disc
  int nt = 64;   // time intervals (even)
};
double osc(const ScalarTimeField& H, double t, int n = 256);
double hofer_length(const ScalarTimeField& H, const OscOptions& opts = {});

double c0_distance(const PlaneMap& phi, const PlaneMap& psi);

struct HamDistanceOptions {
  int c0_grid = 64;
  int c0_times = 10;
  double dt = 1e-2;
  OscOptions osc{48, 16};
};
struct HamDistance {
  double c0 = 0;
  double hofer = 0;
  double total() const { return c0 + hofer; }
};
HamDistance ham_distance(const ScalarTimeField& H, const ScalarTimeField& K,
                         const HamDistanceOptions& opts = {});

}  // namespace symlab
