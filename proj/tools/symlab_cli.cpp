#include "symlab/families.hpp"
#include "symlab/lab.hpp"
#include "symlab/phase_hj.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace symlab;

namespace {

struct Common {
  std::string config;
  std::string out;  // empty: output_path from the config
  std::optional<std::uint64_t> seed;
  std::optional<int> grid;
  std::optional<double> dt;
};

struct FamilyArgs {
  std::string kind = "radial_bump";
  double amplitude = 0.15;
  double radius = 0.9;
  double rho = 0;
  int order = 4;

  void add(CLI::App* app) {
    app->add_option("--family", kind, "radial_bump, reparam_loop, moving_bump or twist");
    app->add_option("--amplitude", amplitude);
    app->add_option("--radius", radius);
    app->add_option("--rho", rho, "orbit radius or center offset");
    app->add_option("--order", order, "bump exponent");
  }
  FamilySpec spec() const { return FamilySpec{parse_family_kind(kind), amplitude, radius, rho, order}; }
};

// Config for a module subcommand: file values first, command line flags on top.
ExperimentConfig settings(const Common& c, ExperimentId id) {
  ExperimentConfig cfg = c.config.empty() ? default_config(id) : load_config(c.config, default_config(id));
  if (c.seed) cfg.seed = *c.seed;
  if (c.grid) cfg.grid_n = *c.grid;
  if (c.dt) cfg.dt = *c.dt;
  if (!c.config.empty() || c.grid || c.dt) cfg.validate();
  return cfg;
}

io::fs::path outdir(const Common& c, const ExperimentConfig& cfg) { return c.out.empty() ? cfg.output_path : c.out; }

FlowOptions flow_options(const ExperimentConfig& cfg, bool jacobian) {
  FlowOptions fo;
  fo.dt = cfg.dt;
  fo.jacobian = jacobian;
  return fo;
}

int run_flow(const Common& c, const FamilyArgs& f, double t) {
  const ExperimentConfig cfg = settings(c, ExperimentId::Baselines);
  const PlaneMap phi = flow_map(f.spec().build(), t, GridSpec{cfg.grid_n, 1.0, Vec2::Zero()}, flow_options(cfg, true));
  io::write_plane_map(outdir(c, cfg), "flow", phi);
  std::cout << "max det defect " << io::format_real(phi.max_det_defect()) << "\n";
  return 0;
}

int run_calabi(const Common& c, const FamilyArgs& f) {
  const ExperimentConfig cfg = settings(c, ExperimentId::E1);
  const CalabiReport r = calabi_report(f.spec().build(), GridSpec{cfg.grid_n, 1.0, Vec2::Zero()}, flow_options(cfg, false));
  io::json j = io::to_json(r);
  j["family"] = f.spec().to_json();
  io::write_text(outdir(c, cfg) / "calabi.json", io::dump(j));
  std::cout << io::dump(j);
  return 0;
}

int run_alexander(const Common& c, const FamilyArgs& f, const std::vector<double>& a) {
  const ExperimentConfig cfg = settings(c, ExperimentId::E2);
  const ScalarTimeField H = f.spec().build();
  std::vector<io::json> entries;
  for (double s : a) {
    const double cal = cal_path(rescale(H, s).hamiltonian, {cfg.grid_n, 64});
    entries.push_back({{"cal", cal}, {"support_radius", s * H.support_radius()}});
  }
  const io::json j = io::family_report(a, entries);
  io::write_text(outdir(c, cfg) / "alexander.json", io::dump(j));
  std::cout << io::dump(j);
  return 0;
}

int run_graphical(const Common& c, const FamilyArgs& f) {
  const ExperimentConfig cfg = settings(c, ExperimentId::E4);
  const ScalarTimeField H = f.spec().build();
  const PlaneMap phi = flow_map(H, 1.0, GridSpec{cfg.grid_n, 1.0, Vec2::Zero()}, flow_options(cfg, true));
  const GraphicalCheck g = is_graphical(phi);
  io::json j{{"graphical", g.graphical},
             {"injective", g.injective},
             {"min_det", g.min_det},
             {"worst_node", {g.worst_node.x(), g.worst_node.y()}},
             {"family", f.spec().to_json()}};
  if (g) {
    const OneFormField alpha = recover_one_form(phi);
    io::write_one_form(outdir(c, cfg), "alpha", alpha);
    io::write_generating(outdir(c, cfg), "generating", integrate_generating(alpha, 0.0));
  }
  io::write_text(outdir(c, cfg) / "graphical.json", io::dump(j));
  std::cout << io::dump(j);
  return g ? 0 : 1;
}

int run_phase(const Common& c, const FamilyArgs& f, int steps) {
  const ExperimentConfig cfg = settings(c, ExperimentId::E5);
  PhaseOptions o;
  o.n = cfg.grid_n;
  o.dt = cfg.dt;
  const PhaseFamily fam = timewise_family(f.spec().build(), DiscDomain{}, uniform_samples(0.0, 1.0, steps), o);
  io::write_phase_family(outdir(c, cfg) / "phase", fam);
  std::cout << "wrote " << fam.size() << " members\n";
  return 0;
}

int run_exp(const Common& c, const std::string& id_text, const std::string& format) {
  const ExperimentId id = parse_experiment_id(id_text);
  const ExperimentConfig cfg = settings(c, id);
  const ExperimentReport r = run_experiment(cfg);
  const io::fs::path p = emit_report(r, format == "csv" ? ReportFormat::Csv : ReportFormat::Json, outdir(c, cfg));
  for (const Criterion& k : r.criteria)
    std::cout << (k.pass ? "PASS " : "FAIL ") << to_string(id) << " " << k.name << " measured "
              << io::format_real(k.measured) << " tol " << io::format_real(k.tolerance)
              << (k.message.empty() ? "" : " (" + k.message + ")") << "\n";
  std::cout << "report " << p.string() << "\n";
  return r.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symplectic lab: Hamiltonian flows, Calabi invariant and phase functions"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Common c;
  app.add_option("--config", c.config, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", c.out, "output directory");
  app.add_option("--seed", c.seed, "random seed");
  app.add_option("--grid", c.grid, "grid intervals (power of two)");
  app.add_option("--dt", c.dt, "flow step");

  FamilyArgs fam;
  double t = 1.0;
  std::vector<double> scales{0.25, 0.5, 0.75, 1.0};
  int steps = 8;
  std::string id, format = "json";

  CLI::App* flow = app.add_subcommand("flow", "time t map on a grid");
  fam.add(flow);
  flow->add_option("--time", t);
  CLI::App* calabi = app.add_subcommand("calabi", "Calabi invariant by both definitions");
  fam.add(calabi);
  CLI::App* alex = app.add_subcommand("alexander", "Calabi along the rescaled family");
  fam.add(alex);
  alex->add_option("--a", scales, "scale factors")->delimiter(',');
  CLI::App* graph = app.add_subcommand("graphical", "graphicality test and generating function");
  fam.add(graph);
  CLI::App* phase = app.add_subcommand("phase", "timewise phase function family");
  fam.add(phase);
  phase->add_option("--steps", steps, "time intervals")->check(CLI::PositiveNumber);
  CLI::App* exp = app.add_subcommand("exp", "run one experiment");
  exp->add_option("id", id, "E1..E9 or B")->required();
  exp->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  CLI11_PARSE(app, argc, argv);
  try {
    if (*flow) return run_flow(c, fam, t);
    if (*calabi) return run_calabi(c, fam);
    if (*alex) return run_alexander(c, fam, scales);
    if (*graph) return run_graphical(c, fam);
    if (*phase) return run_phase(c, fam, steps);
    return run_exp(c, id, format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
