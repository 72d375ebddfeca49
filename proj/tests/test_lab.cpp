#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "symlab/families.hpp"
#include "symlab/lab.hpp"

#include <cmath>
#include <random>

using namespace symlab;

namespace {

io::fs::path scratch(const std::string& name) {
  const io::fs::path p = io::fs::temp_directory_path() / ("symlab_test_lab_" + name);
  io::fs::remove_all(p);
  io::fs::create_directories(p);
  return p;
}

ExperimentConfig small(ExperimentId id, const std::string& extra = "") {
  return parse_config("experiment = " + to_string(id) + "\n" + extra);
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(
      "# comment line\n"
      "experiment = E4\n"
      "grid = 128   # trailing comment\n"
      "dt = 2e-3\n"
      "family = moving_bump\n"
      "amplitude = 0.05\n"
      "radius = 0.4\n"
      "rho = 0.3\n"
      "tol.identity = 1e-3\n");
  CHECK(c.id == ExperimentId::E4);
  CHECK(c.grid_n == 128);
  CHECK(c.dt == 2e-3);
  REQUIRE(c.family);
  CHECK(c.family->kind == FamilyKind::MovingBump);
  CHECK(c.family->rho == 0.3);
  CHECK(c.tolerances.at("identity") == 1e-3);
  CHECK(c.tolerances.at("chord") == 2e-3);

  CHECK_THROWS_AS(parse_config("experiment = E1\ncolour = red\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("experiment = E1\ngrid = 100\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("experiment = E1\ngrid = 32\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("experiment = E1\ndt = 0\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("experiment = E1\ndt = fast\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("experiment = E1\ngrid = 64\ngrid = 128\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("experiment = E1\namplitude = 2\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("experiment = E1\ntol.spread = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("experiment = E12\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("grid = 64\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("experiment E1\n"), std::invalid_argument);

  // a base config allows partial files
  const ExperimentConfig over = parse_config("dt = 5e-3\n", default_config(ExperimentId::E8));
  CHECK(over.id == ExperimentId::E8);
  CHECK(over.dt == 5e-3);
  CHECK(over.grid_n == default_config(ExperimentId::E8).grid_n);
}

TEST_CASE("experiment ids") {
  for (ExperimentId id : all_experiments()) CHECK(parse_experiment_id(to_string(id)) == id);
  CHECK(parse_experiment_id("baselines") == ExperimentId::Baselines);
  CHECK(parse_experiment_id("e7") == ExperimentId::E7);
}

TEST_CASE("E2 ratio on a single family") {
  const ExperimentReport r = run_experiment(small(ExperimentId::E2, "grid = 64\nfamily = radial_bump\n"));
  REQUIRE(r.criteria.size() == 3);
  CHECK(r.passed());
  // radial bump: Cal = c A R^4 in closed form, so the ratio is a^4 up to rounding
  const double base = cal_path(radial_bump(1.0, 0.8, 4), {64, 64});
  const double quarter = cal_path(rescale(radial_bump(1.0, 0.8, 4), 0.25).hamiltonian, {64, 64});
  CHECK(quarter / base == doctest::Approx(std::pow(0.25, 4)).epsilon(1e-12));
  CHECK(r.rows.size() == 3);
  CHECK(r.rows[1][3].get<double>() == std::pow(0.25, 4));
}

TEST_CASE("E2 fails when Cal vanishes") {
  const ExperimentReport r = run_experiment(small(ExperimentId::E2, "grid = 64\nfamily = radial_bump\namplitude = 0\n"));
  CHECK_FALSE(r.passed());
}

TEST_CASE("E1 with H = 0 measures zeros") {
  const ExperimentReport r =
      run_experiment(small(ExperimentId::E1, "grid = 64\nfamily = radial_bump\namplitude = 0\n"));
  REQUIRE(r.criteria.size() == 1);
  CHECK(r.passed());
  CHECK(r.criteria[0].measured == 0.0);
  for (const auto& [k, v] : r.measured) CHECK(v == 0.0);
}

TEST_CASE("E6 every sampled matrix is star shaped") {
  const ExperimentReport r = run_experiment(small(ExperimentId::E6));
  CHECK(r.passed());
  CHECK(r.measured.at("tested") == 10000);
  CHECK(r.measured.at("failures") == 0);

  // independent oracle: det(I - r jA) straight from Eigen
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Mat2 j;
  j << 0, -1, 1, 0;
  int checked = 0;
  for (int k = 0; k < 500; ++k) {
    const SymmetricMatrix2 A{u(rng), u(rng), u(rng)};
    if (1 + A.a * A.b - A.c * A.c <= 0) continue;
    Mat2 M;
    M << A.a, A.c, A.c, A.b;
    for (int i = 0; i <= 100; ++i) {
      const double r = i / 100.0;
      const double d = (Mat2::Identity() - r * j * M).determinant();
      CHECK(d > 0);
      CHECK(starshape_det(A, r) == doctest::Approx(d).epsilon(1e-13));
    }
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("report bytes are stable") {
  const ExperimentConfig cfg = small(ExperimentId::E6, "samples = 500\nseed = 11\n");
  const io::fs::path d1 = scratch("a"), d2 = scratch("b");
  const io::fs::path p1 = emit_report(run_experiment(cfg), ReportFormat::Json, d1);
  const io::fs::path p2 = emit_report(run_experiment(cfg), ReportFormat::Json, d2);
  CHECK(io::read_text(p1) == io::read_text(p2));
  const io::json j = io::json::parse(io::read_text(p1));
  CHECK(j.at("experiment") == "E6");
  CHECK(j.at("pass") == true);
  CHECK(j.at("config").at("seed") == 11);
  CHECK(j.at("measured").at("tested").get<double>() == 500);

  // different seed, different bytes
  const io::fs::path p3 =
      emit_report(run_experiment(small(ExperimentId::E6, "samples = 500\nseed = 12\n")), ReportFormat::Json, d2);
  CHECK(io::read_text(p1) != io::read_text(p3));
}

TEST_CASE("csv report has one row per member") {
  const ExperimentReport r = run_experiment(small(ExperimentId::E2, "grid = 64\nfamily = twist\n"));
  const io::fs::path p = emit_report(r, ReportFormat::Csv, scratch("csv"));
  const std::string text = io::read_text(p);
  CHECK(text.rfind("family,a,ratio,a4,relative_error\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3);
}

TEST_CASE("canonical json") {
  const io::json j{{"b", 1.5}, {"a", {{"z", 0.1}, {"y", 2}}}, {"nan", std::nan("")}};
  const std::string s = io::dump(j);
  CHECK(s ==
        "{\n"
        "  \"a\": {\n"
        "    \"y\": 2,\n"
        "    \"z\": 1.000000000000e-01\n"
        "  },\n"
        "  \"b\": 1.500000000000e+00,\n"
        "  \"nan\": \"nan\"\n"
        "}\n");
  CHECK(io::json::parse(s).at("b").get<double>() == 1.5);
  CHECK(io::format_real(-kInf) == "-inf");
}

TEST_CASE("grid and plane map round trips") {
  const io::fs::path d = scratch("grid");
  const GridSpec g{16, 1.0, Vec2::Zero()};
  const GridField2D f = GridField2D::sample(g, [](const Vec2& x) { return std::sin(3 * x.x()) * x.y(); });
  io::write_grid(d, "f", f);
  const GridField2D back = io::read_grid(d, "f");
  CHECK(back.size() == f.size());
  // %.12e keeps 13 significant digits
  CHECK((back.values() - f.values()).abs().maxCoeff() < 1e-12);

  FlowOptions fo;
  fo.jacobian = true;
  const PlaneMap phi = flow_map(radial_bump(0.1, 0.7, 4), 1.0, g, fo);
  io::write_plane_map(d, "phi", phi);
  const PlaneMap psi = io::read_plane_map(d, "phi");
  CHECK(psi.support_radius() == phi.support_radius());
  CHECK((psi.fx().values() - phi.fx().values()).abs().maxCoeff() < 1e-12);
  CHECK((psi.fy().values() - phi.fy().values()).abs().maxCoeff() < 1e-12);

  // writing the reread map gives the same bytes
  io::write_plane_map(d, "psi", psi);
  CHECK(io::read_text(d / "phi_x.csv") == io::read_text(d / "psi_x.csv"));

  CHECK_THROWS(io::parse_grid_csv("n,spacing\n1,2\n"));
  CHECK_THROWS(io::read_grid(d, "missing"));
}

TEST_CASE("calabi report and phase family round trips") {
  CalabiReport r;
  r.cal_def1 = 0.25;
  r.cal_path = 0.25 + 1e-9;
  r.agreement_error = 1e-9;
  r.grid = 64;
  r.dt = 1e-3;
  const CalabiReport back = io::calabi_report_from_json(io::json::parse(io::dump(io::to_json(r))));
  CHECK(back.cal_def1 == r.cal_def1);
  CHECK(back.grid == 64);
  CHECK(std::abs(back.cal_path - r.cal_path) < 1e-20);

  const io::fs::path d = scratch("family");
  PhaseFamily fam;
  const GridSpec g{16, 1.0, Vec2::Zero()};
  for (double a : {0.0, 0.5, 1.0}) {
    fam.parameter_samples.push_back(a);
    fam.fields.push_back(GridField2D::sample(g, [a](const Vec2& x) { return a * x.squaredNorm(); }));
  }
  fam.normalization_value = 0.125;
  io::write_phase_family(d, fam, {{"lipschitz", 1e-2}});
  const PhaseFamily got = io::read_phase_family(d);
  REQUIRE(got.size() == 3);
  CHECK(got.parameter_samples[1] == 0.5);
  CHECK(got.normalization_value == 0.125);
  CHECK((got.fields[2].values() - fam.fields[2].values()).abs().maxCoeff() < 1e-12);
  CHECK(io::fs::exists(d / "member_002.csv"));

  const io::json rep = io::family_report({0.5, 1.0}, {io::json{{"cal", 1.0}}, io::json(2.0)});
  CHECK(rep[0].at("a") == 0.5);
  CHECK(rep[1].at("value") == 2.0);
  CHECK_THROWS_AS(io::family_report({0.5}, {}), std::invalid_argument);
}

TEST_CASE("sequence csv") {
  SequenceMember m;
  m.a = 0.5;
  m.cal = 1.0;
  m.c0_dist = 0.25;
  m.hofer_len = 4.0;
  CHECK(io::sequence_csv({m}) ==
        "a_i,cal,c0_dist,hofer_len\n"
        "5.000000000000e-01,1.000000000000e+00,2.500000000000e-01,4.000000000000e+00\n");
}
