#include "symlab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace symlab::io {

namespace {

void dump_into(std::string& out, const json& j, int depth) {
  const std::string pad(2 * (depth + 1), ' '), close(2 * depth, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        dump_into(out, it.value(), depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (size_t k = 0; k < j.size(); ++k) {
        if (k) out += ",\n";
        out += pad;
        dump_into(out, j[k], depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      // JSON has no literal for non-finite numbers
      out += std::isfinite(v) ? format_real(v) : "\"" + format_real(v) + "\"";
      return;
    }
    default:
      out += j.dump();
  }
}

double real_from(const json& j) {
  if (j.is_string()) return std::stod(j.get<std::string>());
  if (j.is_null()) return std::nan("");
  return j.get<double>();
}

std::vector<double> split_reals(const std::string& line) {
  std::vector<double> v;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
  return v;
}

json grid_header(const GridField2D& f) {
  return {{"n", f.size() - 1}, {"spacing", f.spacing()}, {"origin", {f.origin().x(), f.origin().y()}}};
}

}  // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

std::string dump(const json& j) {
  std::string out;
  dump_into(out, j, 0);
  out += "\n";
  return out;
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
  if (!os) throw std::runtime_error("write failed for " + p.string());
}

std::string read_text(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string grid_csv(const GridField2D& f) {
  std::string out = "n,spacing,origin_x,origin_y\n";
  out += std::to_string(f.size() - 1) + "," + format_real(f.spacing()) + "," + format_real(f.origin().x()) + "," +
         format_real(f.origin().y()) + "\n";
  for (Index j = 0; j < f.size(); ++j) {
    for (Index i = 0; i < f.size(); ++i) {
      if (i) out += ",";
      out += format_real(f.value(i, j));
    }
    out += "\n";
  }
  return out;
}

GridField2D parse_grid_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line) || line != "n,spacing,origin_x,origin_y")
    throw std::runtime_error("grid csv: bad header");
  std::getline(ss, line);
  const std::vector<double> head = split_reals(line);
  if (head.size() != 4) throw std::runtime_error("grid csv: bad header values");
  const Index n = Index(head[0]) + 1;
  ArrayXXd v(n, n);
  for (Index j = 0; j < n; ++j) {
    if (!std::getline(ss, line)) throw std::runtime_error("grid csv: missing rows");
    const std::vector<double> row = split_reals(line);
    if (Index(row.size()) != n) throw std::runtime_error("grid csv: row length mismatch");
    for (Index i = 0; i < n; ++i) v(i, j) = row[size_t(i)];
  }
  return GridField2D(Vec2(head[2], head[3]), head[1], std::move(v));
}

void write_grid(const fs::path& dir, const std::string& name, const GridField2D& f) {
  write_text(dir / (name + ".csv"), grid_csv(f));
  json env = grid_header(f);
  env["csv"] = name + ".csv";
  write_text(dir / (name + ".json"), dump(env));
}

GridField2D read_grid(const fs::path& dir, const std::string& name) {
  const json env = json::parse(read_text(dir / (name + ".json")));
  const GridField2D f = parse_grid_csv(read_text(dir / env.at("csv").get<std::string>()));
  if (f.size() - 1 != env.at("n").get<Index>()) throw std::runtime_error("grid envelope does not match csv");
  return f;
}

void write_plane_map(const fs::path& dir, const std::string& name, const PlaneMap& phi) {
  write_text(dir / (name + "_x.csv"), grid_csv(phi.fx()));
  write_text(dir / (name + "_y.csv"), grid_csv(phi.fy()));
  json env = grid_header(phi.fx());
  env["support_radius"] = phi.support_radius();
  env["dt"] = phi.dt();
  env["csv"] = {name + "_x.csv", name + "_y.csv"};
  write_text(dir / (name + ".json"), dump(env));
}

PlaneMap read_plane_map(const fs::path& dir, const std::string& name) {
  const json env = json::parse(read_text(dir / (name + ".json")));
  GridField2D fx = parse_grid_csv(read_text(dir / env.at("csv")[0].get<std::string>()));
  GridField2D fy = parse_grid_csv(read_text(dir / env.at("csv")[1].get<std::string>()));
  PlaneMap m(std::move(fx), std::move(fy), real_from(env.at("support_radius")));
  m.set_dt(real_from(env.at("dt")));
  return m;
}

json to_json(const CalabiReport& r) {
  return {{"cal_def1", r.cal_def1},
          {"cal_path", r.cal_path},
          {"primitive_residual", r.primitive_residual},
          {"agreement_error", r.agreement_error},
          {"path_residual", r.path_residual},
          {"cal_def1_error", r.cal_def1_error},
          {"cal_path_error", r.cal_path_error},
          {"grid", r.grid},
          {"dt", r.dt}};
}

CalabiReport calabi_report_from_json(const json& j) {
  CalabiReport r;
  r.cal_def1 = real_from(j.at("cal_def1"));
  r.cal_path = real_from(j.at("cal_path"));
  r.primitive_residual = real_from(j.at("primitive_residual"));
  r.agreement_error = real_from(j.at("agreement_error"));
  r.path_residual = real_from(j.value("path_residual", json(0.0)));
  r.cal_def1_error = real_from(j.value("cal_def1_error", json(0.0)));
  r.cal_path_error = real_from(j.value("cal_path_error", json(0.0)));
  r.grid = j.at("grid").get<int>();
  r.dt = real_from(j.at("dt"));
  return r;
}

void write_one_form(const fs::path& dir, const std::string& name, const OneFormField& a) {
  write_text(dir / (name + "_a1.csv"), grid_csv(a.a1));
  write_text(dir / (name + "_a2.csv"), grid_csv(a.a2));
  json env = grid_header(a.a1);
  env["support_radius"] = a.support_radius;
  env["csv"] = {name + "_a1.csv", name + "_a2.csv"};
  write_text(dir / (name + ".json"), dump(env));
}

OneFormField read_one_form(const fs::path& dir, const std::string& name) {
  const json env = json::parse(read_text(dir / (name + ".json")));
  return {parse_grid_csv(read_text(dir / env.at("csv")[0].get<std::string>())),
          parse_grid_csv(read_text(dir / env.at("csv")[1].get<std::string>())), real_from(env.at("support_radius"))};
}

void write_generating(const fs::path& dir, const std::string& name, const GeneratingFunction& g) {
  write_text(dir / (name + ".csv"), grid_csv(g.g));
  json env = grid_header(g.g);
  env["csv"] = name + ".csv";
  env["path_residual"] = g.path_residual;
  write_text(dir / (name + ".json"), dump(env));
}

json family_report(const std::vector<double>& a, const std::vector<json>& entries) {
  if (a.size() != entries.size()) throw std::invalid_argument("family_report: size mismatch");
  json out = json::array();
  for (size_t k = 0; k < a.size(); ++k) {
    json e = entries[k].is_object() ? entries[k] : json{{"value", entries[k]}};
    e["a"] = a[k];
    out.push_back(std::move(e));
  }
  return out;
}

void write_phase_family(const fs::path& dir, const PhaseFamily& fam, const json& tolerances) {
  json members = json::array();
  for (size_t k = 0; k < fam.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "member_%03zu", k);
    write_text(dir / (std::string(name) + ".csv"), grid_csv(fam.fields[k]));
    members.push_back({{"parameter", fam.parameter_samples[k]}, {"csv", std::string(name) + ".csv"}});
  }
  const json manifest{{"members", members},
                      {"normalization_value", fam.normalization_value},
                      {"tolerances", tolerances}};
  write_text(dir / "manifest.json", dump(manifest));
}

PhaseFamily read_phase_family(const fs::path& dir) {
  const json m = json::parse(read_text(dir / "manifest.json"));
  PhaseFamily fam;
  fam.normalization_value = real_from(m.at("normalization_value"));
  for (const json& e : m.at("members")) {
    fam.parameter_samples.push_back(real_from(e.at("parameter")));
    fam.fields.push_back(parse_grid_csv(read_text(dir / e.at("csv").get<std::string>())));
  }
  return fam;
}

std::string sequence_csv(const std::vector<SequenceMember>& seq) {
  std::string out = "a_i,cal,c0_dist,hofer_len\n";
  for (const SequenceMember& m : seq)
    out += format_real(m.a) + "," + format_real(m.cal) + "," + format_real(m.c0_dist) + "," +
           format_real(m.hofer_len) + "\n";
  return out;
}

}  // namespace symlab::io
