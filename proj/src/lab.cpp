#include "symlab/lab.hpp"

#include "symlab/families.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace symlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

double parse_real(const std::string& key, const std::string& v) {
  size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size()) throw std::invalid_argument("config: " + key + " expects a number, got '" + v + "'");
  return x;
}

long long parse_integer(const std::string& key, const std::string& v) {
  size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size()) throw std::invalid_argument("config: " + key + " expects an integer, got '" + v + "'");
  return x;
}

struct Defaults {
  int grid;
  double budget;
  std::map<std::string, double> tol;
};

Defaults defaults_for(ExperimentId id) {
  switch (id) {
    case ExperimentId::E1: return {512, 60, {{"agreement", 5e-3}}};
    case ExperimentId::E2: return {256, 30, {{"ratio", 1e-6}}};
    case ExperimentId::E3: return {512, 120, {{"cal", 1e-6}, {"hofer_ratio", 1e-6}, {"c0_factor", 2.0}}};
    case ExperimentId::E4: return {256, 120, {{"identity", 2e-3}, {"chord", 2e-3}}};
    case ExperimentId::E5: return {128, 180, {{"spread", 5e-3}, {"value", 5e-3}}};
    case ExperimentId::E6: return {64, 5, {{"gap", 1e-14}}};
    case ExperimentId::E7: return {128, 300, {{"cal", 1e-3}, {"generating", 5e-3}}};
    case ExperimentId::E8: return {64, 300, {{"hj_ratio", 1.7}, {"scaling", 5e-5}, {"dgada", 1.0}}};
    case ExperimentId::E9: return {128, 300, {{"integral", 1e-2}, {"sup", 1e-2}}};
    case ExperimentId::Baselines:
      return {256, 60, {{"symplectic", 1e-5}, {"quadrature", 1e-4}, {"rk4_ratio", 14.0}}};
  }
  throw std::logic_error("unknown experiment");
}

std::string csv_cell(const io::json& v) {
  if (v.is_number_float()) return io::format_real(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

std::string to_string(ExperimentId id) {
  if (id == ExperimentId::Baselines) return "B";
  return "E" + std::to_string(int(id) + 1);
}

ExperimentId parse_experiment_id(const std::string& s) {
  const std::string t = lower(trim(s));
  if (t == "b" || t == "baselines") return ExperimentId::Baselines;
  if (t.size() == 2 && t[0] == 'e' && t[1] >= '1' && t[1] <= '9') return ExperimentId(t[1] - '1');
  throw std::invalid_argument("unknown experiment id '" + s + "'");
}

const std::vector<ExperimentId>& all_experiments() {
  static const std::vector<ExperimentId> ids{ExperimentId::E1, ExperimentId::E2, ExperimentId::E3, ExperimentId::E4,
                                             ExperimentId::E5, ExperimentId::E6, ExperimentId::E7, ExperimentId::E8,
                                             ExperimentId::E9, ExperimentId::Baselines};
  return ids;
}

std::string to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::RadialBump: return "radial_bump";
    case FamilyKind::ReparamLoop: return "reparam_loop";
    case FamilyKind::MovingBump: return "moving_bump";
    case FamilyKind::Twist: return "twist";
  }
  return "?";
}

FamilyKind parse_family_kind(const std::string& s) {
  for (FamilyKind k : {FamilyKind::RadialBump, FamilyKind::ReparamLoop, FamilyKind::MovingBump, FamilyKind::Twist})
    if (lower(trim(s)) == to_string(k)) return k;
  throw std::invalid_argument("unknown family '" + s + "'");
}

ScalarTimeField FamilySpec::build() const {
  switch (kind) {
    case FamilyKind::RadialBump: return radial_bump(amplitude, radius, order);
    case FamilyKind::MovingBump: return moving_bump(amplitude, radius, rho, order);
    case FamilyKind::Twist: return twist(amplitude, radius);
    case FamilyKind::ReparamLoop:
      return reparam_loop(rho == 0 ? radial_bump(amplitude, radius, order)
                                   : offset_bump(amplitude, radius, Vec2(rho, 0.0), order));
  }
  throw std::logic_error("unknown family");
}

std::string FamilySpec::label() const {
  std::ostringstream os;
  os << to_string(kind) << "(" << amplitude << "," << radius;
  if (kind == FamilyKind::MovingBump || (kind == FamilyKind::ReparamLoop && rho != 0)) os << "," << rho;
  if (kind != FamilyKind::Twist) os << ",k=" << order;
  os << ")";
  return os.str();
}

io::json FamilySpec::to_json() const {
  return {{"kind", to_string(kind)}, {"amplitude", amplitude}, {"radius", radius}, {"rho", rho}, {"order", order}};
}

void ExperimentConfig::validate() const {
  if (grid_n < 64 || (grid_n & (grid_n - 1)) != 0)
    throw std::invalid_argument("config: grid must be a power of two >= 64");
  if (!(dt > 0 && dt <= 1e-2)) throw std::invalid_argument("config: dt must lie in (0, 1e-2]");
  if (!(h_a > 0 && h_a < 0.25)) throw std::invalid_argument("config: h_a must lie in (0, 0.25)");
  for (const auto& [k, v] : tolerances)
    if (!(v > 0)) throw std::invalid_argument("config: tolerance " + k + " must be positive");
  if (samples <= 0) throw std::invalid_argument("config: samples must be positive");
  if (!(budget > 0)) throw std::invalid_argument("config: budget must be positive");
  if (family && !(family->radius > 0 && family->radius < 1))
    throw std::invalid_argument("config: family radius must lie in (0, 1)");
  if (family && (family->order < 2 || family->order > 8))
    throw std::invalid_argument("config: family order must lie in [2, 8]");
}

io::json ExperimentConfig::to_json() const {
  io::json j{{"experiment", to_string(id)},
             {"grid", grid_n},
             {"dt", dt},
             {"h_a", h_a},
             {"tolerances", tolerances},
             {"seed", seed},
             {"samples", samples},
             {"budget", budget}};
  j["family"] = family ? family->to_json() : io::json("builtin");
  return j;
}

ExperimentConfig default_config(ExperimentId id) {
  const Defaults d = defaults_for(id);
  ExperimentConfig c;
  c.id = id;
  c.grid_n = d.grid;
  c.tolerances = d.tol;
  c.budget = d.budget;
  return c;
}

ExperimentConfig parse_config(const std::string& text, std::optional<ExperimentConfig> base) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key or value");
    if (!kv.emplace(key, value).second) throw std::invalid_argument("config: duplicate key " + key);
  }

  ExperimentConfig c = base ? *base : default_config(ExperimentId::E1);
  if (auto it = kv.find("experiment"); it != kv.end()) {
    const ExperimentId id = parse_experiment_id(it->second);
    if (!base || id != base->id) {
      const ExperimentConfig fresh = default_config(id);
      c.id = id;
      c.grid_n = fresh.grid_n;
      c.tolerances = fresh.tolerances;
      c.budget = fresh.budget;
    }
    kv.erase(it);
  } else if (!base) {
    throw std::invalid_argument("config: missing experiment");
  }

  if (auto it = kv.find("family"); it != kv.end()) {
    FamilySpec f;
    f.kind = parse_family_kind(it->second);
    if (f.kind == FamilyKind::Twist) {
      f.amplitude = 0.5;
      f.order = 3;
    }
    c.family = f;
    kv.erase(it);
  }
  const std::map<std::string, double> known_tol = defaults_for(c.id).tol;
  for (const auto& [key, value] : kv) {
    if (key == "grid") {
      c.grid_n = int(parse_integer(key, value));
    } else if (key == "dt") {
      c.dt = parse_real(key, value);
    } else if (key == "h_a") {
      c.h_a = parse_real(key, value);
    } else if (key == "seed") {
      const long long s = parse_integer(key, value);
      if (s < 0) throw std::invalid_argument("config: seed must be nonnegative");
      c.seed = std::uint64_t(s);
    } else if (key == "samples") {
      c.samples = int(parse_integer(key, value));
    } else if (key == "budget") {
      c.budget = parse_real(key, value);
    } else if (key == "output") {
      c.output_path = value;
    } else if (key == "amplitude" || key == "radius" || key == "rho" || key == "order") {
      if (!c.family) throw std::invalid_argument("config: " + key + " needs a family");
      if (key == "amplitude") c.family->amplitude = parse_real(key, value);
      if (key == "radius") c.family->radius = parse_real(key, value);
      if (key == "rho") c.family->rho = parse_real(key, value);
      if (key == "order") c.family->order = int(parse_integer(key, value));
    } else if (key.rfind("tol.", 0) == 0) {
      const std::string name = key.substr(4);
      if (!known_tol.count(name))
        throw std::invalid_argument("config: unknown tolerance " + name + " for " + to_string(c.id));
      c.tolerances[name] = parse_real(key, value);
    } else {
      throw std::invalid_argument("config: unknown key " + key);
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const io::fs::path& p, std::optional<ExperimentConfig> base) {
  return parse_config(io::read_text(p), std::move(base));
}

bool ExperimentReport::passed() const {
  return !criteria.empty() &&
         std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
}

bool ExperimentReport::within_budget() const {
  return std::all_of(timings.begin(), timings.end(), [](const Timing& t) { return t.within(); });
}

void ExperimentReport::check(const std::string& name, double value, double tolerance, const std::string& source,
                             bool pass, const std::string& message) {
  criteria.push_back({name, pass && std::isfinite(value), value, tolerance, source, message});
}

void ExperimentReport::fail(const std::string& name, const std::string& message) {
  criteria.push_back({name, false, std::nan(""), 0.0, "", message});
}

io::json report_json(const ExperimentReport& r) {
  io::json crit = io::json::array();
  for (const Criterion& c : r.criteria)
    crit.push_back({{"name", c.name},
                    {"pass", c.pass},
                    {"measured", c.measured},
                    {"tolerance", c.tolerance},
                    {"source", c.source},
                    {"message", c.message}});
  io::json expected = io::json::object();
  for (const auto& [k, e] : r.expected) expected[k] = {{"value", e.value}, {"source", e.source}};
  io::json rows = io::json::array();
  for (const auto& row : r.rows) rows.push_back(io::json(row));
  return {{"experiment", to_string(r.config.id)},
          {"config", r.config.to_json()},
          {"measured", r.measured},
          {"expected", expected},
          {"criteria", crit},
          {"pass", r.passed()},
          {"table", {{"columns", r.columns}, {"rows", rows}}}};
}

std::string report_csv(const ExperimentReport& r) {
  std::string out;
  for (size_t k = 0; k < r.columns.size(); ++k) out += (k ? "," : "") + r.columns[k];
  out += "\n";
  for (const auto& row : r.rows) {
    for (size_t k = 0; k < row.size(); ++k) out += (k ? "," : "") + csv_cell(row[k]);
    out += "\n";
  }
  return out;
}

io::fs::path emit_report(const ExperimentReport& r, ReportFormat format, const io::fs::path& dir) {
  const io::fs::path p = dir / (to_string(r.config.id) + (format == ReportFormat::Json ? ".json" : ".csv"));
  io::write_text(p, format == ReportFormat::Json ? io::dump(report_json(r)) : report_csv(r));
  return p;
}

}  // namespace symlab
