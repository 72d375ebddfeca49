#pragma once

#include "symlab/io.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace symlab {

enum class ExperimentId { E1, E2, E3, E4, E5, E6, E7, E8, E9, Baselines };

std::string to_string(ExperimentId id);
ExperimentId parse_experiment_id(const std::string& s);  // "E1".."E9", "B" or "baselines"
const std::vector<ExperimentId>& all_experiments();

enum class FamilyKind { RadialBump, ReparamLoop, MovingBump, Twist };

std::string to_string(FamilyKind k);
FamilyKind parse_family_kind(const std::string& s);

struct FamilySpec {
  FamilyKind kind = FamilyKind::RadialBump;
  double amplitude = 1.0;
  double radius = 0.8;
  double rho = 0.0;  // moving_bump orbit radius; reparam_loop center offset along q
  int order = 4;     // bump exponent k, smoothness k - 1

  ScalarTimeField build() const;
  std::string label() const;
  io::json to_json() const;
};

struct ExperimentConfig {
  ExperimentId id = ExperimentId::E1;
  int grid_n = 256;
  double dt = 1e-3;
  double h_a = 0.125;
  std::optional<FamilySpec> family;  // empty: the experiment's built-in set
  std::map<std::string, double> tolerances;
  std::string output_path = "reports";
  std::uint64_t seed = 2024;  // std::mt19937_64
  int samples = 10000;        // random matrices for E6
  double budget = 0;          // runtime budget in seconds (per family for E1)

  void validate() const;
  io::json to_json() const;
};

ExperimentConfig default_config(ExperimentId id);
// "key = value" lines; '#' starts a comment; unknown keys throw.
ExperimentConfig parse_config(const std::string& text, std::optional<ExperimentConfig> base = {});
ExperimentConfig load_config(const io::fs::path& p, std::optional<ExperimentConfig> base = {});

// How an expected value is known: "exact" (holds by construction), "published" (a formula
// or theorem of the source theory), "derived" (an independent numerical oracle).
struct Expected {
  double value = 0;
  std::string source;
};

struct Criterion {
  std::string name;
  bool pass = false;
  double measured = 0;
  double tolerance = 0;
  std::string source;
  std::string message;
};

struct Timing {
  std::string label;
  double seconds = 0;
  double budget = 0;
  bool within() const { return seconds < budget; }
};

struct ExperimentReport {
  ExperimentConfig config;
  std::map<std::string, double> measured;
  std::map<std::string, Expected> expected;
  std::vector<Criterion> criteria;
  std::vector<std::string> columns;
  std::vector<std::vector<io::json>> rows;  // one per family member, columns fixed per experiment
  std::vector<Timing> timings;              // not part of the emitted bytes
  double runtime = 0;

  bool passed() const;       // every criterion
  bool within_budget() const;
  void check(const std::string& name, double measured, double tolerance, const std::string& source,
             bool pass, const std::string& message = "");
  void fail(const std::string& name, const std::string& message);
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

enum class ReportFormat { Json, Csv };
io::json report_json(const ExperimentReport& r);
std::string report_csv(const ExperimentReport& r);
// Writes <dir>/<ID>.json or <ID>.csv and returns the path.
io::fs::path emit_report(const ExperimentReport& r, ReportFormat format, const io::fs::path& dir);

}  // namespace symlab
