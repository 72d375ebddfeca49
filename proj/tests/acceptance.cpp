// Runs every experiment with its default configuration and prints one line per criterion.
#include "symlab/lab.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace symlab;

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  std::string out = "acceptance_reports";
  std::vector<std::string> only;
  app.add_option("--out", out, "report directory");
  app.add_option("--only", only, "subset of experiment ids");
  CLI11_PARSE(app, argc, argv);

  std::vector<ExperimentId> ids;
  if (only.empty()) ids = all_experiments();
  for (const std::string& s : only) ids.push_back(parse_experiment_id(s));

  int failed = 0, total = 0;
  for (ExperimentId id : ids) {
    const ExperimentReport r = run_experiment(default_config(id));
    emit_report(r, ReportFormat::Json, out);
    const std::string tag = to_string(id);
    for (const Criterion& c : r.criteria) {
      ++total;
      failed += !c.pass;
      std::printf("%s %-3s %-48s measured %s tol %s [%s]%s\n", c.pass ? "PASS" : "FAIL", tag.c_str(), c.name.c_str(),
                  io::format_real(c.measured).c_str(), io::format_real(c.tolerance).c_str(), c.source.c_str(),
                  c.message.empty() ? "" : (" " + c.message).c_str());
    }
    for (const Timing& t : r.timings) {
      ++total;
      failed += !t.within();
      std::printf("%s %-3s budget %-41s %.1fs of %.0fs\n", t.within() ? "PASS" : "FAIL", tag.c_str(), t.label.c_str(),
                  t.seconds, t.budget);
    }
    std::fflush(stdout);
  }
  std::printf("%d of %d checks passed\n", total - failed, total);
  return failed == 0 ? 0 : 1;
}
