#pragma once

#include "symlab/alexander.hpp"
#include "symlab/graphical.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace symlab::io {

using json = nlohmann::json;  // std::map objects: keys come out sorted
namespace fs = std::filesystem;

// %.12e; non-finite values as nan, inf, -inf.
std::string format_real(double v);

// Sorted keys, two space indent, every float printed with format_real.
std::string dump(const json& j);

void write_text(const fs::path& p, const std::string& text);
std::string read_text(const fs::path& p);

// Grid CSV: a header line "n,spacing,origin_x,origin_y", its values, then one line per
// grid row j holding the values at i = 0..n.
std::string grid_csv(const GridField2D& f);
GridField2D parse_grid_csv(const std::string& text);

// name.csv plus the JSON envelope name.json.
void write_grid(const fs::path& dir, const std::string& name, const GridField2D& f);
GridField2D read_grid(const fs::path& dir, const std::string& name);

// name_x.csv, name_y.csv and name.json with support_radius, dt and n.
void write_plane_map(const fs::path& dir, const std::string& name, const PlaneMap& phi);
PlaneMap read_plane_map(const fs::path& dir, const std::string& name);

json to_json(const CalabiReport& r);
CalabiReport calabi_report_from_json(const json& j);

// name_a1.csv, name_a2.csv and name.json.
void write_one_form(const fs::path& dir, const std::string& name, const OneFormField& a);
OneFormField read_one_form(const fs::path& dir, const std::string& name);
void write_generating(const fs::path& dir, const std::string& name, const GeneratingFunction& g);

// [{"a": a_k, ...entry_k}] in parameter order.
json family_report(const std::vector<double>& a, const std::vector<json>& entries);

// member_000.csv ... plus manifest.json with parameters, normalization_value and tolerances.
void write_phase_family(const fs::path& dir, const PhaseFamily& fam, const json& tolerances = json::object());
PhaseFamily read_phase_family(const fs::path& dir);

// Columns a_i, cal, c0_dist, hofer_len.
std::string sequence_csv(const std::vector<SequenceMember>& seq);

}  // namespace symlab::io
