#include "rtakit/output.hpp"

#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace rta {

std::string format_double(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_header(int n, int m)
{
  std::string h = "t";
  for (int i = 0; i < n; ++i) { h += ",x" + std::to_string(i); }
  for (int i = 0; i < m; ++i) { h += ",ud" + std::to_string(i); }
  for (int i = 0; i < m; ++i) { h += ",ua" + std::to_string(i); }
  return h + ",intervened,margin,mode";
}

namespace {

void summary_lines(std::ostream & os, const RunResult & run)
{
  const auto & s = run.summary;
  os << "# scenario=" << run.scenario << '\n';
  os << "# steps=" << s.steps << '\n';
  os << "# activation_steps=" << s.activation_steps << '\n';
  os << "# activation_seconds=" << format_double(s.activation_seconds) << '\n';
  os << "# control_deviation=" << format_double(s.control_deviation) << '\n';
  os << "# min_constraint_margin=" << format_double(s.min_constraint_margin) << '\n';
  os << "# min_safe_margin=" << format_double(s.min_safe_margin) << '\n';
  os << "# first_intervention_time=" << format_double(s.first_intervention_time) << '\n';
  os << "# first_intervention_margin=" << format_double(s.first_intervention_margin) << '\n';
  os << "# first_violation_time=" << format_double(s.first_violation_time) << '\n';
  os << "# max_input_jump=" << format_double(s.max_input_jump) << '\n';
  os << "# blew_up=" << (s.blew_up ? 1 : 0) << '\n';
  os << "# violated=" << (s.violated ? 1 : 0) << '\n';
  if (!run.diagnostic.empty()) { os << "# diagnostic=" << run.diagnostic << '\n'; }
}

}  // namespace

void write_csv(std::ostream & os, const RunResult & run)
{
  const int n = run.records.empty() ? static_cast<int>(run.fine.states.empty() ? 0 : run.fine.states.front().size())
                                    : static_cast<int>(run.records.front().x.size());
  const int m = run.records.empty() ? 0 : static_cast<int>(run.records.front().u_act.size());
  os << csv_header(n, m) << '\n';
  for (const auto & r : run.records) {
    os << format_double(r.t);
    for (Eigen::Index i = 0; i < r.x.size(); ++i) { os << ',' << format_double(r.x[i]); }
    for (Eigen::Index i = 0; i < r.u_des.size(); ++i) { os << ',' << format_double(r.u_des[i]); }
    for (Eigen::Index i = 0; i < r.u_act.size(); ++i) { os << ',' << format_double(r.u_act[i]); }
    os << ',' << (r.intervened ? 1 : 0) << ',' << format_double(r.margin) << ',' << to_string(r.mode) << '\n';
  }
  summary_lines(os, run);
}

void write_json(std::ostream & os, const RunResult & run)
{
  using nlohmann::json;
  const auto vec = [](const Vec & v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) { a.push_back(v[i]); }
    return a;
  };
  json records = json::array();
  for (const auto & r : run.records) {
    records.push_back({{"t", r.t}, {"x", vec(r.x)}, {"u_des", vec(r.u_des)}, {"u_act", vec(r.u_act)},
      {"intervened", r.intervened}, {"margin", r.margin}, {"mode", to_string(r.mode)}});
  }
  const auto & s = run.summary;
  json summary{{"steps", s.steps}, {"activation_steps", s.activation_steps}, {"activation_seconds", s.activation_seconds},
    {"control_deviation", s.control_deviation}, {"min_constraint_margin", s.min_constraint_margin},
    {"min_safe_margin", s.min_safe_margin}, {"first_intervention_time", s.first_intervention_time},
    {"first_intervention_margin", s.first_intervention_margin}, {"first_violation_time", s.first_violation_time},
    {"max_input_jump", s.max_input_jump}, {"blew_up", s.blew_up}, {"violated", s.violated}};
  json doc{{"scenario", run.scenario}, {"records", records}, {"summary", summary}};
  if (!run.diagnostic.empty()) { doc["diagnostic"] = run.diagnostic; }
  os << doc.dump(1) << '\n';
}

CsvTable parse_csv(std::istream & is)
{
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) { throw UsageError("parse_csv: empty input"); }
  {
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) { t.columns.push_back(col); }
  }
  if (t.columns.size() < 4 || t.columns.back() != "mode") { throw UsageError("parse_csv: bad header"); }
  const std::size_t numeric = t.columns.size() - 1;
  while (std::getline(is, line)) {
    if (line.rfind("# ", 0) == 0) {
      t.summary.push_back(line.substr(2));
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    for (std::size_t i = 0; i < numeric; ++i) {
      if (!std::getline(ss, cell, ',')) { throw UsageError("parse_csv: short row"); }
      char * end = nullptr;
      row.push_back(std::strtod(cell.c_str(), &end));
      if (end == cell.c_str() || *end != '\0') { throw UsageError("parse_csv: bad number '" + cell + "'"); }
    }
    if (!std::getline(ss, cell)) { throw UsageError("parse_csv: missing mode"); }
    t.rows.push_back(std::move(row));
    t.modes.push_back(cell);
  }
  return t;
}

}  // namespace rta
