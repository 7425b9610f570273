#include "rtakit/cli.hpp"

#include "rtakit/output.hpp"
#include "rtakit/validation.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace rta {

namespace {

using nlohmann::json;

Vec json_vec(const json & j, const char * what)
{
  if (!j.is_array()) { throw UsageError(std::string("config: ") + what + " must be an array"); }
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) { v[static_cast<Eigen::Index>(i)] = j[i].get<double>(); }
  return v;
}

AlphaFunction parse_alpha(const json & j)
{
  AlphaFunction a;
  const std::string kind = j.value("kind", "linear");
  if (kind == "linear") { a.kind = AlphaKind::linear; }
  else if (kind == "cubic") { a.kind = AlphaKind::cubic; }
  else if (kind == "tanh") { a.kind = AlphaKind::tanh; }
  else { throw UsageError("config: unknown alpha kind '" + kind + "' (valid: linear, cubic, tanh)"); }
  a.gain = j.value("gain", 1.0);
  if (!(a.gain > 0.0)) { throw UsageError("config: alpha gain must be positive"); }
  return a;
}

LatchRule parse_latch(const json & j)
{
  LatchRule r;
  const std::string rule = j.is_string() ? j.get<std::string>() : j.value("rule", "instant");
  if (rule == "instant") { r.rule = ReleaseRule::instant; }
  else if (rule == "min_hold") {
    r.rule = ReleaseRule::min_hold;
    r.hold = j.is_object() ? j.value("hold", 1.0) : 1.0;
  } else {
    throw UsageError("config: unknown latch rule '" + rule + "' (valid: instant, min_hold)");
  }
  return r;
}

PrimaryController parse_primary(const json & j)
{
  const std::string kind = j.value("kind", "");
  if (kind == "constant") { return constant_primary(json_vec(j.at("value"), "primary.value")); }
  if (kind == "sinusoid") {
    return sinusoid_primary(json_vec(j.at("amplitude"), "primary.amplitude"), json_vec(j.at("frequency"), "primary.frequency"),
      json_vec(j.at("phase"), "primary.phase"));
  }
  if (kind == "linear") {
    const json & K = j.at("K");
    if (!K.is_array() || K.empty()) { throw UsageError("config: primary.K must be a nonempty array of rows"); }
    Mat M(static_cast<Eigen::Index>(K.size()), static_cast<Eigen::Index>(K[0].size()));
    for (std::size_t r = 0; r < K.size(); ++r) {
      const Vec row = json_vec(K[r], "primary.K row");
      if (row.size() != M.cols()) { throw UsageError("config: primary.K rows differ in length"); }
      M.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return linear_primary(M, json_vec(j.at("k0"), "primary.k0"));
  }
  throw UsageError("config: unknown primary kind '" + kind + "' (valid: constant, sinusoid, linear)");
}

}  // namespace

std::string load_config(const std::string & path, const std::string & scenario, ScenarioOverrides & ov)
{
  std::ifstream in(path);
  if (!in) { throw UsageError("cannot open config '" + path + "'"); }
  json j;
  try {
    j = json::parse(in);
    std::string id = j.value("scenario", scenario);
    if (id.empty()) { throw UsageError("config: no scenario given"); }
    const auto & info = scenario_info(id);
    if (j.contains("plant") && j["plant"].get<std::string>() != info.plant) {
      throw UsageError("config: plant '" + j["plant"].get<std::string>() + "' does not match scenario '" + id
                       + "' (plant " + info.plant + ")");
    }
    if (j.contains("params")) {
      for (const auto & [k, v] : j["params"].items()) { ov.params[k] = v.get<double>(); }
    }
    if (j.contains("x0")) { ov.x0 = json_vec(j["x0"], "x0"); }
    if (j.contains("primary")) { ov.primary = parse_primary(j["primary"]); }
    if (j.contains("duration")) { ov.duration = j["duration"].get<double>(); }
    if (j.contains("rate")) { ov.rate = j["rate"].get<double>(); }
    if (j.contains("seed")) { ov.seed = j["seed"].get<std::uint64_t>(); }
    if (j.contains("filter")) {
      const json & f = j["filter"];
      if (f.contains("kind")) { ov.filter = parse_filter_kind(f["kind"].get<std::string>()); }
      if (f.contains("alpha")) { ov.alpha = parse_alpha(f["alpha"]); }
      if (f.contains("horizon")) { ov.horizon = f["horizon"].get<double>(); }
      if (f.contains("dt_backup")) { ov.dt_backup = f["dt_backup"].get<double>(); }
      if (f.contains("epsilon1")) { ov.eps1 = f["epsilon1"].get<double>(); }
      if (f.contains("epsilon2")) { ov.eps2 = f["epsilon2"].get<double>(); }
      if (f.contains("barrier_buffer")) { ov.barrier_buffer = f["barrier_buffer"].get<double>(); }
      if (f.contains("latch")) { ov.latch = parse_latch(f["latch"]); }
    }
    return id;
  } catch (const json::exception & e) {
    throw UsageError(std::string("config '") + path + "': " + e.what());
  }
}

namespace {

std::uint64_t default_seed()
{
  const char * env = std::getenv("RTAKIT_SEED");
  if (env == nullptr || *env == '\0') { return 0; }
  char * end        = nullptr;
  const auto value  = std::strtoull(env, &end, 10);
  if (*end != '\0') { throw UsageError(std::string("RTAKIT_SEED is not an unsigned integer: '") + env + "'"); }
  return value;
}

struct RunFlags
{
  std::string scenario;
  std::string filter;
  std::string out;
  std::string format{"csv"};
  std::string config;
  std::optional<double> duration;
  std::optional<double> rate;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> params;
};

int cmd_run(const RunFlags & fl, std::ostream & out, std::ostream & err)
{
  ScenarioOverrides ov;
  std::string id = fl.scenario;
  if (!fl.config.empty()) { id = load_config(fl.config, fl.scenario, ov); }
  if (id.empty()) { throw UsageError("run: --scenario or a config naming the scenario is required"); }
  if (!fl.filter.empty()) { ov.filter = parse_filter_kind(fl.filter); }
  if (fl.duration) { ov.duration = *fl.duration; }
  if (fl.rate) { ov.rate = *fl.rate; }
  ov.seed = fl.seed ? *fl.seed : ov.seed.value_or(default_seed());
  for (const auto & kv : fl.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) { throw UsageError("--param expects key=value, got '" + kv + "'"); }
    char * end         = nullptr;
    const std::string v = kv.substr(eq + 1);
    const double value  = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0') { throw UsageError("--param value is not a number: '" + kv + "'"); }
    ov.params[kv.substr(0, eq)] = value;
  }
  if (fl.format != "csv" && fl.format != "json") { throw UsageError("--format must be csv or json"); }

  const auto cfg = make_scenario(id, ov);
  const auto res = run_closed_loop(cfg);

  std::ostringstream buf;
  if (fl.format == "csv") { write_csv(buf, res); }
  else { write_json(buf, res); }
  if (fl.out.empty()) { out << buf.str(); }
  else {
    std::ofstream f(fl.out, std::ios::binary);
    if (!f) { throw UsageError("cannot write '" + fl.out + "'"); }
    f << buf.str();
  }
  if (res.summary.violated) {
    err << "safety violation: min constraint margin " << format_double(res.summary.min_constraint_margin) << '\n';
    return kExitViolation;
  }
  return kExitOk;
}

int cmd_list(bool as_json, std::ostream & out)
{
  if (as_json) {
    json a = json::array();
    for (const auto & s : scenario_catalog()) {
      a.push_back({{"id", s.id}, {"plant", s.plant}, {"default_filter", to_string(s.default_filter)}});
    }
    out << a.dump(1) << '\n';
  } else {
    for (const auto & s : scenario_catalog()) { out << s.id << '\n'; }
  }
  return kExitOk;
}

int cmd_validate(const std::string & scenario, bool all, std::optional<std::uint64_t> seed, bool flip, std::ostream & out)
{
  if (scenario.empty() == !all) { throw UsageError("validate: give exactly one of --scenario or --all"); }
  std::vector<std::string> ids;
  if (all) {
    for (const auto & s : scenario_catalog()) { ids.push_back(s.id); }
  } else {
    ids.push_back(scenario_info(scenario).id);
  }
  const std::uint64_t s = seed ? *seed : default_seed();
  bool ok               = true;
  char line[512];
  for (const auto & id : ids) {
    const auto rep = validate_scenario(id, s, flip);
    for (const auto & c : rep.checks) {
      std::snprintf(line, sizeof(line), "%-28s %-22s %-4s %s\n", c.scenario.c_str(), c.name.c_str(), c.passed ? "PASS" : "FAIL",
        c.detail.c_str());
      out << line;
    }
    ok = ok && rep.passed();
  }
  return ok ? kExitOk : kExitViolation;
}

}  // namespace

int run_cli(int argc, const char * const * argv, std::ostream & out, std::ostream & err)
{
  CLI::App app{"rtakit: run-time assurance filters and scenarios"};
  app.require_subcommand(1);

  RunFlags run;
  auto * run_cmd = app.add_subcommand("run", "Run one scenario and emit the per-step records");
  run_cmd->add_option("--scenario", run.scenario, "Scenario id (see list-scenarios)");
  run_cmd->add_option("--filter", run.filter, "none|rbsf|sbsf|easif|iasif|rasif|mmasif");
  run_cmd->add_option("--out", run.out, "Output file (default stdout)");
  run_cmd->add_option("--format", run.format, "csv or json");
  run_cmd->add_option("--duration", run.duration, "Simulated seconds");
  run_cmd->add_option("--rate", run.rate, "Control rate in Hz");
  run_cmd->add_option("--seed", run.seed, "Seed (default RTAKIT_SEED or 0)");
  run_cmd->add_option("--param", run.params, "Plant parameter override key=value")->allow_extra_args(false);
  run_cmd->add_option("--config", run.config, "Scenario override JSON file");

  bool list_json = false;
  auto * list_cmd = app.add_subcommand("list-scenarios", "Print the registered scenario ids");
  list_cmd->add_flag("--json", list_json, "Emit {id, plant, default_filter} objects");

  std::string v_scenario;
  bool v_all = false;
  std::optional<std::uint64_t> v_seed;
  std::string v_fault;
  auto * val_cmd = app.add_subcommand("validate", "Run the invariant suites for scenarios");
  val_cmd->add_option("--scenario", v_scenario, "Scenario id");
  val_cmd->add_flag("--all", v_all, "Validate every scenario");
  val_cmd->add_option("--seed", v_seed, "Seed (default RTAKIT_SEED or 0)");
  val_cmd->add_option("--inject-fault", v_fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError & e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (run_cmd->parsed()) { return cmd_run(run, out, err); }
    if (list_cmd->parsed()) { return cmd_list(list_json, out); }
    if (!v_fault.empty() && v_fault != "barrier-sign") { throw UsageError("unknown fault '" + v_fault + "'"); }
    return cmd_validate(v_scenario, v_all, v_seed, v_fault == "barrier-sign", out);
  } catch (const UsageError & e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError & e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace rta
