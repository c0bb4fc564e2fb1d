#include "teamquant/experiments.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "teamquant/errors.hpp"
#include "teamquant/solver.hpp"

namespace teamquant {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::Config, what); }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    config_error("key '" + key + "': expected a number, got '" + raw + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    config_error("key '" + key + "': expected a nonnegative integer, got '" + raw + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true") return true;
  if (s == "false") return false;
  config_error("key '" + key + "': expected true or false, got '" + raw + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  std::string text = raw;
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream in(text);
  std::string token;
  while (in >> token) out.push_back(parse_double(key, token));
  return out;
}

// Section view that records which keys were consumed so leftovers can be
// reported as unknown.
class Section {
 public:
  Section(std::string name, const boost::property_tree::ptree* tree)
      : name_(std::move(name)), tree_(tree) {}

  const std::string* get(const std::string& key) {
    used_.insert(key);
    if (!tree_) return nullptr;
    const auto child = tree_->get_child_optional(key);
    if (!child) return nullptr;
    return &child->data();
  }

  std::string qualified(const std::string& key) const { return name_ + "." + key; }

  void finish() const {
    if (!tree_) return;
    for (const auto& [key, value] : *tree_) {
      if (!used_.count(key)) config_error("unknown key '" + qualified(key) + "'");
    }
  }

 private:
  std::string name_;
  const boost::property_tree::ptree* tree_;
  std::set<std::string> used_;
};

template <typename T, typename Parse>
void read(Section& s, const std::string& key, T& target, Parse parse) {
  if (const std::string* raw = s.get(key)) target = parse(s.qualified(key), *raw);
}

ProblemSpec parse_problem(Section& s) {
  const std::string* type = s.get("type");
  if (!type) config_error("missing key 'problem.type'");
  const std::string t = trim(*type);
  if (t == "witsenhausen") {
    WitsenhausenSpec spec;
    read(s, "weight", spec.weight, parse_double);
    return spec;
  }
  if (t == "relay") {
    RelaySpec spec;
    std::uint64_t agents = spec.num_agents;
    read(s, "agents", agents, parse_uint);
    spec.num_agents = agents;
    spec.weights.assign(agents > 0 ? agents - 1 : 0, 0.1);
    read(s, "weights", spec.weights, parse_list);
    read(s, "state_sd", spec.state_sd, parse_double);
    read(s, "noise_sd", spec.noise_sd, parse_double);
    return spec;
  }
  if (t == "radner") {
    RadnerSpec spec;
    read(s, "r", spec.r, parse_double);
    return spec;
  }
  config_error("unknown problem type '" + t + "'");
}

RefinementSchedule parse_schedule(Section& s) {
  RefinementSchedule schedule = default_schedule();
  std::string preset = "default";
  read(s, "preset", preset, [](const std::string&, const std::string& raw) { return trim(raw); });
  const std::string* steps = s.get("steps");
  if (steps) {
    schedule.steps.clear();
    std::istringstream in(*steps);
    std::string chunk;
    while (std::getline(in, chunk, ';')) {
      if (trim(chunk).empty()) continue;
      const auto values = parse_list(s.qualified("steps"), chunk);
      if (values.size() != 4) config_error("each schedule step needs 'radius n m k'");
      auto as_count = [&](double v) {
        if (v < 1.0 || v != std::floor(v)) config_error("schedule n and k must be positive integers");
        return static_cast<std::size_t>(v);
      };
      schedule.steps.push_back({values[0], as_count(values[1]), values[2], as_count(values[3])});
    }
  } else if (preset != "default") {
    config_error("unknown schedule preset '" + preset + "'");
  }
  read(s, "nested", schedule.nested, parse_bool);
  return schedule;
}

std::string exhaustive_name(ExhaustiveMode m) {
  switch (m) {
    case ExhaustiveMode::Auto: return "auto";
    case ExhaustiveMode::Never: return "never";
    case ExhaustiveMode::Always: return "always";
  }
  return "auto";
}

std::string schedule_text(const RefinementSchedule& schedule) {
  std::string out;
  for (std::size_t i = 0; i < schedule.steps.size(); ++i) {
    const auto& st = schedule.steps[i];
    if (i) out += "; ";
    out += format_double(st.radius) + " " + std::to_string(st.n) + " " + format_double(st.m) +
           " " + std::to_string(st.k);
  }
  return out;
}

bool near_integer(double v) { return std::abs(v - std::round(v)) < 1e-9 * std::max(1.0, std::abs(v)); }

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> optional_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::string csv_optional(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::size_t resolve_threads(const ExperimentConfig& cfg) {
  return cfg.threads > 0 ? cfg.threads : default_threads();
}

// Table for the refined model that reproduces `prev` as a continuous policy
// where possible, snapped to the new grids.
PolicyTable embed(const StepOutcome& prev, const FiniteTeamModel& fm) {
  const QuantizedPolicy old = extend_policy(prev.table, prev.quantizers);
  PolicyTable t;
  for (std::size_t i = 0; i < fm.num_agents(); ++i) {
    const AgentSymbols& a = fm.agents[i];
    std::vector<double> row(a.symbol_count());
    for (std::size_t s = 0; s < row.size(); ++s) {
      // Overflow of the new model lies inside the old overflow region.
      const double y = s == 0 ? a.quantizer.radius() : a.levels[s];
      row[s] = a.grid.nearest(old.act(i, y));
    }
    t.actions.push_back(std::move(row));
  }
  return t;
}

}  // namespace

void RefinementSchedule::validate() const {
  if (steps.empty()) config_error("schedule has no steps");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    if (!(s.radius > 0.0) || !(s.m > 0.0) || s.n == 0 || s.k == 0) {
      config_error("schedule step " + std::to_string(i + 1) + " has a nonpositive parameter");
    }
    if (!nested || i == 0) continue;
    const auto& p = steps[i - 1];
    const double tau_prev = 2.0 * p.radius / static_cast<double>(p.n);
    const double tau = 2.0 * s.radius / static_cast<double>(s.n);
    const std::string where = "schedule step " + std::to_string(i + 1);
    if (s.radius < p.radius || s.m < p.m) config_error(where + " shrinks radius or m");
    if (!near_integer(tau_prev / tau) || !near_integer((s.radius - p.radius) / tau)) {
      config_error(where + " does not refine the previous observation partition");
    }
    const ActionGrid prev_grid(p.m, p.k, true), grid(s.m, s.k, true);
    for (double u : prev_grid.points()) {
      if (std::abs(grid.nearest(u) - u) > 1e-12) {
        config_error(where + " action grid does not contain the previous grid");
      }
    }
  }
}

RefinementSchedule default_schedule() {
  return {{{1.0, 4, 1.0, 5}, {2.0, 8, 2.0, 9}, {4.0, 16, 2.0, 17}, {4.0, 32, 2.0, 33},
           {8.0, 64, 2.0, 65}},
          true};
}

ExperimentConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    config_error(std::string("malformed config: ") + e.message() + " (line " +
                 std::to_string(e.line()) + ")");
  }
  static const std::set<std::string> kSections{"problem", "schedule", "solver",
                                               "evaluation", "output", "run"};
  for (const auto& [name, child] : tree) {
    if (!kSections.count(name)) config_error("unknown section '" + name + "'");
    if (child.empty() && !child.data().empty()) {
      config_error("key '" + name + "' outside of a section");
    }
  }
  auto section = [&](const std::string& name) {
    const auto child = tree.get_child_optional(name);
    return Section(name, child ? &*child : nullptr);
  };

  ExperimentConfig cfg;
  Section problem = section("problem");
  if (!tree.get_child_optional("problem")) config_error("missing section [problem]");
  cfg.problem = parse_problem(problem);
  problem.finish();
  try {
    validate(cfg.problem);
  } catch (const Error& e) {
    config_error(e.what());
  }

  Section schedule = section("schedule");
  cfg.schedule = parse_schedule(schedule);
  schedule.finish();
  cfg.schedule.validate();

  Section solver = section("solver");
  std::uint64_t starts = cfg.solver.starts, sweeps = cfg.solver.max_sweeps;
  read(solver, "starts", starts, parse_uint);
  read(solver, "tol", cfg.solver.tol, parse_double);
  read(solver, "max_sweeps", sweeps, parse_uint);
  read(solver, "seed", cfg.solver.seed, parse_uint);
  read(solver, "warm_start", cfg.solver.warm_start, parse_bool);
  read(solver, "exhaustive_limit", cfg.solver.exhaustive_limit, parse_uint);
  std::string mode = exhaustive_name(cfg.solver.exhaustive);
  read(solver, "exhaustive", mode, [](const std::string&, const std::string& raw) { return trim(raw); });
  if (mode == "auto") cfg.solver.exhaustive = ExhaustiveMode::Auto;
  else if (mode == "never") cfg.solver.exhaustive = ExhaustiveMode::Never;
  else if (mode == "always") cfg.solver.exhaustive = ExhaustiveMode::Always;
  else config_error("solver.exhaustive must be auto, never or always");
  solver.finish();
  if (starts == 0 || sweeps == 0 || !(cfg.solver.tol > 0.0)) {
    config_error("solver starts, max_sweeps and tol must be positive");
  }
  cfg.solver.starts = starts;
  cfg.solver.max_sweeps = sweeps;

  Section evaluation = section("evaluation");
  std::uint64_t samples = cfg.evaluation.mc_samples, nodes = cfg.evaluation.state_nodes;
  read(evaluation, "mc_samples", samples, parse_uint);
  read(evaluation, "seed", cfg.evaluation.seed, parse_uint);
  read(evaluation, "state_nodes", nodes, parse_uint);
  evaluation.finish();
  if (samples < 2) config_error("evaluation.mc_samples must be >= 2");
  if (nodes == 0 || nodes > 256) config_error("evaluation.state_nodes must be in [1, 256]");
  cfg.evaluation.mc_samples = samples;
  cfg.evaluation.state_nodes = nodes;

  Section output = section("output");
  auto as_string = [](const std::string&, const std::string& raw) { return trim(raw); };
  read(output, "dir", cfg.output.dir, as_string);
  read(output, "prefix", cfg.output.prefix, as_string);
  read(output, "csv", cfg.output.csv, parse_bool);
  read(output, "json", cfg.output.json, parse_bool);
  read(output, "plotdata", cfg.output.plotdata, parse_bool);
  read(output, "record_timing", cfg.output.record_timing, parse_bool);
  output.finish();

  Section run = section("run");
  std::uint64_t threads = 0;
  read(run, "threads", threads, parse_uint);
  run.finish();
  cfg.threads = threads;
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

std::string config_to_ini(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[problem]\n";
  if (const auto* w = std::get_if<WitsenhausenSpec>(&cfg.problem)) {
    out << "type = witsenhausen\nweight = " << format_double(w->weight) << "\n";
  } else if (const auto* r = std::get_if<RelaySpec>(&cfg.problem)) {
    out << "type = relay\nagents = " << r->num_agents << "\nweights =";
    for (double l : r->weights) out << " " << format_double(l);
    out << "\nstate_sd = " << format_double(r->state_sd)
        << "\nnoise_sd = " << format_double(r->noise_sd) << "\n";
  } else {
    out << "type = radner\nr = " << format_double(std::get<RadnerSpec>(cfg.problem).r) << "\n";
  }
  out << "\n[schedule]\nnested = " << (cfg.schedule.nested ? "true" : "false")
      << "\nsteps = " << schedule_text(cfg.schedule) << "\n";
  out << "\n[solver]\nstarts = " << cfg.solver.starts << "\ntol = " << format_double(cfg.solver.tol)
      << "\nmax_sweeps = " << cfg.solver.max_sweeps << "\nseed = " << cfg.solver.seed
      << "\nwarm_start = " << (cfg.solver.warm_start ? "true" : "false")
      << "\nexhaustive = " << exhaustive_name(cfg.solver.exhaustive)
      << "\nexhaustive_limit = " << cfg.solver.exhaustive_limit << "\n";
  out << "\n[evaluation]\nmc_samples = " << cfg.evaluation.mc_samples
      << "\nseed = " << cfg.evaluation.seed << "\nstate_nodes = " << cfg.evaluation.state_nodes
      << "\n";
  auto flag = [](bool b) { return b ? "true" : "false"; };
  out << "\n[output]\ndir = " << cfg.output.dir << "\nprefix = " << cfg.output.prefix
      << "\ncsv = " << flag(cfg.output.csv) << "\njson = " << flag(cfg.output.json)
      << "\nplotdata = " << flag(cfg.output.plotdata)
      << "\nrecord_timing = " << flag(cfg.output.record_timing) << "\n";
  out << "\n[run]\nthreads = " << cfg.threads << "\n";
  return out.str();
}

void apply_env_overrides(ExperimentConfig& cfg) {
  if (const char* dir = std::getenv("TEAMQUANT_OUTPUT_DIR"); dir && *dir) cfg.output.dir = dir;
  if (const char* threads = std::getenv("TEAMQUANT_THREADS"); threads && *threads) {
    cfg.threads = parse_uint("TEAMQUANT_THREADS", threads);
  }
}

StepOutcome run_step(const ExperimentConfig& cfg, std::size_t index, const StepOutcome* warm) {
  const auto started = std::chrono::steady_clock::now();
  const ScheduleStep& step = cfg.schedule.steps.at(index);
  const TeamProblem problem = make_problem(cfg.problem);
  const std::size_t threads = resolve_threads(cfg);

  StepOutcome out;
  for (std::size_t i = 0; i < problem.num_agents; ++i) {
    out.quantizers.emplace_back(step.radius, step.n);
    out.grids.emplace_back(step.m, step.k, cfg.schedule.nested);
  }
  const FiniteTeamModel fm =
      build_finite(problem, out.quantizers, out.grids, cfg.evaluation.state_nodes);

  CostReport& report = out.report;
  report.step = index + 1;
  report.radius = step.radius;
  report.n = step.n;
  report.m = step.m;
  report.k = step.k;

  bool exhaustive = false;
  if (cfg.solver.exhaustive == ExhaustiveMode::Always) {
    exhaustive = true;
  } else if (cfg.solver.exhaustive == ExhaustiveMode::Auto) {
    try {
      exhaustive = PolicyEnumerator(fm, cfg.solver.exhaustive_limit).count() > 0;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::TooLarge) throw;
    }
  }
  if (exhaustive) {
    const ExhaustiveResult r = exhaustive_solve(fm);
    out.table = r.table;
    report.finite_cost = r.cost;
    report.solver = "exhaustive";
  } else {
    std::vector<PolicyTable> extra;
    if (warm && cfg.solver.warm_start) extra.push_back(embed(*warm, fm));
    const MultiStartResult r = multi_start_solve(fm, cfg.solver.starts, cfg.solver.seed,
                                                 cfg.solver.max_sweeps, cfg.solver.tol, threads,
                                                 extra);
    out.table = r.table;
    report.finite_cost = r.cost;
    report.solver = "multistart";
    report.sweeps = r.traces[r.best_start].sweeps();
  }

  const QuantizedPolicy policy = extend_policy(out.table, out.quantizers);
  report.exact_cost = eval_exact(cfg.problem, policy);
  const McEstimate mc = eval_cost_dynamic_mc(problem, policy.continuous(),
                                             cfg.evaluation.mc_samples,
                                             stream_seed(cfg.evaluation.seed, index), threads);
  report.mc_cost = mc.mean;
  report.mc_half_ci95 = mc.half_ci95;
  report.oracle = oracle_value(cfg.problem);
  if (report.exact_cost) {
    report.finite_gap = std::abs(report.finite_cost - *report.exact_cost);
    if (report.oracle) report.gap = *report.exact_cost - *report.oracle;
  }
  if (cfg.output.record_timing) {
    report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                               started)
                         .count();
  }
  return out;
}

std::vector<StepOutcome> run_schedule_detailed(const ExperimentConfig& cfg) {
  cfg.schedule.validate();
  validate(cfg.problem);
  std::vector<StepOutcome> out;
  for (std::size_t i = 0; i < cfg.schedule.steps.size(); ++i) {
    try {
      out.push_back(run_step(cfg, i, out.empty() ? nullptr : &out.back()));
    } catch (const Error& e) {
      throw Error(e.kind(), "schedule step " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

std::vector<CostReport> run_schedule(const ExperimentConfig& cfg) {
  std::vector<CostReport> reports;
  for (auto& s : run_schedule_detailed(cfg)) reports.push_back(std::move(s.report));
  return reports;
}

std::vector<std::size_t> exact_cost_increases(const std::vector<CostReport>& reports, double tol) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].exact_cost && reports[i - 1].exact_cost &&
        *reports[i].exact_cost > *reports[i - 1].exact_cost + tol) {
      out.push_back(reports[i].step);
    }
  }
  return out;
}

std::string reports_to_csv(const std::vector<CostReport>& reports) {
  std::string out =
      "step,radius,n,m,k,finite_cost,exact_cost,mc_cost,mc_ci,oracle_gap,sweeps,wall_ms\r\n";
  for (const auto& r : reports) {
    out += std::to_string(r.step) + "," + format_double(r.radius) + "," + std::to_string(r.n) +
           "," + format_double(r.m) + "," + std::to_string(r.k) + "," +
           format_double(r.finite_cost) + "," + csv_optional(r.exact_cost) + "," +
           format_double(r.mc_cost) + "," + format_double(r.mc_half_ci95) + "," +
           csv_optional(r.gap) + "," + std::to_string(r.sweeps) + "," + csv_optional(r.wall_ms) +
           "\r\n";
  }
  return out;
}

namespace {

// Thread count is left out so reports do not depend on it.
Json config_json(ExperimentConfig cfg) {
  cfg.threads = 0;
  Json j;
  j["problem"] = problem_name(cfg.problem);
  j["ini"] = config_to_ini(cfg);
  return j;
}

}  // namespace

std::string reports_to_json(const std::vector<CostReport>& reports, const ExperimentConfig& cfg) {
  Json doc;
  doc["format"] = "teamquant.report.v1";
  doc["config"] = config_json(cfg);
  Json list = Json::array();
  for (const auto& r : reports) {
    Json j;
    j["step"] = r.step;
    j["radius"] = r.radius;
    j["n"] = r.n;
    j["m"] = r.m;
    j["k"] = r.k;
    j["finite_cost"] = r.finite_cost;
    j["exact_cost"] = optional_json(r.exact_cost);
    j["mc_cost"] = r.mc_cost;
    j["mc_half_ci95"] = r.mc_half_ci95;
    j["oracle"] = optional_json(r.oracle);
    j["gap"] = optional_json(r.gap);
    j["finite_gap"] = optional_json(r.finite_gap);
    j["solver"] = r.solver;
    j["sweeps"] = r.sweeps;
    j["wall_ms"] = optional_json(r.wall_ms);
    list.push_back(std::move(j));
  }
  doc["reports"] = std::move(list);
  return doc.dump(2) + "\n";
}

StoredReports reports_from_json(const std::string& text) {
  StoredReports out;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("format").get<std::string>() != "teamquant.report.v1") {
      config_error("unknown report format");
    }
    out.config = parse_config(doc.at("config").at("ini").get<std::string>());
    for (const auto& j : doc.at("reports")) {
      CostReport r;
      r.step = j.at("step").get<std::size_t>();
      r.radius = j.at("radius").get<double>();
      r.n = j.at("n").get<std::size_t>();
      r.m = j.at("m").get<double>();
      r.k = j.at("k").get<std::size_t>();
      r.finite_cost = j.at("finite_cost").get<double>();
      r.exact_cost = optional_from(j.at("exact_cost"));
      r.mc_cost = j.at("mc_cost").get<double>();
      r.mc_half_ci95 = j.at("mc_half_ci95").get<double>();
      r.oracle = optional_from(j.at("oracle"));
      r.gap = optional_from(j.at("gap"));
      r.finite_gap = optional_from(j.at("finite_gap"));
      r.solver = j.at("solver").get<std::string>();
      r.sweeps = j.at("sweeps").get<std::size_t>();
      r.wall_ms = optional_from(j.at("wall_ms"));
      out.reports.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("malformed report JSON: ") + e.what());
  }
  return out;
}

std::string reports_to_plotdata(const std::vector<CostReport>& reports) {
  std::string out;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out += std::to_string(i + 1) + " " + (r.exact_cost ? format_double(*r.exact_cost) : "nan") +
           "\n";
  }
  return out;
}

void emit_report(const std::vector<CostReport>& reports, ReportFormat format,
                 const std::filesystem::path& path, const ExperimentConfig& cfg) {
  if (reports.empty()) throw Error(ErrorKind::InvalidParameter, "no reports to emit");
  switch (format) {
    case ReportFormat::Csv: write_file(path, reports_to_csv(reports)); break;
    case ReportFormat::Json: write_file(path, reports_to_json(reports, cfg)); break;
    case ReportFormat::PlotData: write_file(path, reports_to_plotdata(reports)); break;
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << contents;
  out.close();
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

}  // namespace teamquant
