#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "teamquant/errors.hpp"
#include "teamquant/evaluator.hpp"
#include "teamquant/experiments.hpp"
#include "teamquant/rng.hpp"

using namespace teamquant;
namespace fs = std::filesystem;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::InvalidParameter:
    case ErrorKind::TooLarge:
    case ErrorKind::UnsupportedKernel:
    case ErrorKind::UnsupportedVariance:
      return 2;
    case ErrorKind::NonFiniteValue:
    case ErrorKind::NonFiniteCost:
    case ErrorKind::Overflow:
      return 3;
    case ErrorKind::Io:
      return 1;
  }
  return 1;
}

std::string opt(const std::optional<double>& v, int digits = 6) {
  if (!v) return "-";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, *v);
  return buf;
}

void print_table(const std::vector<CostReport>& reports) {
  std::printf("%4s %7s %5s %6s %5s %12s %12s %12s %10s %12s %6s\n", "step", "radius", "n", "m", "k",
              "finite", "exact", "mc", "mc_ci", "oracle_gap", "sweeps");
  for (const auto& r : reports) {
    std::printf("%4zu %7g %5zu %6g %5zu %12.6f %12s %12.6f %10.6f %12s %6zu\n", r.step, r.radius, r.n,
                r.m, r.k, r.finite_cost, opt(r.exact_cost).c_str(), r.mc_cost, r.mc_half_ci95,
                opt(r.gap).c_str(), r.sweeps);
  }
}

ExperimentConfig load(const std::string& path, std::optional<std::size_t> threads) {
  ExperimentConfig cfg = load_config(path);
  apply_env_overrides(cfg);
  if (threads) cfg.threads = *threads;
  return cfg;
}

fs::path output_path(const ExperimentConfig& cfg, const std::string& ext) {
  return fs::path(cfg.output.dir) / (cfg.output.prefix + ext);
}

void write_outputs(const std::vector<CostReport>& reports, const ExperimentConfig& cfg) {
  if (cfg.output.csv) emit_report(reports, ReportFormat::Csv, output_path(cfg, ".csv"), cfg);
  if (cfg.output.json) emit_report(reports, ReportFormat::Json, output_path(cfg, ".json"), cfg);
  if (cfg.output.plotdata) {
    emit_report(reports, ReportFormat::PlotData, output_path(cfg, ".dat"), cfg);
  }
}

ReportFormat parse_format(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  return ReportFormat::PlotData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized finite-model solver for stochastic team problems"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::size_t> threads;

  auto* solve = app.add_subcommand("solve", "solve one finite model and write its policy");
  std::optional<std::size_t> step;
  std::string policy_out;
  solve->add_option("-c,--config", config_path, "experiment config")->required()->check(CLI::ExistingFile);
  solve->add_option("--step", step, "schedule step to solve (1-based, default last)")->check(CLI::PositiveNumber);
  solve->add_option("--policy-out", policy_out, "policy JSON path (default <dir>/<prefix>.policy.json)");
  solve->add_option("--threads", threads, "worker threads");

  auto* refine = app.add_subcommand("refine", "run the refinement schedule and write reports");
  refine->add_option("-c,--config", config_path, "experiment config")->required()->check(CLI::ExistingFile);
  refine->add_option("--threads", threads, "worker threads");

  auto* oracle = app.add_subcommand("oracle", "print reference values for a problem");
  std::string problem_type = "witsenhausen";
  double weight = 1.0, r = 0.1;
  oracle->add_option("-c,--config", config_path, "take the problem from a config")->check(CLI::ExistingFile);
  oracle->add_option("--problem", problem_type, "witsenhausen or radner")
      ->check(CLI::IsMember({"witsenhausen", "radner"}));
  oracle->add_option("--weight", weight, "Witsenhausen weight");
  oracle->add_option("--r", r, "Radner action penalty");

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a stored policy on the continuous problem");
  std::string policy_path;
  evaluate->add_option("-c,--config", config_path, "experiment config")->required()->check(CLI::ExistingFile);
  evaluate->add_option("-p,--policy", policy_path, "policy JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--threads", threads, "worker threads");

  auto* report = app.add_subcommand("report", "re-emit stored JSON reports");
  std::string input, format = "csv", output;
  report->add_option("-i,--input", input, "report JSON")->required()->check(CLI::ExistingFile);
  report->add_option("-f,--format", format, "csv, json or plotdata")
      ->check(CLI::IsMember({"csv", "json", "plotdata"}));
  report->add_option("-o,--output", output, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve) {
      const ExperimentConfig cfg = load(config_path, threads);
      const std::size_t index = step ? *step - 1 : cfg.schedule.steps.size() - 1;
      if (index >= cfg.schedule.steps.size()) {
        throw Error(ErrorKind::Config, "step " + std::to_string(index + 1) + " is outside the schedule");
      }
      const StepOutcome out = run_step(cfg, index);
      const auto fm = build_finite(make_problem(cfg.problem), out.quantizers, out.grids,
                                   cfg.evaluation.state_nodes);
      const fs::path path = policy_out.empty() ? output_path(cfg, ".policy.json") : fs::path(policy_out);
      write_file(path, policy_to_json(fm, out.table));
      print_table({out.report});
      std::printf("policy written to %s\n", path.string().c_str());
    } else if (*refine) {
      const ExperimentConfig cfg = load(config_path, threads);
      const auto reports = run_schedule(cfg);
      write_outputs(reports, cfg);
      print_table(reports);
      for (std::size_t s : exact_cost_increases(reports, 1e-6)) {
        std::printf("note: exact cost rose at step %zu (solver suboptimality)\n", s);
      }
    } else if (*oracle) {
      ProblemSpec spec = WitsenhausenSpec{weight};
      if (!config_path.empty()) {
        spec = load_config(config_path).problem;
      } else if (problem_type == "radner") {
        spec = RadnerSpec{r};
      }
      validate(spec);
      if (const auto* w = std::get_if<WitsenhausenSpec>(&spec)) {
        const auto o = affine_oracle_witsenhausen(w->weight);
        std::printf("witsenhausen weight=%g affine lambda=%.17g cost=%.17g\n", w->weight, o.lambda, o.cost);
      } else if (const auto* q = std::get_if<RadnerSpec>(&spec)) {
        const auto o = radner_oracle(q->r);
        std::printf("radner r=%g alpha=%.17g cost=%.17g\n", q->r, o.alpha, o.cost);
      } else {
        std::printf("relay: no analytic reference value\n");
      }
    } else if (*evaluate) {
      const ExperimentConfig cfg = load(config_path, threads);
      const StoredPolicy stored = policy_from_json(read_file(policy_path));
      const TeamProblem problem = make_problem(cfg.problem);
      const auto fm = build_finite(problem, stored.quantizers, stored.grids, cfg.evaluation.state_nodes);
      const QuantizedPolicy policy = extend_policy(stored.table, stored.quantizers);
      const auto exact = eval_exact(cfg.problem, policy);
      const std::size_t workers = cfg.threads > 0 ? cfg.threads : default_threads();
      const McEstimate mc = eval_cost_dynamic_mc(problem, policy.continuous(), cfg.evaluation.mc_samples,
                                                 cfg.evaluation.seed, workers);
      std::printf("finite_cost %.12f\nexact_cost %s\nmc_cost %.12f\nmc_ci %.12f\n",
                  eval_finite_cost(fm, stored.table), opt(exact, 12).c_str(),
                  mc.mean, mc.half_ci95);
      if (const auto o = oracle_value(cfg.problem); o && exact) std::printf("oracle_gap %.12f\n", *exact - *o);
    } else if (*report) {
      const StoredReports stored = reports_from_json(read_file(input));
      const ReportFormat f = parse_format(format);
      if (output.empty()) {
        if (f == ReportFormat::Csv) std::cout << reports_to_csv(stored.reports);
        else if (f == ReportFormat::Json) std::cout << reports_to_json(stored.reports, stored.config);
        else std::cout << reports_to_plotdata(stored.reports);
      } else {
        emit_report(stored.reports, f, output, stored.config);
      }
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "teamquant: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "teamquant: %s\n", e.what());
    return 1;
  }
  return 0;
}
