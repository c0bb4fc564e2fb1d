#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "teamquant/evaluator.hpp"
#include "teamquant/problems.hpp"

namespace teamquant {

struct ScheduleStep {
  double radius = 1.0;  ///< observation quantizer covers [-radius, radius)
  std::size_t n = 1;    ///< observation cells
  double m = 1.0;       ///< action grid covers [-m, m]
  std::size_t k = 1;    ///< requested action points

  bool operator==(const ScheduleStep&) const = default;
};

struct RefinementSchedule {
  std::vector<ScheduleStep> steps;
  bool nested = true;

  /// Throws Config if empty, or if `nested` and some step does not refine the
  /// previous observation partition and contain the previous action grid.
  void validate() const;
  bool operator==(const RefinementSchedule&) const = default;
};

/// Radii {1, 2, 4, 4, 8}, n {4, 8, 16, 32, 64}, m {1, 2, 2, 2, 2}, dyadic k
/// up to 65 points.
RefinementSchedule default_schedule();

enum class ExhaustiveMode { Auto, Never, Always };

struct SolverSettings {
  std::size_t starts = 16;
  double tol = 1e-10;
  std::size_t max_sweeps = 500;
  std::uint64_t seed = 1;
  bool warm_start = true;
  ExhaustiveMode exhaustive = ExhaustiveMode::Auto;
  std::uint64_t exhaustive_limit = 100'000;  ///< Auto: exhaustive when tables <= limit

  bool operator==(const SolverSettings&) const = default;
};

struct EvaluationSettings {
  std::size_t mc_samples = 200'000;
  std::uint64_t seed = 7;
  std::size_t state_nodes = 64;

  bool operator==(const EvaluationSettings&) const = default;
};

struct OutputSettings {
  std::string dir = ".";
  std::string prefix = "teamquant";
  bool csv = true;
  bool json = true;
  bool plotdata = true;
  bool record_timing = false;  ///< wall_ms is left empty unless enabled

  bool operator==(const OutputSettings&) const = default;
};

struct ExperimentConfig {
  ProblemSpec problem = WitsenhausenSpec{};
  RefinementSchedule schedule = default_schedule();
  SolverSettings solver;
  EvaluationSettings evaluation;
  OutputSettings output;
  std::size_t threads = 0;  ///< 0: TEAMQUANT_THREADS or hardware concurrency

  bool operator==(const ExperimentConfig&) const = default;
};

/// INI-style text: [problem], [schedule], [solver], [evaluation], [output],
/// [run]. Unknown sections or keys are Config errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_ini(const ExperimentConfig& cfg);

/// TEAMQUANT_OUTPUT_DIR replaces output.dir; TEAMQUANT_THREADS replaces threads.
void apply_env_overrides(ExperimentConfig& cfg);

struct StepOutcome {
  CostReport report;
  PolicyTable table;
  std::vector<Quantizer> quantizers;
  std::vector<ActionGrid> grids;
};

/// Build, solve, extend, evaluate each schedule step in order. A failing step
/// rethrows with the step number in the message.
std::vector<StepOutcome> run_schedule_detailed(const ExperimentConfig& cfg);
std::vector<CostReport> run_schedule(const ExperimentConfig& cfg);

/// Finite model and solve for a single step (warm start from `warm` if given).
StepOutcome run_step(const ExperimentConfig& cfg, std::size_t index,
                     const StepOutcome* warm = nullptr);

/// Steps whose exact cost exceeds the previous step's by more than tol.
std::vector<std::size_t> exact_cost_increases(const std::vector<CostReport>& reports, double tol);

enum class ReportFormat { Csv, Json, PlotData };

std::string reports_to_csv(const std::vector<CostReport>& reports);
/// The echoed config omits the thread count.
std::string reports_to_json(const std::vector<CostReport>& reports, const ExperimentConfig& cfg);
std::string reports_to_plotdata(const std::vector<CostReport>& reports);

struct StoredReports {
  ExperimentConfig config;
  std::vector<CostReport> reports;
};

StoredReports reports_from_json(const std::string& text);

/// Writes `path` in the given format; Io error names the path on failure.
void emit_report(const std::vector<CostReport>& reports, ReportFormat format,
                 const std::filesystem::path& path, const ExperimentConfig& cfg);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace teamquant
