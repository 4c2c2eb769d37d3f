#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "feddaf/config.hpp"
#include "feddaf/federation.hpp"

namespace feddaf {

/// Cartesian grid of methods x scarcity x noise x mu x seed over a base config.
struct ExperimentPlan {
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::vector<double> scarcity_levels;
  std::vector<double> noise_levels;
  std::vector<double> mu_values;
  std::vector<std::uint64_t> seeds;
  FederationConfig base;

  /// Fills empty lists from the base config's single values.
  void fill_defaults();
  void validate() const;
};

/// Plan file: FederationConfig keys plus methods, scarcity_levels,
/// noise_levels, mu_values and seeds (comma-separated lists). Unknown keys throw.
ExperimentPlan parse_plan(std::string_view text, std::string_view origin = "<input>");
ExperimentPlan load_plan(const std::filesystem::path& path);

/// The mu grid of the Gompertz sensitivity sweep.
inline constexpr double kMuSweepGrid[] = {-10.0, -5.0, -1.0, 0.0, 1.0, 5.0, 10.0};

/// Plan for the mu sweep: FedDAF only, mu over kMuSweepGrid. Without a base
/// plan it uses scarcity 0.05 and noise {0.3, 0.6, 0.9}.
ExperimentPlan mu_sweep_plan(std::optional<ExperimentPlan> base);

struct ResultRow {
  std::string method;
  double scarcity = 0.0;
  double sigma = 0.0;
  double mu = 0.0;
  std::uint64_t seed = 0;
  double best_accuracy = 0.0;  ///< NaN for a failed run
  std::size_t rounds_to_best = 0;
  double wall_time_seconds = 0.0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

/// Full record of one run, for history.json.
struct RunLog {
  ResultRow row;
  FederationConfig config;
  std::uint64_t task_fingerprint = 0;
  std::vector<RoundRecord> history;
  std::optional<std::string> error;
};

struct PlanOutcome {
  std::vector<ResultRow> rows;
  std::vector<RunLog> runs;  ///< same order as rows
};

struct PlanOptions {
  std::size_t threads = 1;
  /// Called once per finished run, serialised by the runner.
  std::function<void(const RunLog&)> on_run;
};

/// Runs every (cell, seed). Each one builds one task and one starting model
/// shared by all of its methods. A failing run becomes an error row; the sweep
/// continues. Rows come back sorted by (method, scarcity, sigma, mu, seed).
PlanOutcome run_plan(const ExperimentPlan& plan, const PlanOptions& options = {});

/// results.csv codec. Reals use 6 significant digits.
inline constexpr std::string_view kResultsHeader =
    "method,scarcity,sigma,mu,seed,best_accuracy,rounds_to_best,wall_time_seconds";
std::string format_results_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv(std::string_view text);

/// history.json content: one object per run.
std::string format_history_json(const std::vector<RunLog>& runs, bool include_wall_time = true);

struct SummaryCell {
  std::string method;
  double scarcity = 0.0;
  double sigma = 0.0;
  double mu = 0.0;
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  ///< sample standard deviation; 0 for a single seed
};

/// Mean and std of best_accuracy over seeds per (method, scarcity, sigma, mu).
/// Failed runs are skipped.
std::vector<SummaryCell> summarize(const std::vector<ResultRow>& rows);

/// Markdown tables: methods x (scarcity, noise) per mu, and when several mu
/// values are present, mu x noise per (method, scarcity).
std::string format_summary(const std::vector<SummaryCell>& cells);

/// Writes results.csv, history.json and summary.md into dir.
void emit_results(const PlanOutcome& outcome, const std::filesystem::path& dir);

}  // namespace feddaf
