#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <graphspde/eval.hpp>
#include <graphspde/gp.hpp>
#include <graphspde/gram.hpp>

namespace graphspde::cli {

enum class Task { interpolation, extrapolation };

std::string to_string(Task task);
Task task_from_string(const std::string& name);

struct BacktestSettings {
  std::vector<KernelSpec> kernels;
  std::string baseline;  ///< kernel name for DM comparisons; empty disables them
  BacktestPlan plan;
  std::vector<Task> tasks = {Task::interpolation, Task::extrapolation};
  double interp_fraction = 0.1;
  double noise_variance = 1e-2;
  MeanPolicy mean_policy = MeanPolicy::per_node_training_mean;
  std::optional<double> time_offset = 1.0;
  FitOptions fit;
  std::size_t dm_horizon = 1;
  unsigned jobs = 1;
};

struct RoundRecord {
  std::size_t round = 0;
  std::string kernel;
  Task task = Task::extrapolation;
  bool ok = false;
  std::string error;
  RoundResult result;
  double lml = 0.0;
  double noise_variance = 0.0;
  std::map<std::string, double> hyper;
};

struct SummaryRow {
  std::string kernel;
  Task task = Task::extrapolation;
  std::size_t rounds_ok = 0;
  double mae = 0.0;
  double mae_ci = 0.0;  ///< NaN when fewer than two rounds succeeded
  double mape = 0.0;
  double mape_ci = 0.0;
  double dm_statistic = 0.0;
  double dm_p = 1.0;  ///< NaN for the baseline itself or when DM is unavailable
};

struct BacktestReport {
  std::vector<RoundRecord> rounds;  ///< ordered by (task, kernel, round)
  std::vector<SummaryRow> summary;  ///< ordered by (kernel, task)
  double wall_time = 0.0;

  const SummaryRow* find(const std::string& kernel, Task task) const;
};

/// Throws std::invalid_argument for an empty kernel list, duplicate kernels,
/// an unknown baseline or an invalid plan. Per-round fit failures are recorded
/// in the report; the caller decides whether a run with no successes failed.
BacktestReport run_backtest(const SpatioTemporalDataset& data, const BacktestSettings& settings);

/// Columns: round, kernel, split, mae, mape, ci_half_width, dm_vs_baseline_p.
/// Aggregate rows carry round = "all".
void write_results_csv(const std::filesystem::path& path, const BacktestReport& report);
void write_rounds_detail_csv(const std::filesystem::path& path, const BacktestReport& report);
std::string format_summary(const BacktestReport& report, const BacktestSettings& settings);

}  // namespace graphspde::cli
