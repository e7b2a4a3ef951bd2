#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace graphspde {

/// Sliding-window backtest layout over a series of timepoints. Round r trains
/// on [r·stride, r·stride + n_train] (inclusive) and tests on the following
/// n_test timepoints.
struct BacktestPlan {
  std::size_t n_train = 50;
  std::size_t n_test = 10;
  std::size_t stride = 1;
  std::size_t rounds = 10;
  std::uint64_t seed = 0;
};

struct WindowSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Throws std::invalid_argument when a plan field is zero or the last round
/// runs past total_timepoints ((rounds-1)·stride + n_train + n_test + 1 needed).
std::vector<WindowSplit> sliding_windows(const BacktestPlan& plan, std::size_t total_timepoints);

/// Random test subset of size round(fraction·n), reproducible by seed.
/// Both index lists are sorted.
WindowSplit interpolation_split(std::size_t n_points, double fraction, std::uint64_t seed);

struct RoundResult {
  std::size_t round_index = 0;
  std::vector<double> abs_errors;
  double mae = 0.0;
  double mape = 0.0;
  double wall_time = 0.0;
};

double mae(std::span<const double> pred, std::span<const double> truth);
/// Mean of |pred - truth| / |truth|; throws when any truth value is zero.
double mape(std::span<const double> pred, std::span<const double> truth);

struct DmResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Diebold–Mariano test on loss differentials d = loss_a - loss_b with
/// long-run variance γ₀ + 2Σ_{k<h} γ_k and a two-sided normal p-value.
/// Identical series give (0, 1); a constant non-zero differential gives
/// (±∞, 0). Needs at least 4 points.
DmResult dm_test(std::span<const double> loss_a, std::span<const double> loss_b, std::size_t horizon = 1);

struct ConfidenceInterval {
  double mean = 0.0;
  double half_width = 0.0;
};

/// mean ± 1.96·sd/√R over per-round values; needs at least two values.
ConfidenceInterval confidence_interval(std::span<const double> values);

}  // namespace graphspde
