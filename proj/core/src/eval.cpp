#include "graphspde/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace graphspde {

std::vector<WindowSplit> sliding_windows(const BacktestPlan& plan, std::size_t total_timepoints) {
  if (plan.n_train == 0 || plan.n_test == 0 || plan.stride == 0 || plan.rounds == 0) {
    throw std::invalid_argument("backtest plan fields must be positive");
  }
  const std::size_t needed = (plan.rounds - 1) * plan.stride + plan.n_train + plan.n_test + 1;
  if (needed > total_timepoints) {
    throw std::invalid_argument("backtest plan needs " + std::to_string(needed) + " timepoints but the series has " +
                                std::to_string(total_timepoints));
  }
  std::vector<WindowSplit> splits(plan.rounds);
  for (std::size_t r = 0; r < plan.rounds; ++r) {
    const std::size_t start = r * plan.stride;
    for (std::size_t i = start; i <= start + plan.n_train; ++i) splits[r].train.push_back(i);
    for (std::size_t i = 1; i <= plan.n_test; ++i) splits[r].test.push_back(start + plan.n_train + i);
  }
  return splits;
}

WindowSplit interpolation_split(std::size_t n_points, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("fraction must lie in (0, 1)");
  const auto n_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n_points)));
  if (n_test >= n_points) throw std::invalid_argument("interpolation split leaves no training points");
  std::vector<std::size_t> order(n_points);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  // Partial Fisher–Yates with an explicit index draw; std::shuffle's output is
  // implementation-defined.
  for (std::size_t i = 0; i < n_test; ++i) {
    const std::size_t span = n_points - i;
    const std::size_t j = i + static_cast<std::size_t>(rng() % span);
    std::swap(order[i], order[j]);
  }
  WindowSplit split;
  split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("prediction and truth lengths differ");
  if (a.empty()) throw std::invalid_argument("empty prediction");
}

}  // namespace

double mae(std::span<const double> pred, std::span<const double> truth) {
  require_same_length(pred, truth);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - truth[i]);
  return sum / static_cast<double>(pred.size());
}

double mape(std::span<const double> pred, std::span<const double> truth) {
  require_same_length(pred, truth);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (truth[i] == 0.0) throw std::invalid_argument("MAPE undefined: truth value is zero");
    sum += std::abs(pred[i] - truth[i]) / std::abs(truth[i]);
  }
  return sum / static_cast<double>(pred.size());
}

DmResult dm_test(std::span<const double> loss_a, std::span<const double> loss_b, std::size_t horizon) {
  if (loss_a.size() != loss_b.size()) throw std::invalid_argument("loss series lengths differ");
  const std::size_t n = loss_a.size();
  if (n < 4) throw std::invalid_argument("Diebold-Mariano test needs at least 4 points");
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");

  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = loss_a[i] - loss_b[i];
  if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; })) return {0.0, 1.0};

  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  auto autocov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t t = lag; t < n; ++t) acc += (d[t] - mean) * (d[t - lag] - mean);
    return acc / static_cast<double>(n);
  };
  const double gamma0 = autocov(0);
  double variance = gamma0;
  for (std::size_t k = 1; k < std::min(horizon, n); ++k) variance += 2.0 * autocov(k);
  // The truncated sum can go negative for h > 1; fall back to γ₀ then.
  if (!(variance > 0.0)) variance = gamma0;
  // Constant differential (up to round-off): no sampling variability left.
  if (!(variance > 1e-24 * mean * mean) || !(variance > 1e-300)) {
    const double inf = std::numeric_limits<double>::infinity();
    return {mean > 0.0 ? inf : (mean < 0.0 ? -inf : 0.0), mean == 0.0 ? 1.0 : 0.0};
  }
  const double stat = mean / std::sqrt(variance / static_cast<double>(n));
  return {stat, std::erfc(std::abs(stat) / std::sqrt(2.0))};
}

ConfidenceInterval confidence_interval(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("confidence interval needs at least two values");
  const double r = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / r;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (r - 1.0));
  return {mean, 1.96 * sd / std::sqrt(r)};
}

}  // namespace graphspde
