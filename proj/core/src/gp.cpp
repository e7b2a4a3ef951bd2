#include "graphspde/gp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include "graphspde/errors.hpp"
#include "graphspde/optimize.hpp"

namespace graphspde {

void SpatioTemporalDataset::validate() const {
  if (observations.empty()) throw DataError("dataset has no observations");
  for (const auto& o : observations) {
    if (o.point.vertex >= graph.n_vertices()) throw DataError("observation references unknown vertex");
    if (!std::isfinite(o.point.time)) throw DataError("observation has non-finite time");
    if (!std::isfinite(o.y)) throw DataError("observation has non-finite value");
  }
}

std::vector<STPoint> SpatioTemporalDataset::points() const {
  std::vector<STPoint> pts;
  pts.reserve(observations.size());
  for (const auto& o : observations) pts.push_back(o.point);
  return pts;
}

Eigen::VectorXd SpatioTemporalDataset::targets() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(observations.size()));
  for (std::size_t i = 0; i < observations.size(); ++i) y[static_cast<Eigen::Index>(i)] = observations[i].y;
  return y;
}

std::vector<double> SpatioTemporalDataset::timestamps() const {
  std::vector<double> ts;
  for (const auto& o : observations) ts.push_back(o.point.time);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

SpatioTemporalDataset SpatioTemporalDataset::subset(const std::vector<std::size_t>& indices) const {
  SpatioTemporalDataset out{graph, {}};
  out.observations.reserve(indices.size());
  for (auto i : indices) out.observations.push_back(observations.at(i));
  return out;
}

std::string to_string(MeanPolicy policy) {
  return policy == MeanPolicy::zero ? "zero" : "per_node_training_mean";
}

MeanPolicy mean_policy_from_string(const std::string& name) {
  if (name == "zero") return MeanPolicy::zero;
  if (name == "per_node_training_mean" || name == "per-node") return MeanPolicy::per_node_training_mean;
  throw std::invalid_argument("unknown mean policy '" + name + "'");
}

Eigen::VectorXd mean_offsets(MeanPolicy policy, const SpatioTemporalDataset& train) {
  const auto n = static_cast<Eigen::Index>(train.graph.n_vertices());
  Eigen::VectorXd offsets = Eigen::VectorXd::Zero(n);
  if (policy == MeanPolicy::zero || train.observations.empty()) return offsets;
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
  double total = 0.0;
  for (const auto& o : train.observations) {
    sums[static_cast<Eigen::Index>(o.point.vertex)] += o.y;
    counts[static_cast<Eigen::Index>(o.point.vertex)] += 1.0;
    total += o.y;
  }
  const double overall = total / static_cast<double>(train.observations.size());
  for (Eigen::Index v = 0; v < n; ++v) offsets[v] = counts[v] > 0 ? sums[v] / counts[v] : overall;
  return offsets;
}

double time_shift(const GPModel& model, const std::vector<STPoint>& reference) {
  if (!model.time_offset || reference.empty()) return 0.0;
  double earliest = reference.front().time;
  for (const auto& p : reference) earliest = std::min(earliest, p.time);
  return *model.time_offset - earliest;
}

namespace {

std::vector<STPoint> shifted(std::vector<STPoint> pts, double shift) {
  for (auto& p : pts) p.time += shift;
  return pts;
}

Eigen::VectorXd centered_targets(const SpatioTemporalDataset& data, const Eigen::VectorXd& offsets) {
  Eigen::VectorXd y = data.targets();
  for (std::size_t i = 0; i < data.observations.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] -= offsets[static_cast<Eigen::Index>(data.observations[i].point.vertex)];
  }
  return y;
}

constexpr double kLog2Pi = 1.8378770664093453;

double gaussian_lml(const Eigen::MatrixXd& cov, const Eigen::VectorXd& y) {
  const Eigen::LLT<Eigen::MatrixXd> llt = cholesky_jittered_llt(cov);
  const Eigen::VectorXd z = llt.matrixL().solve(y);
  const double logdet_half = llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * z.squaredNorm() - logdet_half - 0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

/// Vertex × time layout of a dataset that observes every vertex exactly
/// once at each of its timestamps.
struct Grid {
  std::vector<double> times;
  Eigen::MatrixXd values;  // n_vertices × n_times
};

std::optional<Grid> as_full_grid(const SpatioTemporalDataset& data, const Eigen::VectorXd& y) {
  const std::size_t n = data.graph.n_vertices();
  Grid grid;
  grid.times = data.timestamps();
  if (grid.times.size() * n != data.observations.size()) return std::nullopt;
  grid.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid.times.size()),
                                          std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < data.observations.size(); ++i) {
    const auto& p = data.observations[i].point;
    const auto col = std::lower_bound(grid.times.begin(), grid.times.end(), p.time) - grid.times.begin();
    double& cell = grid.values(static_cast<Eigen::Index>(p.vertex), col);
    if (!std::isnan(cell)) return std::nullopt;
    cell = y[static_cast<Eigen::Index>(i)];
  }
  return grid;
}

double modal_lml(const ModalForm& form, const Grid& grid, double noise, double shift) {
  const Eigen::MatrixXd rotated = form.basis.transpose() * grid.values;
  const auto n_times = static_cast<Eigen::Index>(grid.times.size());
  double lml = 0.0;
  Eigen::MatrixXd cov(n_times, n_times);
  for (Eigen::Index k = 0; k < rotated.rows(); ++k) {
    for (Eigen::Index a = 0; a < n_times; ++a) {
      for (Eigen::Index b = a; b < n_times; ++b) {
        const double v = form.cov(k, grid.times[static_cast<std::size_t>(a)] + shift,
                                  grid.times[static_cast<std::size_t>(b)] + shift);
        cov(a, b) = v;
        cov(b, a) = v;
      }
      cov(a, a) += noise;
    }
    lml += gaussian_lml(cov, rotated.row(k).transpose());
  }
  return lml;
}

}  // namespace

double log_marginal_likelihood(const GPModel& model, const KernelContext& ctx, const SpatioTemporalDataset& data,
                               LmlMethod method) {
  data.validate();
  const double noise = std::max(model.noise_variance, kNoiseFloor);
  const Eigen::VectorXd offsets = mean_offsets(model.mean_policy, data);
  const Eigen::VectorXd y = centered_targets(data, offsets);
  const auto raw_points = data.points();
  const double shift = time_shift(model, raw_points);

  if (method == LmlMethod::automatic) {
    if (auto grid = as_full_grid(data, y)) {
      if (auto form = modal_form(model.kernel, ctx)) return modal_lml(*form, *grid, noise, shift);
    }
  }
  const auto pts = shifted(raw_points, shift);
  Eigen::MatrixXd k = assemble_gram(model.kernel, ctx, pts).matrix;
  k.diagonal().array() += noise;
  return gaussian_lml(k, y);
}

FitResult fit(const GPModel& model, const KernelContext& ctx, const SpatioTemporalDataset& data,
              const FitOptions& opts) {
  data.validate();
  model.kernel.validate();
  const auto names = model.kernel.optimizable(opts.include_smoothness);
  const auto n_params = static_cast<Eigen::Index>(names.size() + (opts.optimize_noise ? 1 : 0));

  auto unpack = [&](const Eigen::VectorXd& x) {
    GPModel m = model;
    for (std::size_t i = 0; i < names.size(); ++i) m.kernel.set(names[i], std::exp(x[static_cast<Eigen::Index>(i)]));
    if (opts.optimize_noise) m.noise_variance = std::max(std::exp(x[n_params - 1]), kNoiseFloor);
    return m;
  };
  auto objective = [&](const Eigen::VectorXd& x) { return log_marginal_likelihood(unpack(x), ctx, data); };

  BfgsOptions bopts;
  bopts.max_iters = opts.max_iters;
  bopts.grad_tol = opts.grad_tol;
  bopts.fd_step = opts.fd_step;
  bopts.lower = Eigen::VectorXd::Constant(n_params, std::log(1e-6));
  bopts.upper = Eigen::VectorXd::Constant(n_params, std::log(1e6));
  if (opts.optimize_noise) bopts.lower[n_params - 1] = std::log(kNoiseFloor);

  Eigen::VectorXd start(n_params);
  for (std::size_t i = 0; i < names.size(); ++i) start[static_cast<Eigen::Index>(i)] = std::log(model.kernel.get(names[i]));
  if (opts.optimize_noise) start[n_params - 1] = std::log(std::max(model.noise_variance, kNoiseFloor));

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> log_uniform(std::log(0.1), std::log(10.0));

  std::optional<FitResult> best;
  int failed = 0;
  const int restarts = std::max(1, opts.restarts);
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd x0 = start;
    if (r > 0) {
      for (std::size_t i = 0; i < names.size(); ++i) x0[static_cast<Eigen::Index>(i)] = log_uniform(rng);
    }
    try {
      const BfgsResult res = maximize_bfgs(objective, x0, bopts);
      if (!best || res.value > best->lml) {
        best = FitResult{unpack(res.x), res.value, res.trace, 0};
      }
    } catch (const NumericError&) {
      ++failed;
    }
  }
  if (!best) throw NumericError("all " + std::to_string(restarts) + " optimizer restarts failed");
  best->restarts_failed = failed;
  return *best;
}

PosteriorPrediction predict(const GPModel& model, const KernelContext& ctx, const SpatioTemporalDataset& train,
                            const std::vector<STPoint>& query, bool full_covariance) {
  train.validate();
  const double noise = std::max(model.noise_variance, kNoiseFloor);
  const Eigen::VectorXd offsets = mean_offsets(model.mean_policy, train);
  const Eigen::VectorXd y = centered_targets(train, offsets);
  const auto raw_train = train.points();
  const double shift = time_shift(model, raw_train);
  const auto train_pts = shifted(raw_train, shift);
  const auto query_pts = shifted(query, shift);

  Eigen::MatrixXd k = assemble_gram(model.kernel, ctx, train_pts).matrix;
  k.diagonal().array() += noise;
  const Eigen::LLT<Eigen::MatrixXd> llt = cholesky_jittered_llt(k);
  const Eigen::MatrixXd k_cross = kernel_matrix(model.kernel, ctx, train_pts, query_pts);
  const Eigen::MatrixXd k_query = assemble_gram(model.kernel, ctx, query_pts).matrix;

  PosteriorPrediction out;
  out.mean = k_cross.transpose() * llt.solve(y);
  for (std::size_t q = 0; q < query.size(); ++q) {
    out.mean[static_cast<Eigen::Index>(q)] += offsets[static_cast<Eigen::Index>(query[q].vertex)];
  }
  const Eigen::MatrixXd v = llt.matrixL().solve(k_cross);
  out.variance = (k_query.diagonal() - v.colwise().squaredNorm().transpose()).cwiseMax(0.0);
  if (full_covariance) {
    Eigen::MatrixXd cov = k_query - v.transpose() * v;
    out.covariance = 0.5 * (cov + cov.transpose());
  }
  return out;
}

SampleResult sample(const GPModel& model, const KernelContext& ctx, const std::vector<STPoint>& points, int n_samples,
                    std::uint64_t seed, const std::optional<SpatioTemporalDataset>& condition_on) {
  if (n_samples < 0) throw std::invalid_argument("n_samples must be non-negative");
  SampleResult out;
  Eigen::MatrixXd cov;
  if (condition_on) {
    PosteriorPrediction post = predict(model, ctx, *condition_on, points, true);
    out.mean = std::move(post.mean);
    cov = std::move(*post.covariance);
  } else {
    const double shift = time_shift(model, points);
    cov = assemble_gram(model.kernel, ctx, shifted(points, shift)).matrix;
    out.mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(points.size()));
  }
  out.variance = cov.diagonal().cwiseMax(0.0);

  const auto n = static_cast<Eigen::Index>(points.size());
  out.samples.resize(n_samples, n);
  if (n_samples == 0 || n == 0) return out;
  const CholeskyResult chol = cholesky_jittered(cov);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (int s = 0; s < n_samples; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
    out.samples.row(s) = (out.mean + chol.lower * z).transpose();
  }
  return out;
}

}  // namespace graphspde
