#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphspde/graph.hpp"
#include "graphspde/gram.hpp"

namespace graphspde {

struct Observation {
  STPoint point;
  double y = 0.0;
};

/// Observations y at (vertex, time) points of one graph.
struct SpatioTemporalDataset {
  Graph graph;
  std::vector<Observation> observations;

  /// At least one observation, valid vertices, finite values; DataError otherwise.
  void validate() const;

  std::size_t size() const { return observations.size(); }
  std::vector<STPoint> points() const;
  Eigen::VectorXd targets() const;
  /// Sorted distinct observation times.
  std::vector<double> timestamps() const;
  SpatioTemporalDataset subset(const std::vector<std::size_t>& indices) const;
};

enum class MeanPolicy { zero, per_node_training_mean };

std::string to_string(MeanPolicy policy);
MeanPolicy mean_policy_from_string(const std::string& name);

constexpr double kNoiseFloor = 1e-10;

struct GPModel {
  KernelSpec kernel;
  double noise_variance = 1e-2;
  MeanPolicy mean_policy = MeanPolicy::per_node_training_mean;
  /// Earliest training time is mapped to this value; nullopt keeps raw times.
  std::optional<double> time_offset = 1.0;
};

/// Per-vertex additive offsets implied by the mean policy and the training
/// data. Vertices without training data fall back to the overall mean.
Eigen::VectorXd mean_offsets(MeanPolicy policy, const SpatioTemporalDataset& train);

/// Amount added to raw times before kernel evaluation.
double time_shift(const GPModel& model, const std::vector<STPoint>& reference);

enum class LmlMethod {
  automatic,  ///< modal decomposition when the data is a full vertex×time grid
  dense,      ///< always factor the full N×N matrix
};

/// log N(y | m, K + σ_n² I) after centering y by the mean policy.
double log_marginal_likelihood(const GPModel& model, const KernelContext& ctx, const SpatioTemporalDataset& data,
                               LmlMethod method = LmlMethod::automatic);

struct FitOptions {
  int max_iters = 200;
  double grad_tol = 1e-6;
  int restarts = 3;
  std::uint64_t seed = 0;
  bool include_smoothness = false;
  double fd_step = 1e-5;
  bool optimize_noise = true;
};

struct FitResult {
  GPModel model;
  double lml = 0.0;
  /// LML after each accepted iteration of the winning restart; front() is the start.
  std::vector<double> trace;
  int restarts_failed = 0;
};

/// Maximizes the LML over log-hyperparameters with BFGS on central finite
/// differences. Restart 0 starts at the model's current values; the others
/// draw kernel hyperparameters log-uniformly in [0.1, 10]. Throws
/// NumericError when every restart fails.
FitResult fit(const GPModel& model, const KernelContext& ctx, const SpatioTemporalDataset& data,
              const FitOptions& opts = {});

struct PosteriorPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  std::optional<Eigen::MatrixXd> covariance;
};

PosteriorPrediction predict(const GPModel& model, const KernelContext& ctx, const SpatioTemporalDataset& train,
                            const std::vector<STPoint>& query, bool full_covariance = false);

struct SampleResult {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  /// n_samples × N.
  Eigen::MatrixXd samples;
};

/// Draws mean + chol(cov)·z from the prior over `points`, or from the
/// posterior when `condition_on` is given. Deterministic for a fixed seed.
SampleResult sample(const GPModel& model, const KernelContext& ctx, const std::vector<STPoint>& points,
                    int n_samples, std::uint64_t seed,
                    const std::optional<SpatioTemporalDataset>& condition_on = std::nullopt);

}  // namespace graphspde
