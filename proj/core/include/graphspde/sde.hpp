#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

namespace graphspde {

/// Monte Carlo sample paths recorded on a uniform grid.
struct PathEnsemble {
  std::vector<double> times;  ///< recorded times, uniform with step dt·record_stride
  std::size_t n_paths = 0;
  std::size_t n_vertices = 0;
  std::uint64_t seed = 0;
  double dt = 0.0;
  /// Row-major [path][time][vertex].
  std::vector<double> values;

  double at(std::size_t path, std::size_t time_index, std::size_t vertex) const {
    return values[(path * times.size() + time_index) * n_vertices + vertex];
  }
  /// Index of the recorded time closest to t.
  std::size_t time_index(double t) const;
};

struct SimulationOptions {
  double dt = 1e-3;
  double t_end = 1.0;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 0;
  /// Keep every k-th integration step (0 and multiples of k).
  std::size_t record_stride = 1;
  /// 0 = hardware concurrency. Results do not depend on this.
  unsigned threads = 0;
};

/// Scalar σ (noise σ·dW) or matrix Σ (noise Σ·dW).
using HeatNoise = std::variant<double, Eigen::MatrixXd>;

/// Euler–Maruyama for du = -c L̃ u dt + noise·dW:
///   u_{k+1} = u_k - c L̃ u_k dt + noise·√dt·ξ_k.
/// Requires dt·c·max|eig(L̃)| < 0.5, else NumericError.
PathEnsemble simulate_heat(const Eigen::MatrixXd& lt, double c, const HeatNoise& noise, const Eigen::VectorXd& u0,
                           const SimulationOptions& opts);

/// Semi-implicit Euler–Maruyama for ü = -c² L̃ u + σẆ as the system
/// (u, v): v_{k+1} = v_k - c² L̃ u_k dt + σ√dt ξ_k, u_{k+1} = u_k + v_{k+1} dt.
/// Noise enters the velocity only. Requires c²·max|eig(L̃)|·dt² < 0.1.
PathEnsemble simulate_wave(const Eigen::MatrixXd& lt, double c, double sigma, const Eigen::VectorXd& u0,
                           const Eigen::VectorXd& v0, const SimulationOptions& opts);

struct CrossCovEstimate {
  Eigen::MatrixXd cov;  ///< unbiased sample Cov[u(t), u(s)]
  Eigen::MatrixXd se;   ///< standard error of each entry
};

CrossCovEstimate empirical_cross_cov(const PathEnsemble& ens, std::size_t t_index, std::size_t s_index);

struct MeanEstimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd se;
};

MeanEstimate empirical_mean(const PathEnsemble& ens, std::size_t t_index);

}  // namespace graphspde
