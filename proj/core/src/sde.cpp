#include "graphspde/sde.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "graphspde/errors.hpp"

namespace graphspde {

std::size_t PathEnsemble::time_index(double t) const {
  if (times.empty()) throw std::out_of_range("empty ensemble");
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end()) return times.size() - 1;
  if (it != times.begin() && std::abs(*(it - 1) - t) <= std::abs(*it - t)) --it;
  return static_cast<std::size_t>(it - times.begin());
}

namespace {

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// Independent generator per path, derived from (seed, path index).
std::mt19937_64 path_rng(std::uint64_t seed, std::size_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(static_cast<std::uint64_t>(path) >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

std::size_t step_count(const SimulationOptions& opts) {
  if (!(opts.dt > 0.0) || !(opts.t_end >= 0.0)) throw std::invalid_argument("dt must be positive and t_end non-negative");
  if (opts.record_stride == 0) throw std::invalid_argument("record_stride must be positive");
  if (opts.n_paths == 0) throw std::invalid_argument("n_paths must be positive");
  return static_cast<std::size_t>(std::llround(opts.t_end / opts.dt));
}

PathEnsemble make_ensemble(const SimulationOptions& opts, std::size_t n, std::size_t steps) {
  PathEnsemble ens;
  ens.n_paths = opts.n_paths;
  ens.n_vertices = n;
  ens.seed = opts.seed;
  ens.dt = opts.dt;
  for (std::size_t k = 0; k <= steps; k += opts.record_stride) ens.times.push_back(static_cast<double>(k) * opts.dt);
  ens.values.assign(ens.n_paths * ens.times.size() * n, 0.0);
  return ens;
}

template <class PathFn>
void run_paths(const SimulationOptions& opts, PathFn&& simulate_path) {
  unsigned threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, opts.n_paths));
  if (threads <= 1) {
    for (std::size_t p = 0; p < opts.n_paths; ++p) simulate_path(p);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t p = w; p < opts.n_paths; p += threads) simulate_path(p);
    });
  }
}

}  // namespace

PathEnsemble simulate_heat(const Eigen::MatrixXd& lt, double c, const HeatNoise& noise, const Eigen::VectorXd& u0,
                           const SimulationOptions& opts) {
  const Eigen::Index n = lt.rows();
  if (lt.cols() != n || u0.size() != n) throw std::invalid_argument("simulate_heat: dimension mismatch");
  const std::size_t steps = step_count(opts);
  const double stiffness = opts.dt * c * spectral_radius(lt);
  if (!(stiffness < 0.5)) {
    throw NumericError("Euler-Maruyama stability guard violated: dt*c*max|eig| = " + std::to_string(stiffness) +
                       " >= 0.5");
  }

  const Eigen::MatrixXd drift = Eigen::MatrixXd::Identity(n, n) - c * opts.dt * lt;
  Eigen::MatrixXd diffusion;
  if (std::holds_alternative<double>(noise)) {
    diffusion = std::get<double>(noise) * Eigen::MatrixXd::Identity(n, n);
  } else {
    diffusion = std::get<Eigen::MatrixXd>(noise);
    if (diffusion.rows() != n) throw std::invalid_argument("simulate_heat: noise matrix has wrong size");
  }
  diffusion *= std::sqrt(opts.dt);
  const Eigen::Index noise_dim = diffusion.cols();

  PathEnsemble ens = make_ensemble(opts, static_cast<std::size_t>(n), steps);
  const std::size_t n_records = ens.times.size();
  run_paths(opts, [&](std::size_t p) {
    auto rng = path_rng(opts.seed, p);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd u = u0, next(n), xi(noise_dim);
    double* out = ens.values.data() + p * n_records * static_cast<std::size_t>(n);
    std::size_t record = 0;
    for (std::size_t k = 0;; ++k) {
      if (k % opts.record_stride == 0 && record < n_records) {
        std::copy(u.data(), u.data() + n, out + record * static_cast<std::size_t>(n));
        ++record;
      }
      if (k == steps) break;
      for (Eigen::Index i = 0; i < noise_dim; ++i) xi[i] = normal(rng);
      next.noalias() = drift * u;
      next.noalias() += diffusion * xi;
      u.swap(next);
    }
  });
  return ens;
}

PathEnsemble simulate_wave(const Eigen::MatrixXd& lt, double c, double sigma, const Eigen::VectorXd& u0,
                           const Eigen::VectorXd& v0, const SimulationOptions& opts) {
  const Eigen::Index n = lt.rows();
  if (lt.cols() != n || u0.size() != n || v0.size() != n) {
    throw std::invalid_argument("simulate_wave: dimension mismatch");
  }
  const std::size_t steps = step_count(opts);
  const double stiffness = c * c * spectral_radius(lt) * opts.dt * opts.dt;
  if (!(stiffness < 0.1)) {
    throw NumericError("Euler-Maruyama stability guard violated: c^2*max|eig|*dt^2 = " + std::to_string(stiffness) +
                       " >= 0.1");
  }

  const Eigen::MatrixXd accel = -c * c * opts.dt * lt;
  const double kick = sigma * std::sqrt(opts.dt);

  PathEnsemble ens = make_ensemble(opts, static_cast<std::size_t>(n), steps);
  const std::size_t n_records = ens.times.size();
  run_paths(opts, [&](std::size_t p) {
    auto rng = path_rng(opts.seed, p);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd u = u0, v = v0;
    double* out = ens.values.data() + p * n_records * static_cast<std::size_t>(n);
    std::size_t record = 0;
    for (std::size_t k = 0;; ++k) {
      if (k % opts.record_stride == 0 && record < n_records) {
        std::copy(u.data(), u.data() + n, out + record * static_cast<std::size_t>(n));
        ++record;
      }
      if (k == steps) break;
      v.noalias() += accel * u;
      for (Eigen::Index i = 0; i < n; ++i) v[i] += kick * normal(rng);
      u += opts.dt * v;
    }
  });
  return ens;
}

CrossCovEstimate empirical_cross_cov(const PathEnsemble& ens, std::size_t t_index, std::size_t s_index) {
  if (ens.n_paths < 2) throw std::invalid_argument("empirical_cross_cov needs at least two paths");
  if (t_index >= ens.times.size() || s_index >= ens.times.size()) throw std::out_of_range("time index out of range");
  const auto n = static_cast<Eigen::Index>(ens.n_vertices);
  const MeanEstimate mt = empirical_mean(ens, t_index);
  const MeanEstimate ms = empirical_mean(ens, s_index);

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd a(n), b(n);
  for (std::size_t p = 0; p < ens.n_paths; ++p) {
    for (Eigen::Index i = 0; i < n; ++i) {
      a[i] = ens.at(p, t_index, static_cast<std::size_t>(i)) - mt.mean[i];
      b[i] = ens.at(p, s_index, static_cast<std::size_t>(i)) - ms.mean[i];
    }
    const Eigen::MatrixXd prod = a * b.transpose();
    sum += prod;
    sum_sq += prod.cwiseProduct(prod);
  }
  const double np = static_cast<double>(ens.n_paths);
  CrossCovEstimate est;
  est.cov = sum / (np - 1.0);
  const Eigen::MatrixXd mean_prod = sum / np;
  const Eigen::MatrixXd var_prod = ((sum_sq / np) - mean_prod.cwiseProduct(mean_prod)) * (np / (np - 1.0));
  est.se = (var_prod.cwiseMax(0.0) / np).cwiseSqrt();
  return est;
}

MeanEstimate empirical_mean(const PathEnsemble& ens, std::size_t t_index) {
  if (t_index >= ens.times.size()) throw std::out_of_range("time index out of range");
  const auto n = static_cast<Eigen::Index>(ens.n_vertices);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n), sum_sq = Eigen::VectorXd::Zero(n);
  for (std::size_t p = 0; p < ens.n_paths; ++p) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = ens.at(p, t_index, static_cast<std::size_t>(i));
      sum[i] += x;
      sum_sq[i] += x * x;
    }
  }
  const double np = static_cast<double>(ens.n_paths);
  MeanEstimate est;
  est.mean = sum / np;
  Eigen::VectorXd var = (sum_sq / np - est.mean.cwiseProduct(est.mean)) * (np > 1 ? np / (np - 1.0) : 1.0);
  est.se = (var.cwiseMax(0.0) / np).cwiseSqrt();
  return est;
}

}  // namespace graphspde
