#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <graphspde/graph.hpp>

namespace testing_support {

inline double max_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline std::vector<std::string> labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("n" + std::to_string(10 + i));
  return out;
}

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
}

/// Random undirected graph: each pair joined with probability p, weights
/// log-uniform in [wlo, whi]. Optionally forced connected through a random
/// spanning tree.
inline graphspde::Graph random_graph(std::mt19937_64& rng, std::size_t n, double p, bool connected, double wlo = 0.3,
                                     double whi = 3.0, bool directed = false) {
  const auto names = labels(n);
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  std::vector<graphspde::LabeledEdge> edges;
  auto add = [&](std::size_t i, std::size_t j) {
    if (i == j || used[i][j] || (!directed && used[j][i])) return;
    used[i][j] = true;
    edges.push_back({names[i], names[j], log_uniform(rng, wlo, whi)});
  };
  if (connected) {
    for (std::size_t i = 1; i < n; ++i) add(std::uniform_int_distribution<std::size_t>(0, i - 1)(rng), i);
  }
  std::bernoulli_distribution coin(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if ((directed || i < j) && coin(rng)) add(i, j);
    }
  }
  return graphspde::build_graph(names, edges, directed);
}

/// Connected components by union-find over the edge list.
inline std::size_t count_components(const graphspde::Graph& g) {
  std::vector<std::size_t> parent(g.n_vertices());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : g.edges()) parent[find(e.i)] = find(e.j);
  std::size_t roots = 0;
  for (std::size_t i = 0; i < parent.size(); ++i) roots += find(i) == i;
  return roots;
}

/// Multivariate normal log-density with an explicit inverse and determinant.
inline double mvn_logpdf(const Eigen::VectorXd& y, const Eigen::MatrixXd& cov) {
  const Eigen::MatrixXd inv = cov.inverse();
  const double det = cov.determinant();
  return -0.5 * y.dot(inv * y) - 0.5 * std::log(det) - 0.5 * static_cast<double>(y.size()) * std::log(2.0 * M_PI);
}

/// Scalar Ornstein-Uhlenbeck cross-covariance for du = -a u dt + σ dW, u(0) fixed.
inline double ou_cov(double a, double sigma, double t, double s) {
  return sigma * sigma / (2.0 * a) * (std::exp(-a * std::abs(t - s)) - std::exp(-a * (t + s)));
}

/// Brute-force Lyapunov solve through the Kronecker form (I⊗A + A⊗I) vec C = vec Q.
inline Eigen::MatrixXd lyapunov_kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  const auto n = a.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      big.block(i * n, j * n, n, n) += id(i, j) * a + a(i, j) * id;
    }
  }
  // vec is column-major: C(:,j) stacked; (I⊗A + A⊗I) vec C = vec(AC + CAᵀ).
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(q.data(), n * n);
  const Eigen::VectorXd sol = big.fullPivLu().solve(rhs);
  return Eigen::Map<const Eigen::MatrixXd>(sol.data(), n, n);
}

/// Trapezoid-free oracle for e^{-cAt}: truncated Taylor series with squaring.
inline Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::ldexp(1.0, squarings) > 0.1) ++squarings;
  const Eigen::MatrixXd scaled = a / std::ldexp(1.0, squarings);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

}  // namespace testing_support
