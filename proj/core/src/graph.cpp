#include "graphspde/graph.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "graphspde/errors.hpp"

namespace graphspde {

std::size_t Graph::index_of(const std::string& label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) throw DataError("unknown vertex '" + label + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

bool Graph::contains(const std::string& label) const {
  return std::binary_search(labels_.begin(), labels_.end(), label);
}

Eigen::MatrixXd Graph::weight_matrix() const {
  const auto n = static_cast<Eigen::Index>(n_vertices());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : edges_) {
    w(e.i, e.j) += e.weight;
    if (!directed_) w(e.j, e.i) += e.weight;
  }
  return w;
}

Graph build_graph(std::vector<std::string> labels, const std::vector<LabeledEdge>& edges, bool directed) {
  if (labels.empty()) throw DataError("graph needs at least one vertex");
  std::sort(labels.begin(), labels.end());
  if (auto dup = std::adjacent_find(labels.begin(), labels.end()); dup != labels.end()) {
    throw DataError("duplicate vertex label '" + *dup + "'");
  }

  Graph g;
  g.labels_ = std::move(labels);
  g.directed_ = directed;

  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : edges) {
    if (!g.contains(e.src)) throw DataError("edge references unknown vertex '" + e.src + "'");
    if (!g.contains(e.dst)) throw DataError("edge references unknown vertex '" + e.dst + "'");
    if (e.src == e.dst) throw DataError("self-loop at vertex '" + e.src + "'");
    if (!std::isfinite(e.weight) || e.weight <= 0.0) {
      throw DataError("edge " + e.src + "-" + e.dst + " has non-positive weight");
    }
    std::size_t i = g.index_of(e.src);
    std::size_t j = g.index_of(e.dst);
    auto key = directed ? std::pair{i, j} : std::pair{std::min(i, j), std::max(i, j)};
    if (!seen.insert(key).second) throw DataError("duplicate edge " + e.src + "-" + e.dst);
    g.edges_.push_back({i, j, e.weight});
  }
  return g;
}

Graph path_graph(std::size_t n, const std::string& prefix) {
  if (n == 0) throw std::invalid_argument("path_graph: n must be positive");
  const int width = static_cast<int>(std::to_string(n - 1).size());
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream os;
    os << prefix << std::setw(width) << std::setfill('0') << i;
    labels.push_back(os.str());
  }
  std::vector<LabeledEdge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({labels[i], labels[i + 1], 1.0});
  return build_graph(labels, edges, false);
}

std::string to_string(LaplacianVariant v) {
  switch (v) {
    case LaplacianVariant::unnormalized: return "unnormalized";
    case LaplacianVariant::sym_normalized: return "sym_normalized";
    case LaplacianVariant::random_walk: return "random_walk";
  }
  return "unknown";
}

LaplacianVariant laplacian_variant_from_string(const std::string& name) {
  if (name == "unnormalized") return LaplacianVariant::unnormalized;
  if (name == "sym_normalized" || name == "symmetric") return LaplacianVariant::sym_normalized;
  if (name == "random_walk") return LaplacianVariant::random_walk;
  throw std::invalid_argument("unknown Laplacian variant '" + name + "'");
}

LaplacianMatrix laplacian(const Graph& g, LaplacianVariant variant) {
  const Eigen::MatrixXd w = g.weight_matrix();
  const Eigen::VectorXd degree = w.rowwise().sum();
  const Eigen::Index n = w.rows();

  LaplacianMatrix out;
  out.variant = variant;
  Eigen::MatrixXd l = Eigen::MatrixXd(degree.asDiagonal()) - w;

  if (variant != LaplacianVariant::unnormalized) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(degree[i] > 0.0)) {
        throw DataError("vertex '" + g.labels()[static_cast<std::size_t>(i)] +
                        "' has zero degree; normalized Laplacian undefined");
      }
    }
  }

  switch (variant) {
    case LaplacianVariant::unnormalized:
      out.matrix = std::move(l);
      break;
    case LaplacianVariant::sym_normalized: {
      const Eigen::VectorXd s = degree.cwiseSqrt().cwiseInverse();
      out.matrix = s.asDiagonal() * l * s.asDiagonal();
      break;
    }
    case LaplacianVariant::random_walk:
      out.matrix = Eigen::MatrixXd::Identity(n, n) - degree.cwiseInverse().asDiagonal() * w;
      break;
  }
  out.symmetric = is_symmetric(out.matrix, 1e-12);
  if (out.symmetric) out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  return out;
}

FractionalLaplacian::FractionalLaplacian(SpectralDecomposition base, double nu, double kappa)
    : base_(std::move(base)), nu_(nu), kappa_(kappa) {
  if (!(nu > 0.0) || !(kappa > 0.0)) {
    throw std::invalid_argument("fractional Laplacian requires nu > 0 and kappa > 0");
  }
  const double s = shift();
  shifted_.resize(base_.eigenvalues.size());
  for (Eigen::Index i = 0; i < shifted_.size(); ++i) {
    // Laplacian spectra are PSD; round-off negatives are clamped.
    shifted_[i] = std::pow(s + std::max(base_.eigenvalues[i], 0.0), 0.5 * nu_);
  }
  decomposition_.basis = base_.basis;
  decomposition_.eigenvalues = shifted_;
}

Eigen::MatrixXd FractionalLaplacian::matrix() const { return decomposition_.reconstruct(); }

FractionalLaplacian fractional_laplacian(const LaplacianMatrix& L, double nu, double kappa) {
  if (!L.symmetric) {
    throw std::invalid_argument("fractional powers are defined only for symmetric Laplacians");
  }
  return FractionalLaplacian(eigendecompose_symmetric(L.matrix), nu, kappa);
}

}  // namespace graphspde
