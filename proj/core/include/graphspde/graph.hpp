#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <tuple>
#include <vector>

#include "graphspde/spectral.hpp"

namespace graphspde {

struct Edge {
  std::size_t i;
  std::size_t j;
  double weight;
};

/// Edge as given by a caller, referencing vertices by label.
struct LabeledEdge {
  std::string src;
  std::string dst;
  double weight = 1.0;
};

/// Weighted graph with vertices indexed in lexicographic label order.
/// Immutable once built; use build_graph() to construct.
class Graph {
public:
  Graph() = default;

  std::size_t n_vertices() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool directed() const { return directed_; }

  /// Index of `label`; throws DataError when unknown.
  std::size_t index_of(const std::string& label) const;
  bool contains(const std::string& label) const;

  /// Dense weight matrix W. Undirected edges are mirrored.
  Eigen::MatrixXd weight_matrix() const;

private:
  friend Graph build_graph(std::vector<std::string>, const std::vector<LabeledEdge>&, bool);

  std::vector<std::string> labels_;
  std::vector<Edge> edges_;
  bool directed_ = false;
};

/// Validates and canonicalizes a graph. Errors (DataError): duplicate label,
/// self-loop, non-positive or non-finite weight, unknown endpoint, duplicate edge.
Graph build_graph(std::vector<std::string> labels, const std::vector<LabeledEdge>& edges,
                  bool directed = false);

/// Unlabeled path graph v0 - v1 - ... with unit weights. Labels are zero-padded
/// so lexicographic order follows the path.
Graph path_graph(std::size_t n, const std::string& prefix = "v");

enum class LaplacianVariant { unnormalized, sym_normalized, random_walk };

std::string to_string(LaplacianVariant v);
LaplacianVariant laplacian_variant_from_string(const std::string& name);

struct LaplacianMatrix {
  Eigen::MatrixXd matrix;
  LaplacianVariant variant = LaplacianVariant::unnormalized;
  bool symmetric = true;

  std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
};

/// L = D - W, D^{-1/2} L D^{-1/2} or I - D^{-1} W. Degrees are out-degrees
/// (row sums of W). Normalized variants reject zero-degree vertices.
LaplacianMatrix laplacian(const Graph& g, LaplacianVariant variant = LaplacianVariant::unnormalized);

/// (2ν/κ² I + L)^{ν/2}, kept in factored form over the spectrum of L.
class FractionalLaplacian {
public:
  FractionalLaplacian(SpectralDecomposition base, double nu, double kappa);

  double nu() const { return nu_; }
  double kappa() const { return kappa_; }
  double shift() const { return 2.0 * nu_ / (kappa_ * kappa_); }

  const SpectralDecomposition& base_decomposition() const { return base_; }
  /// (2ν/κ² + λ_i)^{ν/2}, same order as the base eigenvalues.
  const Eigen::VectorXd& shifted_eigs() const { return shifted_; }
  /// Spectrum of L̃ itself: base eigenvectors with shifted eigenvalues.
  const SpectralDecomposition& decomposition() const { return decomposition_; }

  std::size_t size() const { return static_cast<std::size_t>(shifted_.size()); }
  Eigen::MatrixXd matrix() const;

private:
  SpectralDecomposition base_;
  SpectralDecomposition decomposition_;
  Eigen::VectorXd shifted_;
  double nu_;
  double kappa_;
};

/// Throws std::invalid_argument for asymmetric L or non-positive ν, κ.
FractionalLaplacian fractional_laplacian(const LaplacianMatrix& L, double nu, double kappa);

}  // namespace graphspde
