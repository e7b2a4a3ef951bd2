#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "graphspde/graph.hpp"
#include "graphspde/kernels.hpp"
#include "graphspde/spectral.hpp"

namespace graphspde {

enum class KernelKind { laplacian_spatial, matern_spatial, separable_product, shek, swek };

/// Spatial factor of a separable kernel.
enum class SpatialKind { laplacian, matern };

std::string to_string(KernelKind kind);

/// Tagged kernel description. Hyperparameters live in a name→value map;
/// recognised names are c, sigma, nu, kappa, time_lengthscale, variance and
/// frequency (cosine temporal kernels only).
struct KernelSpec {
  KernelKind kind = KernelKind::shek;
  std::map<std::string, double> hyper;
  SpatialKind spatial = SpatialKind::matern;
  TemporalKind temporal = TemporalKind::rbf;
  LaplacianVariant laplacian_variant = LaplacianVariant::unnormalized;

  double get(const std::string& name) const;
  double get_or(const std::string& name, double fallback) const;
  void set(const std::string& name, double value) { hyper[name] = value; }

  /// Required hyperparameters present and strictly positive; throws
  /// std::invalid_argument otherwise.
  void validate() const;

  /// Canonical CLI name: laplacian, matern, sep-<laplacian|matern>-<temporal>, shek, swek.
  std::string name() const;

  /// Hyperparameters the optimizer adjusts (observation noise excluded).
  std::vector<std::string> optimizable(bool include_smoothness = false) const;

  /// Builds a spec with default hyperparameters from a CLI name. Throws
  /// std::invalid_argument listing the valid names.
  static KernelSpec from_name(const std::string& name);
};

/// The kernel names accepted by KernelSpec::from_name.
const std::vector<std::string>& kernel_names();

struct STPoint {
  std::size_t vertex = 0;
  double time = 0.0;

  friend bool operator==(const STPoint&, const STPoint&) = default;
};

struct GramMatrix {
  Eigen::MatrixXd matrix;
  std::vector<STPoint> points;
};

/// Graph plus lazily built, thread-safe caches of everything the kernels need
/// from it (Laplacians, fractional Laplacians, spatial covariance matrices).
class KernelContext {
public:
  explicit KernelContext(Graph graph);
  KernelContext(const KernelContext&) = delete;
  KernelContext& operator=(const KernelContext&) = delete;

  const Graph& graph() const { return graph_; }
  std::size_t n_vertices() const { return graph_.n_vertices(); }

  std::shared_ptr<const LaplacianMatrix> laplacian(LaplacianVariant variant) const;
  std::shared_ptr<const FractionalLaplacian> fractional(LaplacianVariant variant, double nu, double kappa) const;
  /// Spatial covariance of a spatial-only or separable spec, without the variance factor.
  std::shared_ptr<const Eigen::MatrixXd> spatial_kernel(const KernelSpec& spec) const;

private:
  Graph graph_;
  mutable SharedCache<int, LaplacianMatrix> laplacians_;
  mutable SharedCache<std::tuple<int, double, double>, FractionalLaplacian> fractionals_;
  mutable SharedCache<std::tuple<int, int, double, double>, Eigen::MatrixXd> spatial_;
};

/// Kernel evaluated between two point sets. Rows and columns follow `rows`
/// and `cols`. Errors: unknown vertex; negative time for SHEK/SWEK.
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const KernelContext& ctx, const std::vector<STPoint>& rows,
                              const std::vector<STPoint>& cols);

/// Symmetric Gram matrix over `points`. Space-time blocks are computed once
/// per unique time pair.
GramMatrix assemble_gram(const KernelSpec& spec, const KernelContext& ctx, const std::vector<STPoint>& points);

/// Kernel in a fixed orthonormal spatial basis: Cov[(i,t),(j,s)] =
/// Σ_k basis(i,k) basis(j,k) cov(k,t,s). Available when the graph is
/// undirected; every kernel kind then decouples into independent modes.
struct ModalForm {
  Eigen::MatrixXd basis;
  std::function<double(Eigen::Index, double, double)> cov;
};

std::optional<ModalForm> modal_form(const KernelSpec& spec, const KernelContext& ctx);

}  // namespace graphspde
