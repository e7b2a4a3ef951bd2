#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <tuple>

namespace graphspde {

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns of `basis`)
/// of a real symmetric matrix.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd basis;

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
  Eigen::MatrixXd reconstruct() const;
};

/// Largest absolute entry, the norm used for all relative tolerances here.
inline double max_abs(const Eigen::MatrixXd& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

bool is_symmetric(const Eigen::MatrixXd& a, double rel_tol = 1e-8);

/// Symmetrizes A as (A+Aᵀ)/2 after checking ‖A−Aᵀ‖_max ≤ 1e-8‖A‖_max;
/// throws std::invalid_argument otherwise.
SpectralDecomposition eigendecompose_symmetric(const Eigen::MatrixXd& a);

/// basis · diag(f(λ_i)) · basisᵀ. Throws std::domain_error when f is not
/// finite at some eigenvalue.
template <class F>
Eigen::MatrixXd matrix_function(const SpectralDecomposition& dec, F&& f) {
  Eigen::VectorXd values(dec.eigenvalues.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    values[i] = f(dec.eigenvalues[i]);
    if (!std::isfinite(values[i])) {
      throw std::domain_error("matrix_function: function undefined at eigenvalue " +
                              std::to_string(dec.eigenvalues[i]));
    }
  }
  Eigen::MatrixXd out = dec.basis * values.asDiagonal() * dec.basis.transpose();
  return 0.5 * (out + out.transpose());
}

constexpr double kDefaultPinvTol = 1e-10;

/// Moore–Penrose pseudoinverse of a symmetric matrix: eigenvalues with
/// |λ| < rel_tol·max|λ| are mapped to zero.
Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& a, double rel_tol = kDefaultPinvTol);

struct CholeskyResult {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};

/// Cholesky factor of A + jitter·I. Jitter starts at zero, then escalates
/// through 1e-10·mean(diag)·10^k for k = 0..8; throws NumericError beyond.
CholeskyResult cholesky_jittered(const Eigen::MatrixXd& a);

/// Same policy, returning the Eigen factorization object for solves.
Eigen::LLT<Eigen::MatrixXd> cholesky_jittered_llt(const Eigen::MatrixXd& a, double* jitter_used = nullptr);

/// Matrix exponential of a general square matrix by scaling and squaring
/// with a degree-13 Padé approximant.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

/// Read-mostly cache of decompositions keyed by an arbitrary tuple. Lookups
/// take a shared lock; inserts take an exclusive lock, and the first inserted
/// value for a key wins.
template <class Key, class Value>
class SharedCache {
public:
  template <class Make>
  std::shared_ptr<const Value> get_or_create(const Key& key, Make&& make) {
    {
      std::shared_lock lock(mutex_);
      if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    }
    auto value = std::make_shared<const Value>(make());
    std::unique_lock lock(mutex_);
    auto [it, inserted] = entries_.emplace(key, std::move(value));
    return it->second;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
  }

private:
  mutable std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const Value>> entries_;
};

}  // namespace graphspde
