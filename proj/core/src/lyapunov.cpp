#include <Eigen/Eigenvalues>

#include <complex>
#include <stdexcept>

#include "graphspde/errors.hpp"
#include "graphspde/kernels.hpp"

namespace graphspde {

Eigen::MatrixXd lyapunov_stationary(const Eigen::MatrixXd& lt, const Eigen::MatrixXd& noise) {
  if (lt.rows() != lt.cols()) throw std::invalid_argument("lyapunov_stationary: matrix is not square");
  if (noise.rows() != lt.rows()) throw std::invalid_argument("lyapunov_stationary: noise has wrong size");
  const Eigen::Index n = lt.rows();
  const Eigen::MatrixXd rhs = noise * noise.transpose();
  if (n == 0) return rhs;

  // A = U T U*, then T Y + Y T* = U* Q U. T* is lower triangular, so column j
  // of Y depends only on columns k > j: (T + conj(T_jj) I) y_j = f_j - Σ_{k>j} conj(T_jk) y_k.
  Eigen::ComplexSchur<Eigen::MatrixXd> schur(lt);
  if (schur.info() != Eigen::Success) throw NumericError("complex Schur decomposition failed");
  const Eigen::MatrixXcd& u = schur.matrixU();
  const Eigen::MatrixXcd& tri = schur.matrixT();
  const Eigen::MatrixXcd f = u.adjoint() * rhs.cast<std::complex<double>>() * u;

  const double scale = tri.diagonal().cwiseAbs().maxCoeff();
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    Eigen::VectorXcd col = f.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) col -= std::conj(tri(j, k)) * y.col(k);
    Eigen::MatrixXcd system = tri;
    system.diagonal().array() += std::conj(tri(j, j));
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(system(i, i)) <= 1e-12 * scale) {
        throw NumericError("Lyapunov equation is singular: eigenvalues sum to zero");
      }
    }
    y.col(j) = system.triangularView<Eigen::Upper>().solve(col);
  }
  Eigen::MatrixXd c = (u * y * u.adjoint()).real();
  return 0.5 * (c + c.transpose());
}

}  // namespace graphspde
