#include "graphspde/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "graphspde/errors.hpp"

namespace graphspde {

Eigen::MatrixXd SpectralDecomposition::reconstruct() const {
  Eigen::MatrixXd out = basis * eigenvalues.asDiagonal() * basis.transpose();
  return 0.5 * (out + out.transpose());
}

bool is_symmetric(const Eigen::MatrixXd& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(max_abs(a), 1e-300);
  return max_abs(a - a.transpose()) <= rel_tol * scale;
}

SpectralDecomposition eigendecompose_symmetric(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eigendecompose_symmetric: matrix is not square");
  if (!is_symmetric(a, 1e-8)) throw std::invalid_argument("eigendecompose_symmetric: matrix is not symmetric");
  SpectralDecomposition dec;
  if (a.rows() == 0) return dec;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (a + a.transpose()));
  if (solver.info() != Eigen::Success) throw NumericError("symmetric eigensolver did not converge");
  dec.eigenvalues = solver.eigenvalues();
  dec.basis = solver.eigenvectors();
  return dec;
}

Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& a, double rel_tol) {
  const SpectralDecomposition dec = eigendecompose_symmetric(a);
  if (dec.size() == 0) return a;
  const double cutoff = rel_tol * dec.eigenvalues.cwiseAbs().maxCoeff();
  return matrix_function(dec, [cutoff](double lambda) {
    return std::abs(lambda) <= cutoff ? 0.0 : 1.0 / lambda;
  });
}

namespace {

constexpr int kMaxJitterDecades = 8;

template <class OnSuccess>
auto jittered_factor(const Eigen::MatrixXd& a, OnSuccess&& on_success) {
  if (a.rows() != a.cols()) throw std::invalid_argument("cholesky: matrix is not square");
  const Eigen::Index n = a.rows();
  const double mean_diag = n == 0 ? 0.0 : std::max(a.diagonal().mean(), 1e-300);
  Eigen::MatrixXd work = a;
  double jitter = 0.0;
  for (int k = -1; k <= kMaxJitterDecades; ++k) {
    if (k >= 0) {
      const double next = 1e-10 * mean_diag * std::pow(10.0, k);
      work.diagonal().array() += next - jitter;
      jitter = next;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().allFinite()) {
      return on_success(std::move(llt), jitter);
    }
  }
  throw NumericError("Cholesky factorization failed after maximum jitter " + std::to_string(jitter));
}

}  // namespace

CholeskyResult cholesky_jittered(const Eigen::MatrixXd& a) {
  return jittered_factor(a, [](Eigen::LLT<Eigen::MatrixXd> llt, double jitter) {
    return CholeskyResult{Eigen::MatrixXd(llt.matrixL()), jitter};
  });
}

Eigen::LLT<Eigen::MatrixXd> cholesky_jittered_llt(const Eigen::MatrixXd& a, double* jitter_used) {
  return jittered_factor(a, [jitter_used](Eigen::LLT<Eigen::MatrixXd> llt, double jitter) {
    if (jitter_used) *jitter_used = jitter;
    return llt;
  });
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("expm: matrix is not square");
  const Eigen::Index n = a.rows();
  if (n == 0) return a;

  static constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
      129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
      1323241920.0,        40840800.0,          960960.0,           16380.0,
      182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  const Eigen::MatrixXd x = a / std::ldexp(1.0, squarings);

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd x2 = x * x;
  const Eigen::MatrixXd x4 = x2 * x2;
  const Eigen::MatrixXd x6 = x4 * x2;
  const Eigen::MatrixXd u =
      x * (x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id);
  const Eigen::MatrixXd v =
      x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;

  Eigen::MatrixXd r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) r = r * r;
  return r;
}

}  // namespace graphspde
