#include "graphspde/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "graphspde/errors.hpp"

namespace graphspde {

namespace {

void require_time(double t, const char* what) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument(std::string(what) + ": times must be finite and non-negative");
  }
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be positive");
}

/// V diag(values) Vᵀ without the symmetry-enforcing pass of matrix_function.
Eigen::MatrixXd spectral_product(const SpectralDecomposition& dec, const Eigen::VectorXd& values) {
  return dec.basis * values.asDiagonal() * dec.basis.transpose();
}

}  // namespace

Eigen::MatrixXd laplacian_kernel(const LaplacianMatrix& L) {
  return pseudoinverse(L.matrix.transpose() * L.matrix);
}

Eigen::MatrixXd matern_graph_kernel(const LaplacianMatrix& L, double nu, double kappa) {
  const FractionalLaplacian lt = fractional_laplacian(L, nu, kappa);
  return matrix_function(lt.base_decomposition(), [&](double lambda) {
    return std::pow(lt.shift() + std::max(lambda, 0.0), -nu);
  });
}

Eigen::MatrixXd heat_semigroup(const LaplacianMatrix& L, double c, double t) {
  require_time(t, "heat_semigroup");
  require_positive(c, "c");
  if (L.symmetric) {
    return matrix_function(eigendecompose_symmetric(L.matrix),
                           [&](double lambda) { return std::exp(-c * lambda * t); });
  }
  return expm(-c * t * L.matrix);
}

Eigen::MatrixXd heat_random_walk_check(const LaplacianMatrix& L_rw, double t, int k_terms) {
  require_time(t, "heat_random_walk_check");
  if (k_terms < 1) throw std::invalid_argument("heat_random_walk_check: k_terms must be >= 1");
  const Eigen::Index n = L_rw.matrix.rows();
  const Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n) - L_rw.matrix;
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  double weight = std::exp(-t);  // Poisson(t) mass at k = 0
  for (int k = 0; k < k_terms; ++k) {
    sum += weight * power;
    power = power * p;
    weight *= t / (k + 1);
  }
  return sum;
}

namespace modal {

double decay_integral(double x, double m) {
  if (m == 0.0) return 0.0;
  const double xm = x * m;
  if (std::abs(xm) < 1e-12) return m * (1.0 - 0.5 * xm);
  return -std::expm1(-xm) / x;
}

double shek(double mu, double c, double sigma, double t, double s) {
  const double m = std::min(t, s);
  return sigma * sigma * std::exp(-c * mu * std::abs(t - s)) * decay_integral(2.0 * c * mu, m);
}

double shek_pair(double mu_i, double mu_j, double q, double c, double t, double s) {
  return q * std::exp(-c * mu_i * (t - s)) * decay_integral(c * (mu_i + mu_j), s);
}

namespace {

/// ∫_0^m S(a-r) S(b-r) dr with S(x) = sin(θx)/θ by 5-point Gauss–Legendre;
/// used where the closed form cancels catastrophically (θ·max(a,b) small).
double swek_quadrature(double theta, double a, double b, double m) {
  static constexpr std::array<double, 5> nodes = {0.0, -0.5384693101056831, 0.5384693101056831,
                                                  -0.9061798459386640, 0.9061798459386640};
  static constexpr std::array<double, 5> weights = {0.5688888888888889, 0.4786286704993665,
                                                    0.4786286704993665, 0.2369268850561891,
                                                    0.2369268850561891};
  auto sinc_scaled = [theta](double x) { return theta == 0.0 ? x : std::sin(theta * x) / theta; };
  double acc = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double r = 0.5 * m * (nodes[k] + 1.0);
    acc += weights[k] * sinc_scaled(a - r) * sinc_scaled(b - r);
  }
  return 0.5 * m * acc;
}

}  // namespace

double swek(double mu, double c, double sigma, double t, double s) {
  const double m = std::min(t, s);
  const double big = std::max(t, s);
  if (m == 0.0) return 0.0;
  const double theta = c * std::sqrt(std::max(mu, 0.0));
  if (theta * big < 1e-2) return sigma * sigma * swek_quadrature(theta, t, s, m);
  const double th2 = theta * theta;
  return sigma * sigma / th2 *
         (0.5 * std::cos(theta * (t - s)) * m - 0.5 * std::cos(theta * big) * std::sin(theta * m) / theta);
}

}  // namespace modal

Eigen::MatrixXd shek_cov(const FractionalLaplacian& lt, double c, double sigma, double t, double s) {
  require_time(t, "shek_cov");
  require_time(s, "shek_cov");
  require_positive(c, "c");
  const auto& dec = lt.decomposition();
  Eigen::VectorXd g(dec.eigenvalues.size());
  for (Eigen::Index k = 0; k < g.size(); ++k) g[k] = modal::shek(dec.eigenvalues[k], c, sigma, t, s);
  return spectral_product(dec, g);
}

Eigen::MatrixXd shek_cov_general(const Eigen::MatrixXd& lt, double c, double sigma, double t, double s) {
  require_time(t, "shek_cov_general");
  require_time(s, "shek_cov_general");
  require_positive(c, "c");
  if (lt.rows() != lt.cols()) throw std::invalid_argument("shek_cov_general: matrix is not square");
  const Eigen::Index n = lt.rows();
  if (t < s) return shek_cov_general(lt, c, sigma, s, t).transpose();

  // Van Loan on a short step h = s/2^k: exp([[-F, Q], [0, Fᵀ]] h) = [[·, E12], [0, E22]]
  // with F = -cL̃, Q = σ²I gives Φ(h) = e^{Fh} = E22ᵀ and V(h) = ∫_0^h e^{Fr} Q e^{Fᵀr} dr
  // = E22ᵀ E12. The block exponential overflows for large ‖F‖s, so the step is
  // kept short and doubled: V(2h) = Φ(h) V(h) Φ(h)ᵀ + V(h), Φ(2h) = Φ(h)².
  const Eigen::MatrixXd f = -c * lt;
  const double norm = f.cwiseAbs().colwise().sum().maxCoeff();
  int doublings = 0;
  while (norm * s / std::ldexp(1.0, doublings) > 1.0) ++doublings;
  const double h = s / std::ldexp(1.0, doublings);
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = -f * h;
  block.topRightCorner(n, n) = sigma * sigma * h * Eigen::MatrixXd::Identity(n, n);
  block.bottomRightCorner(n, n) = f.transpose() * h;
  const Eigen::MatrixXd e = expm(block);
  Eigen::MatrixXd phi = e.bottomRightCorner(n, n).transpose();
  Eigen::MatrixXd var_s = phi * e.topRightCorner(n, n);
  for (int k = 0; k < doublings; ++k) {
    var_s = (phi * var_s * phi.transpose() + var_s).eval();
    phi = (phi * phi).eval();
  }
  var_s = 0.5 * (var_s + var_s.transpose()).eval();
  return expm(f * (t - s)) * var_s;
}

Eigen::VectorXd shek_mean(const FractionalLaplacian& lt, double c, const Eigen::VectorXd& u0, double t) {
  require_time(t, "shek_mean");
  const auto& dec = lt.decomposition();
  if (u0.size() != dec.eigenvalues.size()) throw std::invalid_argument("shek_mean: u0 has wrong length");
  const Eigen::VectorXd decay = (-c * t * dec.eigenvalues.array()).exp().matrix();
  return dec.basis * decay.asDiagonal() * (dec.basis.transpose() * u0);
}

Eigen::MatrixXd shek_matrix_noise_cov(const FractionalLaplacian& lt, double c, const Eigen::MatrixXd& noise,
                                      double t, double s) {
  require_time(t, "shek_matrix_noise_cov");
  require_time(s, "shek_matrix_noise_cov");
  require_positive(c, "c");
  const auto& dec = lt.decomposition();
  const Eigen::Index n = dec.eigenvalues.size();
  if (noise.rows() != n) throw std::invalid_argument("shek_matrix_noise_cov: noise matrix has wrong size");
  if (t < s) return shek_matrix_noise_cov(lt, c, noise, s, t).transpose();

  const Eigen::MatrixXd q = dec.basis.transpose() * noise * noise.transpose() * dec.basis;
  Eigen::MatrixXd modal_cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      modal_cov(i, j) = modal::shek_pair(dec.eigenvalues[i], dec.eigenvalues[j], q(i, j), c, t, s);
    }
  }
  return dec.basis * modal_cov * dec.basis.transpose();
}

Eigen::VectorXd wave_solution(const LaplacianMatrix& L, double c, const Eigen::VectorXd& u0,
                              const Eigen::VectorXd& v0, double t) {
  require_time(t, "wave_solution");
  if (!L.symmetric) throw std::invalid_argument("wave_solution requires a symmetric Laplacian");
  const SpectralDecomposition dec = eigendecompose_symmetric(L.matrix);
  if (u0.size() != static_cast<Eigen::Index>(dec.size()) || v0.size() != u0.size()) {
    throw std::invalid_argument("wave_solution: initial state has wrong length");
  }
  const double scale = dec.size() == 0 ? 0.0 : dec.eigenvalues.cwiseAbs().maxCoeff();
  const double zero_tol = std::max(kDefaultPinvTol * scale, 1e-14);

  const Eigen::VectorXd y0 = dec.basis.transpose() * u0;
  const Eigen::VectorXd dy0 = dec.basis.transpose() * v0;
  Eigen::VectorXd y(y0.size());
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    const double lambda = dec.eigenvalues[k];
    if (lambda <= zero_tol) {
      y[k] = y0[k] + dy0[k] * t;
    } else {
      const double omega = c * std::sqrt(lambda);
      y[k] = std::cos(omega * t) * y0[k] + std::sin(omega * t) / omega * dy0[k];
    }
  }
  return dec.basis * y;
}

Eigen::MatrixXd swek_cov(const FractionalLaplacian& lt, double c, double sigma, double t, double s) {
  require_time(t, "swek_cov");
  require_time(s, "swek_cov");
  require_positive(c, "c");
  const auto& dec = lt.decomposition();
  Eigen::VectorXd g(dec.eigenvalues.size());
  for (Eigen::Index k = 0; k < g.size(); ++k) g[k] = modal::swek(dec.eigenvalues[k], c, sigma, t, s);
  return spectral_product(dec, g);
}

Eigen::VectorXd swek_mean(const FractionalLaplacian& lt, double c, const Eigen::VectorXd& u0,
                          const Eigen::VectorXd& v0, double t) {
  require_time(t, "swek_mean");
  require_positive(c, "c");
  const auto& dec = lt.decomposition();
  if (u0.size() != dec.eigenvalues.size() || v0.size() != u0.size()) {
    throw std::invalid_argument("swek_mean: initial state has wrong length");
  }
  const Eigen::VectorXd y0 = dec.basis.transpose() * u0;
  const Eigen::VectorXd dy0 = dec.basis.transpose() * v0;
  Eigen::VectorXd y(y0.size());
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    const double theta = c * std::sqrt(dec.eigenvalues[k]);
    y[k] = std::cos(theta * t) * y0[k] + std::sin(theta * t) / theta * dy0[k];
  }
  return dec.basis * y;
}

namespace published {

Eigen::MatrixXd swek_cov(const FractionalLaplacian& lt, double c, double sigma, double t, double s) {
  require_time(t, "published::swek_cov");
  require_time(s, "published::swek_cov");
  const auto& dec = lt.decomposition();
  const double m = std::min(t, s);
  const double big = std::max(t, s);
  Eigen::VectorXd g(dec.eigenvalues.size());
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const double theta = c * std::sqrt(dec.eigenvalues[k]);
    g[k] = sigma * sigma / (theta * theta) *
           (std::cos(theta * (t - s)) * m - 0.5 * std::cos(theta * big) * std::sin(theta * m) / theta);
  }
  return spectral_product(dec, g);
}

Eigen::MatrixXd shek_cov_general(const Eigen::MatrixXd& lt, double c, double sigma, double t, double s) {
  require_time(t, "published::shek_cov_general");
  require_time(s, "published::shek_cov_general");
  const Eigen::Index n = lt.rows();
  const Eigen::MatrixXd sum = lt + lt.transpose();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sum);
  if (!lu.isInvertible()) throw NumericError("L̃ + L̃ᵀ is singular");
  const Eigen::MatrixXd growth = expm(c * sum * std::min(t, s)) - Eigen::MatrixXd::Identity(n, n);
  return sigma * sigma / c * expm(-c * lt * t - c * lt.transpose() * s) * growth * lu.inverse();
}

}  // namespace published

std::string to_string(TemporalKind kind) {
  switch (kind) {
    case TemporalKind::rbf: return "rbf";
    case TemporalKind::exponential: return "exponential";
    case TemporalKind::brownian: return "brownian";
    case TemporalKind::cosine: return "cosine";
  }
  return "unknown";
}

TemporalKind temporal_kind_from_string(const std::string& name) {
  if (name == "rbf") return TemporalKind::rbf;
  if (name == "exponential" || name == "exp") return TemporalKind::exponential;
  if (name == "brownian") return TemporalKind::brownian;
  if (name == "cosine") return TemporalKind::cosine;
  throw std::invalid_argument("unknown temporal kernel '" + name + "'");
}

double temporal_kernel(TemporalKind kind, const TemporalParams& p, double t, double s) {
  const double d = t - s;
  switch (kind) {
    case TemporalKind::rbf:
      return p.variance * std::exp(-0.5 * d * d / (p.lengthscale * p.lengthscale));
    case TemporalKind::exponential:
      return p.variance * std::exp(-std::abs(d) / p.lengthscale);
    case TemporalKind::brownian:
      if (t < 0.0 || s < 0.0) throw std::invalid_argument("brownian kernel requires non-negative times");
      return p.variance * std::min(t, s);
    case TemporalKind::cosine:
      return p.variance * std::cos(p.frequency * d);
  }
  return 0.0;
}

}  // namespace graphspde
