#pragma once

#include <Eigen/Dense>

#include <string>

#include "graphspde/graph.hpp"
#include "graphspde/spectral.hpp"

namespace graphspde {

// Spatial graph kernels ------------------------------------------------------

/// (LᵀL)⁺, the covariance of solutions of L v = w.
Eigen::MatrixXd laplacian_kernel(const LaplacianMatrix& L);

/// (2ν/κ² I + L)^{-ν}. Requires symmetric L.
Eigen::MatrixXd matern_graph_kernel(const LaplacianMatrix& L, double nu, double kappa);

// Heat semigroup -------------------------------------------------------------

/// e^{-cLt}. Symmetric L goes through its spectrum, asymmetric L (random-walk
/// or directed) through the Padé exponential.
Eigen::MatrixXd heat_semigroup(const LaplacianMatrix& L, double c, double t);

/// Σ_{k<K} tᵏe^{-t}/k! Pᵏ with P = I - L_rw: the continuous-time random walk
/// expansion of e^{-L_rw t}.
Eigen::MatrixXd heat_random_walk_check(const LaplacianMatrix& L_rw, double t, int k_terms);

// Stochastic heat equation kernel (SHEK) -------------------------------------
//
// du = -c L̃ u dt + σ dW, u(0) deterministic. Cross-covariances follow the
// convention Cov[u(t),u(s)]_{ij} = E[(u_i(t)-μ_i(t))(u_j(s)-μ_j(s))].

/// (σ²/2c)(e^{-cL̃|t-s|} - e^{-cL̃(t+s)}) L̃^{-1} over the spectrum of L̃.
Eigen::MatrixXd shek_cov(const FractionalLaplacian& lt, double c, double sigma, double t, double s);

/// Exact cross-covariance for an arbitrary (possibly asymmetric) L̃:
/// e^{-cL̃(t-s)} ∫_0^s e^{-cL̃r} σ² e^{-cL̃ᵀr} dr for t ≥ s, via Van Loan's block
/// exponential. Coincides with the closed form when L̃ is normal.
Eigen::MatrixXd shek_cov_general(const Eigen::MatrixXd& lt, double c, double sigma, double t, double s);

/// e^{-cL̃t} u0.
Eigen::VectorXd shek_mean(const FractionalLaplacian& lt, double c, const Eigen::VectorXd& u0, double t);

/// Cross-covariance for du = -cL̃u dt + Σ dW, evaluated elementwise over the
/// spectrum of L̃ (see modal::shek_pair).
Eigen::MatrixXd shek_matrix_noise_cov(const FractionalLaplacian& lt, double c, const Eigen::MatrixXd& noise,
                                      double t, double s);

/// Stationary covariance C solving L̃C + CL̃ᵀ = ΣΣᵀ (Bartels–Stewart on the
/// complex Schur form). Throws NumericError when λ_i + conj(λ_j) ≈ 0.
Eigen::MatrixXd lyapunov_stationary(const Eigen::MatrixXd& lt, const Eigen::MatrixXd& noise);

// Wave equation --------------------------------------------------------------

/// Solution of ü = -c²Lu with u(0)=u0, u̇(0)=v0, mode by mode in the
/// eigenbasis of L. Zero modes move freely: y(t) = y(0) + ẏ(0)t.
Eigen::VectorXd wave_solution(const LaplacianMatrix& L, double c, const Eigen::VectorXd& u0,
                              const Eigen::VectorXd& v0, double t);

/// Stochastic wave equation kernel: cross-covariance of ü = -c²L̃u + σẆ with
/// deterministic initial state. Per eigenvalue μ with θ = c√μ:
///   σ²θ⁻² (½ cos(θ(t-s)) min(t,s) - ½ cos(θ max(t,s)) sin(θ min(t,s)) θ⁻¹).
Eigen::MatrixXd swek_cov(const FractionalLaplacian& lt, double c, double sigma, double t, double s);

/// Mean of the stochastic wave process: cos(Θt)u0 + Θ⁻¹sin(Θt)v0, Θ = c√L̃.
Eigen::VectorXd swek_mean(const FractionalLaplacian& lt, double c, const Eigen::VectorXd& u0,
                          const Eigen::VectorXd& v0, double t);

/// Alternative closed forms found in the literature. They disagree
/// with the Itô integrals (see tests) and are kept only for comparison.
namespace published {
/// σ²Θ⁻²(cos(Θ(t-s)) min(t,s) - ½ cos(Θ max) sin(Θ min) Θ⁻¹).
Eigen::MatrixXd swek_cov(const FractionalLaplacian& lt, double c, double sigma, double t, double s);
/// (σ²/c) e^{-cL̃t - cL̃ᵀs}(e^{c(L̃+L̃ᵀ)min(t,s)} - I)(L̃+L̃ᵀ)^{-1}.
Eigen::MatrixXd shek_cov_general(const Eigen::MatrixXd& lt, double c, double sigma, double t, double s);
}  // namespace published

/// Scalar per-eigenvalue covariance functions shared by every spectral path.
namespace modal {
/// (1 - e^{-x m}) / x, continuous at x = 0.
double decay_integral(double x, double m);
/// Cov of mode with eigenvalue mu under scalar-noise SHEK.
double shek(double mu, double c, double sigma, double t, double s);
/// Entry (i,j) of the matrix-noise SHEK covariance in the eigenbasis for
/// t ≥ s, with q = (VᵀΣΣᵀV)_{ij}.
double shek_pair(double mu_i, double mu_j, double q, double c, double t, double s);
/// Cov of mode with eigenvalue mu under SWEK.
double swek(double mu, double c, double sigma, double t, double s);
}  // namespace modal

// Temporal base kernels ------------------------------------------------------

enum class TemporalKind { rbf, exponential, brownian, cosine };

std::string to_string(TemporalKind kind);
TemporalKind temporal_kind_from_string(const std::string& name);

struct TemporalParams {
  double variance = 1.0;
  double lengthscale = 1.0;
  double frequency = 1.0;  ///< ω for the cosine kernel
};

/// rbf: v·exp(-(t-s)²/2ℓ²); exponential: v·exp(-|t-s|/ℓ); brownian: v·min(t,s)
/// (t, s ≥ 0); cosine: v·cos(ω(t-s)).
double temporal_kernel(TemporalKind kind, const TemporalParams& params, double t, double s);

}  // namespace graphspde
