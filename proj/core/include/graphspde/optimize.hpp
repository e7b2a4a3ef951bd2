#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace graphspde {

struct BfgsOptions {
  int max_iters = 200;
  double grad_tol = 1e-6;
  double fd_step = 1e-5;
  /// Stop once an iteration improves the objective by less than this, relative.
  double rel_tol = 1e-10;
  /// Cap on the ∞-norm of a single step.
  double max_step = 2.0;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
};

/// Central-difference gradient of f at x.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                            double step);

/// Maximizes f with BFGS and Armijo backtracking, using central finite
/// differences for gradients. Iterates are clamped to [lower, upper] when
/// given. Non-finite or throwing evaluations count as -∞ during line search.
/// `trace` starts with f(x0) and has at most max_iters entries.
BfgsResult maximize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                         const BfgsOptions& opts);

}  // namespace graphspde
