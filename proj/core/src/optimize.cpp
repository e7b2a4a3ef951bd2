#include "graphspde/optimize.hpp"

#include <cmath>
#include <exception>
#include <limits>

#include "graphspde/errors.hpp"

namespace graphspde {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::VectorXd clamp(const Eigen::VectorXd& x, const BfgsOptions& opts) {
  Eigen::VectorXd out = x;
  if (opts.lower.size() == x.size()) out = out.cwiseMax(opts.lower);
  if (opts.upper.size() == x.size()) out = out.cwiseMin(opts.upper);
  return out;
}

double safe_eval(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x) {
  try {
    const double v = f(x);
    return std::isfinite(v) ? v : kNegInf;
  } catch (const std::exception&) {
    return kNegInf;
  }
}

}  // namespace

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                            double step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = f(probe);
    probe[i] = x[i] - step;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

BfgsResult maximize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                         const BfgsOptions& opts) {
  BfgsResult res;
  res.x = clamp(x0, opts);
  res.value = f(res.x);
  if (!std::isfinite(res.value)) throw NumericError("objective is not finite at the starting point");
  res.trace.push_back(res.value);

  // Work with the negated objective so the update reads as minimization.
  auto neg = [&](const Eigen::VectorXd& x) { return -f(clamp(x, opts)); };
  const Eigen::Index n = res.x.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g;
  try {
    g = fd_gradient(neg, res.x, opts.fd_step);
  } catch (const std::exception&) {
    return res;
  }
  if (!g.allFinite()) return res;

  bool first_step = true;
  while (static_cast<int>(res.trace.size()) < opts.max_iters) {
    if (g.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd dir = -h * g;
    if (dir.dot(g) >= 0.0) {  // lost descent; fall back to steepest descent
      h.setIdentity();
      dir = -g;
    }
    const double longest = dir.lpNorm<Eigen::Infinity>();
    if (longest > opts.max_step) dir *= opts.max_step / longest;

    double alpha = 1.0;
    const double slope = g.dot(dir);
    const double f0 = -res.value;
    Eigen::VectorXd x_new;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int k = 0; k < 40; ++k) {
      x_new = clamp(res.x + alpha * dir, opts);
      f_new = -safe_eval(f, x_new);
      if (f_new <= f0 + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;

    Eigen::VectorXd g_new;
    try {
      g_new = fd_gradient(neg, x_new, opts.fd_step);
    } catch (const std::exception&) {
      g_new = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
    }
    const Eigen::VectorXd s = x_new - res.x;
    const double improvement = f0 - f_new;
    res.x = x_new;
    res.value = -f_new;
    res.trace.push_back(res.value);
    ++res.iterations;
    if (!g_new.allFinite()) break;

    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (first_step) {
        h = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
        first_step = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
      h = (id - rho * s * y.transpose()) * h * (id - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    g = g_new;
    if (improvement <= opts.rel_tol * (1.0 + std::abs(f0))) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace graphspde
