#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include <graphspde/optimize.hpp>

using namespace graphspde;

TEST_SUITE("optimize") {

TEST_CASE("fd gradient of a quadratic") {
  auto f = [](const Eigen::VectorXd& x) { return -(x[0] - 1.0) * (x[0] - 1.0) - 3.0 * x[1] * x[1]; };
  Eigen::VectorXd x(2);
  x << 0.0, 2.0;
  const Eigen::VectorXd g = fd_gradient(f, x, 1e-5);
  CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(g[1] == doctest::Approx(-12.0).epsilon(1e-8));
}

TEST_CASE("BFGS maximizes a concave quadratic and Rosenbrock") {
  BfgsOptions opts;
  auto quad = [](const Eigen::VectorXd& x) { return -(x[0] - 1.0) * (x[0] - 1.0) - 3.0 * (x[1] + 0.5) * (x[1] + 0.5); };
  auto r = maximize_bfgs(quad, Eigen::VectorXd::Zero(2), opts);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.x[1] == doctest::Approx(-0.5).epsilon(1e-5));
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] >= r.trace[i - 1]);

  auto rosen = [](const Eigen::VectorXd& x) {
    return -(100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2));
  };
  opts.max_iters = 500;
  Eigen::VectorXd x0(2);
  x0 << -1.2, 1.0;
  r = maximize_bfgs(rosen, x0, opts);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("iteration budget and bounds") {
  auto f = [](const Eigen::VectorXd& x) { return -x.squaredNorm(); };
  BfgsOptions opts;
  opts.max_iters = 1;
  Eigen::VectorXd x0 = Eigen::VectorXd::Constant(2, 3.0);
  auto r = maximize_bfgs(f, x0, opts);
  CHECK(r.trace.size() == 1);
  CHECK(r.x == x0);

  opts.max_iters = 100;
  opts.lower = Eigen::VectorXd::Constant(2, 1.0);
  opts.upper = Eigen::VectorXd::Constant(2, 5.0);
  r = maximize_bfgs(f, x0, opts);
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.x[1] == doctest::Approx(1.0));
}

TEST_CASE("throwing evaluations are treated as infeasible") {
  auto f = [](const Eigen::VectorXd& x) {
    if (x[0] > 2.0) throw std::domain_error("outside");
    return -(x[0] - 3.0) * (x[0] - 3.0);
  };
  BfgsOptions opts;
  auto r = maximize_bfgs(f, Eigen::VectorXd::Zero(1), opts);
  CHECK(r.x[0] <= 2.0);
  CHECK(r.value > -9.0);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] >= r.trace[i - 1]);
}

}
