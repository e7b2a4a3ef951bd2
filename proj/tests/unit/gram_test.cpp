#include "doctest.h"

#include <graphspde/errors.hpp>
#include <graphspde/gram.hpp>
#include <graphspde/sde.hpp>

#include "support.hpp"

using namespace graphspde;
using testing_support::max_diff;

namespace {

std::vector<STPoint> grid(std::size_t n, const std::vector<double>& times) {
  std::vector<STPoint> pts;
  for (double t : times) {
    for (std::size_t v = 0; v < n; ++v) pts.push_back({v, t});
  }
  return pts;
}

}  // namespace

TEST_SUITE("gram") {

TEST_CASE("kernel names and specs") {
  for (const auto& name : kernel_names()) {
    const auto spec = KernelSpec::from_name(name);
    CHECK(spec.name() == name);
    CHECK_NOTHROW(spec.validate());
  }
  CHECK_THROWS_AS(KernelSpec::from_name("gauss"), std::invalid_argument);
  try {
    KernelSpec::from_name("gauss");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("sep-matern-rbf") != std::string::npos);
  }
  auto spec = KernelSpec::from_name("shek");
  spec.set("c", -1.0);
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.hyper.erase("c");
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  CHECK(KernelSpec::from_name("shek").optimizable() == std::vector<std::string>{"c", "sigma"});
  CHECK(KernelSpec::from_name("swek").optimizable(true).size() == 4);
  CHECK(KernelSpec::from_name("sep-matern-rbf").optimizable() ==
        std::vector<std::string>{"variance", "time_lengthscale"});
}

TEST_CASE("one point Gram equals the kernel variance") {
  const KernelContext ctx(path_graph(3));
  const std::vector<STPoint> one = {{1, 0.7}};
  for (const auto& name : kernel_names()) {
    const auto spec = KernelSpec::from_name(name);
    const auto g = assemble_gram(spec, ctx, one);
    REQUIRE(g.matrix.rows() == 1);
    const Eigen::MatrixXd full = kernel_matrix(spec, ctx, grid(3, {0.7}), grid(3, {0.7}));
    CHECK(g.matrix(0, 0) == doctest::Approx(full(1, 1)));
  }
  auto shek = KernelSpec::from_name("shek");
  const auto lt = ctx.fractional(LaplacianVariant::unnormalized, 2.0, 1.0);
  CHECK(assemble_gram(shek, ctx, one).matrix(0, 0) == doctest::Approx(shek_cov(*lt, 1.0, 1.0, 0.7, 0.7)(1, 1)));
}

TEST_CASE("separable kernels factor at a common time") {
  const KernelContext ctx(path_graph(4));
  auto spec = KernelSpec::from_name("sep-matern-rbf");
  spec.set("variance", 1.7);
  const auto pts = grid(4, {2.0});
  const Eigen::MatrixXd g = assemble_gram(spec, ctx, pts).matrix;
  const Eigen::MatrixXd spatial = matern_graph_kernel(*ctx.laplacian(LaplacianVariant::unnormalized), 1.5, 1.0);
  CHECK(max_diff(g, 1.7 * spatial) < 1e-12);

  auto lap = KernelSpec::from_name("sep-laplacian-exponential");
  const Eigen::MatrixXd a = kernel_matrix(lap, ctx, {{0, 1.0}}, {{2, 3.0}});
  const double expected =
      laplacian_kernel(*ctx.laplacian(LaplacianVariant::unnormalized))(0, 2) * std::exp(-2.0 / lap.get("time_lengthscale"));
  CHECK(a(0, 0) == doctest::Approx(expected));
}

TEST_CASE("SHEK and SWEK Gram blocks match the covariance functions") {
  const KernelContext ctx(path_graph(3));
  const auto lt = ctx.fractional(LaplacianVariant::unnormalized, 2.0, 1.0);
  const std::vector<double> times = {0.5, 1.0, 1.7};
  const auto pts = grid(3, times);
  for (const char* name : {"shek", "swek"}) {
    auto spec = KernelSpec::from_name(name);
    spec.set("c", 0.8);
    spec.set("sigma", 1.3);
    const Eigen::MatrixXd g = assemble_gram(spec, ctx, pts).matrix;
    for (std::size_t a = 0; a < times.size(); ++a) {
      for (std::size_t b = 0; b < times.size(); ++b) {
        const Eigen::MatrixXd block = std::string(name) == "shek" ? shek_cov(*lt, 0.8, 1.3, times[a], times[b])
                                                                  : swek_cov(*lt, 0.8, 1.3, times[a], times[b]);
        CHECK(max_diff(g.block(static_cast<Eigen::Index>(3 * a), static_cast<Eigen::Index>(3 * b), 3, 3), block) <
              1e-12);
      }
    }
  }
}

TEST_CASE("Gram errors") {
  const KernelContext ctx(path_graph(3));
  const auto shek = KernelSpec::from_name("shek");
  CHECK_THROWS_AS(assemble_gram(shek, ctx, {{5, 1.0}}), DataError);
  CHECK_THROWS_AS(assemble_gram(shek, ctx, {{0, -1.0}}), DataError);
  const KernelContext directed(build_graph({"a", "b"}, {{"a", "b", 1.0}}, true));
  CHECK_THROWS(assemble_gram(KernelSpec::from_name("swek"), directed, {{0, 1.0}}));
  auto dshek = KernelSpec::from_name("shek");
  const Eigen::MatrixXd g = assemble_gram(dshek, directed, grid(2, {0.5, 1.0})).matrix;
  CHECK(is_symmetric(g, 1e-12));
  Eigen::Matrix2d lt;
  lt << 1.0 + 4.0, -1.0, 0.0, 4.0;
  CHECK(max_diff(g.block(2, 0, 2, 2), shek_cov_general(lt, 1.0, 1.0, 1.0, 0.5)) < 1e-12);
}

TEST_CASE("modal form reproduces the dense Gram") {
  std::mt19937_64 rng(44);
  for (const auto& name : kernel_names()) {
    const KernelContext ctx(testing_support::random_graph(rng, 4, 0.5, true));
    const auto spec = KernelSpec::from_name(name);
    const auto form = modal_form(spec, ctx);
    REQUIRE(form.has_value());
    const std::vector<double> times = {0.4, 1.1, 2.5};
    const auto pts = grid(4, times);
    const Eigen::MatrixXd dense = assemble_gram(spec, ctx, pts).matrix;
    Eigen::MatrixXd rebuilt(dense.rows(), dense.cols());
    for (Eigen::Index p = 0; p < dense.rows(); ++p) {
      for (Eigen::Index q = 0; q < dense.cols(); ++q) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < form->basis.cols(); ++k) {
          acc += form->basis(static_cast<Eigen::Index>(pts[p].vertex), k) *
                 form->basis(static_cast<Eigen::Index>(pts[q].vertex), k) * form->cov(k, pts[p].time, pts[q].time);
        }
        rebuilt(p, q) = acc;
      }
    }
    CHECK(max_diff(rebuilt, dense) < 1e-10 * std::max(1.0, max_abs(dense)));
  }
  const KernelContext directed(build_graph({"a", "b"}, {{"a", "b", 1.0}}, true));
  CHECK_FALSE(modal_form(KernelSpec::from_name("shek"), directed).has_value());
}

TEST_CASE("context caches are reused") {
  const KernelContext ctx(path_graph(5));
  const auto a = ctx.fractional(LaplacianVariant::unnormalized, 2.0, 1.0);
  const auto b = ctx.fractional(LaplacianVariant::unnormalized, 2.0, 1.0);
  CHECK(a.get() == b.get());
  CHECK(ctx.laplacian(LaplacianVariant::unnormalized).get() == ctx.laplacian(LaplacianVariant::unnormalized).get());
}

TEST_CASE("PSD over randomized configurations") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> time(0.0, 5.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 10);
    const KernelContext ctx(testing_support::random_graph(rng, n, 0.3, false, 0.1, 10.0));
    const auto& names = kernel_names();
    auto spec = KernelSpec::from_name(names[static_cast<std::size_t>(trial) % names.size()]);
    for (auto& [k, v] : spec.hyper) v = testing_support::log_uniform(rng, 0.1, 10.0);
    std::vector<double> times;
    const int n_times = 1 + trial % 8;
    for (int i = 0; i < n_times; ++i) times.push_back(time(rng));
    const Eigen::MatrixXd g = assemble_gram(spec, ctx, grid(n, times)).matrix;
    CHECK(max_diff(g, g.transpose()) <= 1e-8 * std::max(1.0, max_abs(g)));
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues();
    CHECK(ev.minCoeff() >= -1e-6 * std::max(ev.maxCoeff(), 0.0));
  }
}

TEST_CASE("SHEK Gram against Euler-Maruyama paths") {
  // 3 vertices × 4 times, 50 000 paths
  const KernelContext ctx(path_graph(3));
  const auto spec = KernelSpec::from_name("shek");
  const std::vector<double> times = {0.25, 0.5, 0.75, 1.0};
  const Eigen::MatrixXd g = assemble_gram(spec, ctx, grid(3, times)).matrix;
  const auto lt = ctx.fractional(LaplacianVariant::unnormalized, 2.0, 1.0);
  SimulationOptions opts;
  opts.dt = 1e-3;
  opts.t_end = 1.0;
  opts.n_paths = 50000;
  opts.seed = 17;
  opts.record_stride = 250;
  const PathEnsemble ens = simulate_heat(lt->matrix(), 1.0, 1.0, Eigen::VectorXd::Zero(3), opts);
  Eigen::MatrixXd emp(12, 12);
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      const auto est = empirical_cross_cov(ens, ens.time_index(times[a]), ens.time_index(times[b]));
      emp.block(static_cast<Eigen::Index>(3 * a), static_cast<Eigen::Index>(3 * b), 3, 3) = est.cov;
    }
  }
  const double rel = (emp - g).norm() / g.norm();
  CHECK(rel < 0.05);
  CHECK(max_diff(emp, g) < 0.01 * max_abs(g));
}

}
