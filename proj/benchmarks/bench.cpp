#include <benchmark/benchmark.h>

#include <random>

#include <graphspde/graphspde.hpp>

using namespace graphspde;

namespace {

SpatioTemporalDataset grid_dataset(std::size_t n, std::size_t n_times) {
  SpatioTemporalDataset d{path_graph(n), {}};
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  for (std::size_t k = 0; k < n_times; ++k) {
    for (std::size_t v = 0; v < n; ++v) d.observations.push_back({{v, 1.0 + static_cast<double>(k)}, normal(rng)});
  }
  return d;
}

void BM_Gram(benchmark::State& state, const char* kernel) {
  const auto d = grid_dataset(static_cast<std::size_t>(state.range(0)), 20);
  const KernelContext ctx(d.graph);
  const auto spec = KernelSpec::from_name(kernel);
  const auto pts = d.points();
  for (auto _ : state) benchmark::DoNotOptimize(assemble_gram(spec, ctx, pts));
}
BENCHMARK_CAPTURE(BM_Gram, shek, "shek")->Arg(5)->Arg(21);
BENCHMARK_CAPTURE(BM_Gram, swek, "swek")->Arg(5)->Arg(21);
BENCHMARK_CAPTURE(BM_Gram, sep_matern_rbf, "sep-matern-rbf")->Arg(5)->Arg(21);

void BM_Lml(benchmark::State& state, LmlMethod method) {
  const auto d = grid_dataset(21, static_cast<std::size_t>(state.range(0)));
  const KernelContext ctx(d.graph);
  GPModel m;
  m.kernel = KernelSpec::from_name("shek");
  for (auto _ : state) benchmark::DoNotOptimize(log_marginal_likelihood(m, ctx, d, method));
}
BENCHMARK_CAPTURE(BM_Lml, dense, LmlMethod::dense)->Arg(10)->Arg(50);
BENCHMARK_CAPTURE(BM_Lml, modal, LmlMethod::automatic)->Arg(10)->Arg(50);

void BM_EulerMaruyama(benchmark::State& state) {
  const auto lt = fractional_laplacian(laplacian(path_graph(5)), 2.0, 1.0);
  SimulationOptions o;
  o.n_paths = static_cast<std::size_t>(state.range(0));
  o.record_stride = 100;
  o.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_heat(lt.matrix(), 1.0, 1.0, Eigen::VectorXd::Zero(5), o));
  }
}
BENCHMARK(BM_EulerMaruyama)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
