#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <graphspde/data_io.hpp>
#include <graphspde/gp.hpp>
#include <graphspde/gram.hpp>

namespace graphspde::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

/// Runs `body`, mapping exceptions to exit codes: std::invalid_argument and
/// other usage problems → 1, DataError → 2, NumericError and std::domain_error → 3.
int run_guarded(const std::function<int()>& body, std::ostream& err);

struct GlobalOptions {
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::filesystem::path out = ".";
};

/// Where observations come from: a synthetic generator, or graph + series CSVs.
struct DataOptions {
  std::string kind = "heat-line";
  std::size_t nodes = 0;  ///< 0: 21 for heat-line, 11 for wave-line
  double k = 1.0;
  double speed = 1.0;
  std::string times = "1:50";
  double noise_sd = 0.0;
  std::string graph_csv;
  std::string series_csv;
  bool directed = false;
};

struct ModelOptions {
  /// "name=value" applies to every kernel with that hyperparameter,
  /// "kernel.name=value" to one kernel.
  std::vector<std::string> hyper;
  double noise = 1e-2;
  std::string mean_policy = "per-node";
  double time_offset = 1.0;
  bool raw_times = false;
  std::string laplacian = "unnormalized";
};

struct SynthOptions {
  DataOptions data;
};

struct BacktestOptions {
  DataOptions data;
  ModelOptions model;
  std::string kernels = "shek,sep-laplacian-rbf,sep-matern-rbf";
  std::string baseline = "shek";
  std::size_t n_train = 50;
  std::size_t n_test = 10;
  std::size_t stride = 1;
  std::size_t rounds = 10;
  std::string tasks = "interpolation,extrapolation";
  double interp_fraction = 0.1;
  int restarts = 3;
  int max_iters = 200;
  bool include_smoothness = false;
  std::size_t dm_horizon = 1;
};

struct ValidateOptions {
  std::string kernel = "shek";
  std::size_t nodes = 3;
  std::string graph_csv;
  bool directed = false;
  std::string laplacian = "unnormalized";
  double c = 1.0;
  double sigma = 1.0;
  double nu = 2.0;
  double kappa = 1.0;
  double dt = 1e-3;
  std::size_t paths = 50000;
  std::string times = "0.5,1";
  double threshold = 4.0;
};

struct SampleOptions {
  std::string kernel = "shek";
  std::size_t nodes = 3;
  std::string graph_csv;
  std::string cs = "1";
  std::string times = "0:0.05:2";
  double condition_time = 0.0;
  std::string condition_values = "0,0,10";  ///< empty: sample the prior
  int samples = 5;
  ModelOptions model{{}, 1e-8, "zero", 1.0, false, "unnormalized"};
};

struct FitCommandOptions {
  DataOptions data;
  ModelOptions model;
  std::string kernel = "shek";
  int restarts = 3;
  int max_iters = 200;
  bool include_smoothness = false;
};

/// graph.csv, series.csv and provenance.json under g.out.
int cmd_synth(const GlobalOptions& g, const SynthOptions& o, std::ostream& log);
/// results.csv, rounds.csv (hyperparameters, wall times) and summary.txt.
/// Returns kNumeric when every round of every kernel failed.
int cmd_backtest(const GlobalOptions& g, const BacktestOptions& o, std::ostream& log);
/// validate.csv with analytic vs Monte Carlo entries; kNumeric on FAIL.
int cmd_validate_kernel(const GlobalOptions& g, const ValidateOptions& o, std::ostream& log);
/// One tidy CSV per c value: c,node,t,quantity,value.
int cmd_sample(const GlobalOptions& g, const SampleOptions& o, std::ostream& log);
/// fit.json with the fitted model and LML trace.
int cmd_fit(const GlobalOptions& g, const FitCommandOptions& o, std::ostream& log);

// Helpers shared with tests.
SyntheticSpec synthetic_spec(const DataOptions& d, std::uint64_t seed);
SpatioTemporalDataset load_dataset(const DataOptions& d, std::uint64_t seed);
std::vector<KernelSpec> parse_kernels(const std::string& names, const ModelOptions& m, bool allow_empty = false);
std::vector<double> parse_list(const std::string& text);
std::filesystem::path sample_file_name(double c);

}  // namespace graphspde::cli
