#include "graphspde_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include <graphspde/errors.hpp>
#include <graphspde/kernels.hpp>
#include <graphspde/sde.hpp>

#include "graphspde_cli/backtest.hpp"

namespace graphspde::cli {

using nlohmann::json;

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::domain_error& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  }
}

std::vector<double> parse_list(const std::string& text) { return parse_time_grid(text); }

SyntheticSpec synthetic_spec(const DataOptions& d, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.kind = synthetic_kind_from_string(d.kind);
  spec.n_nodes = d.nodes != 0 ? d.nodes : (spec.kind == SyntheticKind::heat_line ? 21 : 11);
  spec.conductivity = d.k;
  spec.wave_speed = d.speed;
  spec.timestamps = parse_time_grid(d.times);
  spec.noise_sd = d.noise_sd;
  spec.seed = seed;
  return spec;
}

SpatioTemporalDataset load_dataset(const DataOptions& d, std::uint64_t seed) {
  if (d.graph_csv.empty() != d.series_csv.empty()) {
    throw std::invalid_argument("--graph-csv and --series-csv must be given together");
  }
  if (!d.graph_csv.empty()) {
    const Graph g = load_graph_csv(d.graph_csv, d.directed);
    return load_series_csv(d.series_csv, g);
  }
  return generate(synthetic_spec(d, seed)).dataset;
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, sep);) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_value(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument("malformed value for " + what + ": '" + text + "'");
  return v;
}

void apply_hyper(std::vector<KernelSpec>& kernels, const std::vector<std::string>& overrides) {
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("hyperparameter override '" + item + "' lacks '='");
    std::string key = item.substr(0, eq);
    const double value = parse_value(item.substr(eq + 1), key);
    const auto dot = key.rfind('.');
    if (dot == std::string::npos) {
      bool used = false;
      for (auto& k : kernels) {
        if (k.hyper.contains(key)) {
          k.set(key, value);
          used = true;
        }
      }
      if (!used && !kernels.empty()) throw std::invalid_argument("no configured kernel has hyperparameter '" + key + "'");
    } else {
      const std::string kernel = key.substr(0, dot);
      const std::string name = key.substr(dot + 1);
      auto it = std::find_if(kernels.begin(), kernels.end(), [&](const KernelSpec& k) { return k.name() == kernel; });
      if (it == kernels.end()) throw std::invalid_argument("override '" + item + "' names a kernel that is not configured");
      if (!it->hyper.contains(name)) throw std::invalid_argument("kernel " + kernel + " has no hyperparameter '" + name + "'");
      it->set(name, value);
    }
  }
}

GPModel make_model(const KernelSpec& spec, const ModelOptions& m) {
  GPModel model;
  model.kernel = spec;
  model.noise_variance = m.noise;
  model.mean_policy = mean_policy_from_string(m.mean_policy);
  if (m.raw_times) model.time_offset.reset();
  else model.time_offset = m.time_offset;
  return model;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

Graph graph_for(std::size_t nodes, const std::string& csv, bool directed) {
  if (!csv.empty()) return load_graph_csv(csv, directed);
  if (nodes == 0) throw std::invalid_argument("graph needs at least one vertex");
  if (nodes == 1) return build_graph({"v0"}, {}, directed);
  return path_graph(nodes, "v");
}

}  // namespace

std::vector<KernelSpec> parse_kernels(const std::string& names, const ModelOptions& m, bool allow_empty) {
  std::vector<KernelSpec> kernels;
  const auto variant = laplacian_variant_from_string(m.laplacian);
  for (const auto& name : split(names, ',')) {
    auto spec = KernelSpec::from_name(name);
    spec.laplacian_variant = variant;
    kernels.push_back(spec);
  }
  if (kernels.empty() && !allow_empty) throw std::invalid_argument("no kernels given");
  apply_hyper(kernels, m.hyper);
  for (const auto& k : kernels) k.validate();
  return kernels;
}

std::filesystem::path sample_file_name(double c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "sample_c%g.csv", c);
  return buf;
}

int cmd_synth(const GlobalOptions& g, const SynthOptions& o, std::ostream& log) {
  const SyntheticSpec spec = synthetic_spec(o.data, g.seed);
  const SyntheticData data = generate(spec);
  ensure_dir(g.out);
  write_graph_csv(g.out / "graph.csv", data.dataset.graph);
  write_series_csv(g.out / "series.csv", data.dataset);

  json prov;
  prov["kind"] = to_string(spec.kind);
  prov["nodes"] = spec.n_nodes;
  if (spec.kind == SyntheticKind::heat_line) prov["k"] = spec.conductivity;
  else prov["speed"] = spec.wave_speed;
  prov["times"] = o.data.times;
  prov["n_timestamps"] = spec.timestamps.size();
  prov["noise_sd"] = spec.noise_sd;
  prov["seed"] = spec.seed;
  prov["coordinates"] = data.coordinates;
  write_text(g.out / "provenance.json", prov.dump(2) + "\n");

  log << "wrote " << data.dataset.graph.n_vertices() << " vertices, " << data.dataset.size() << " observations to "
      << g.out.string() << '\n';
  return kOk;
}

int cmd_backtest(const GlobalOptions& g, const BacktestOptions& o, std::ostream& log) {
  BacktestSettings s;
  s.kernels = parse_kernels(o.kernels, o.model);
  s.baseline = o.baseline;
  s.plan = {o.n_train, o.n_test, o.stride, o.rounds, g.seed};
  s.tasks.clear();
  for (const auto& t : split(o.tasks, ',')) s.tasks.push_back(task_from_string(t));
  s.interp_fraction = o.interp_fraction;
  s.noise_variance = o.model.noise;
  s.mean_policy = mean_policy_from_string(o.model.mean_policy);
  if (o.model.raw_times) s.time_offset.reset();
  else s.time_offset = o.model.time_offset;
  s.fit.restarts = o.restarts;
  s.fit.max_iters = o.max_iters;
  s.fit.include_smoothness = o.include_smoothness;
  s.fit.seed = g.seed;
  s.dm_horizon = o.dm_horizon;
  s.jobs = std::max(1u, g.jobs);

  const auto data = load_dataset(o.data, g.seed);
  const BacktestReport report = run_backtest(data, s);

  ensure_dir(g.out);
  write_results_csv(g.out / "results.csv", report);
  write_rounds_detail_csv(g.out / "rounds.csv", report);
  const std::string summary = format_summary(report, s);
  write_text(g.out / "summary.txt", summary);
  log << summary;
  char buf[64];
  std::snprintf(buf, sizeof buf, "wall time %.1f s\n", report.wall_time);
  log << buf;

  const bool any_ok = std::any_of(report.rounds.begin(), report.rounds.end(), [](const RoundRecord& r) { return r.ok; });
  if (!any_ok) {
    log << "every round failed\n";
    return kNumeric;
  }
  return kOk;
}

int cmd_validate_kernel(const GlobalOptions& g, const ValidateOptions& o, std::ostream& log) {
  const bool wave = o.kernel == "swek";
  if (!wave && o.kernel != "shek") throw std::invalid_argument("validate-kernel supports shek and swek, got '" + o.kernel + "'");
  const Graph graph = graph_for(o.nodes, o.graph_csv, o.directed);
  const LaplacianMatrix L = laplacian(graph, laplacian_variant_from_string(o.laplacian));
  if (!(o.dt > 0.0)) throw std::invalid_argument("dt must be positive");

  std::vector<double> times = parse_list(o.times);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  std::vector<long long> steps;
  for (double t : times) {
    if (!(t > 0.0)) throw std::invalid_argument("validation times must be positive");
    const long long k = std::llround(t / o.dt);
    if (k == 0) throw std::invalid_argument("validation time " + format_double(t) + " is below dt");
    steps.push_back(k);
  }
  // Times off the step grid are snapped to it; the analytic side uses the snapped value.
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = static_cast<double>(steps[i]) * o.dt;
  long long stride = 0;
  for (auto k : steps) stride = std::gcd(stride, k);

  Eigen::MatrixXd lt_matrix;
  std::function<Eigen::MatrixXd(double, double)> analytic;
  std::optional<FractionalLaplacian> frac;
  if (L.symmetric) {
    frac.emplace(fractional_laplacian(L, o.nu, o.kappa));
    lt_matrix = frac->matrix();
    analytic = [&](double t, double s) {
      return wave ? swek_cov(*frac, o.c, o.sigma, t, s) : shek_cov(*frac, o.c, o.sigma, t, s);
    };
  } else {
    if (wave) throw std::invalid_argument("swek needs a symmetric Laplacian");
    if (o.nu != 2.0) throw std::invalid_argument("asymmetric Laplacians support nu = 2 only");
    lt_matrix = L.matrix;
    lt_matrix.diagonal().array() += 2.0 * o.nu / (o.kappa * o.kappa);
    analytic = [&](double t, double s) { return shek_cov_general(lt_matrix, o.c, o.sigma, t, s); };
  }

  SimulationOptions sim;
  sim.dt = o.dt;
  sim.t_end = times.back();
  sim.n_paths = o.paths;
  sim.seed = g.seed;
  sim.record_stride = static_cast<std::size_t>(stride);
  sim.threads = std::max(1u, g.jobs);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(lt_matrix.rows());
  const PathEnsemble ens =
      wave ? simulate_wave(lt_matrix, o.c, o.sigma, zero, zero, sim) : simulate_heat(lt_matrix, o.c, o.sigma, zero, sim);

  ensure_dir(g.out);
  std::ofstream csv(g.out / "validate.csv", std::ios::binary);
  if (!csv) throw DataError("cannot write " + (g.out / "validate.csv").string());
  csv << "t,s,i,j,analytic,empirical,se,z\n";

  double worst = 0.0;
  std::size_t exceed = 0;
  std::size_t total = 0;
  log << std::setprecision(5);
  log << o.kernel << " on " << graph.n_vertices() << " vertices, c=" << o.c << " sigma=" << o.sigma << " nu=" << o.nu
      << " kappa=" << o.kappa << ", " << o.paths << " paths, dt=" << o.dt << "\n";
  for (std::size_t a = 0; a < times.size(); ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      const double t = times[a];
      const double s = times[b];
      const Eigen::MatrixXd exact = analytic(t, s);
      const CrossCovEstimate est = empirical_cross_cov(ens, ens.time_index(t), ens.time_index(s));
      log << "(t, s) = (" << t << ", " << s << ")\n  i j  analytic  empirical  se\n";
      for (Eigen::Index i = 0; i < exact.rows(); ++i) {
        for (Eigen::Index j = 0; j < exact.cols(); ++j) {
          const double diff = std::abs(exact(i, j) - est.cov(i, j));
          const double z = est.se(i, j) > 0.0 ? diff / est.se(i, j) : (diff > 0.0 ? INFINITY : 0.0);
          worst = std::max(worst, z);
          exceed += z > o.threshold;
          ++total;
          csv << format_double(t) << ',' << format_double(s) << ',' << i << ',' << j << ',' << format_double(exact(i, j))
              << ',' << format_double(est.cov(i, j)) << ',' << format_double(est.se(i, j)) << ',' << format_double(z)
              << '\n';
          log << "  " << i << ' ' << j << "  " << exact(i, j) << "  " << est.cov(i, j) << "  " << est.se(i, j) << '\n';
        }
      }
    }
  }
  const bool pass = exceed == 0;
  log << "max |analytic - empirical| / SE = " << worst << " over " << total << " entries\n";
  log << (pass ? "PASS" : "FAIL") << " at " << o.threshold << " SE\n";
  return pass ? kOk : kNumeric;
}

int cmd_sample(const GlobalOptions& g, const SampleOptions& o, std::ostream& log) {
  if (o.samples < 0) throw std::invalid_argument("samples must be non-negative");
  const Graph graph = graph_for(o.nodes, o.graph_csv, false);
  auto kernels = parse_kernels(o.kernel, o.model);
  if (kernels.size() != 1) throw std::invalid_argument("sample takes exactly one kernel");
  const KernelContext ctx(graph);
  const auto times = parse_list(o.times);
  const auto cs = parse_list(o.cs);

  std::vector<STPoint> points;
  for (double t : times) {
    for (std::size_t v = 0; v < graph.n_vertices(); ++v) points.push_back({v, t});
  }
  std::optional<SpatioTemporalDataset> condition;
  if (!o.condition_values.empty()) {
    const auto values = parse_list(o.condition_values);
    if (values.size() != graph.n_vertices()) {
      throw std::invalid_argument("expected " + std::to_string(graph.n_vertices()) + " conditioning values, got " +
                                  std::to_string(values.size()));
    }
    SpatioTemporalDataset data{graph, {}};
    for (std::size_t v = 0; v < values.size(); ++v) data.observations.push_back({{v, o.condition_time}, values[v]});
    condition = std::move(data);
  }

  ensure_dir(g.out);
  for (double c : cs) {
    KernelSpec spec = kernels.front();
    if (spec.hyper.contains("c")) spec.set("c", c);
    else if (cs.size() > 1) throw std::invalid_argument("kernel " + spec.name() + " has no diffusivity c to sweep");
    spec.validate();
    GPModel model = make_model(spec, o.model);
    const SampleResult res = sample(model, ctx, points, o.samples, g.seed, condition);

    const auto path = g.out / sample_file_name(c);
    std::ofstream csv(path, std::ios::binary);
    if (!csv) throw DataError("cannot write " + path.string());
    csv << "c,node,t,quantity,value\n";
    const std::string cs_text = format_double(c);
    for (std::size_t p = 0; p < points.size(); ++p) {
      const auto i = static_cast<Eigen::Index>(p);
      const std::string prefix =
          cs_text + ',' + graph.labels()[points[p].vertex] + ',' + format_double(points[p].time) + ',';
      const double half = 1.96 * std::sqrt(res.variance[i]);
      csv << prefix << "mean," << format_double(res.mean[i]) << '\n';
      csv << prefix << "lower," << format_double(res.mean[i] - half) << '\n';
      csv << prefix << "upper," << format_double(res.mean[i] + half) << '\n';
      for (int s = 0; s < o.samples; ++s) {
        csv << prefix << "sample_" << s << ',' << format_double(res.samples(s, i)) << '\n';
      }
    }
    if (!csv) throw DataError("failed writing " + path.string());
    log << "wrote " << path.string() << '\n';
  }
  return kOk;
}

int cmd_fit(const GlobalOptions& g, const FitCommandOptions& o, std::ostream& log) {
  const auto kernels = parse_kernels(o.kernel, o.model);
  if (kernels.size() != 1) throw std::invalid_argument("fit takes exactly one kernel");
  const auto data = load_dataset(o.data, g.seed);
  const KernelContext ctx(data.graph);
  FitOptions fo;
  fo.restarts = o.restarts;
  fo.max_iters = o.max_iters;
  fo.include_smoothness = o.include_smoothness;
  fo.seed = g.seed;
  const FitResult res = fit(make_model(kernels.front(), o.model), ctx, data, fo);

  json out;
  out["kernel"] = res.model.kernel.name();
  out["hyperparameters"] = res.model.kernel.hyper;
  out["noise_variance"] = res.model.noise_variance;
  out["mean_policy"] = to_string(res.model.mean_policy);
  out["lml"] = res.lml;
  out["trace"] = res.trace;
  out["restarts_failed"] = res.restarts_failed;
  out["n_observations"] = data.size();
  ensure_dir(g.out);
  write_text(g.out / "fit.json", out.dump(2) + "\n");

  log << std::setprecision(6) << res.model.kernel.name() << ": lml " << res.lml << " after " << res.trace.size()
      << " iterations\n";
  for (const auto& [k, v] : res.model.kernel.hyper) log << "  " << k << " = " << v << '\n';
  log << "  noise_variance = " << res.model.noise_variance << '\n';
  return kOk;
}

}  // namespace graphspde::cli
