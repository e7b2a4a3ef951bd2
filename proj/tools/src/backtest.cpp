#include "graphspde_cli/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <graphspde/data_io.hpp>
#include <graphspde/errors.hpp>

namespace graphspde::cli {

std::string to_string(Task task) { return task == Task::interpolation ? "interpolation" : "extrapolation"; }

Task task_from_string(const std::string& name) {
  if (name == "interpolation" || name == "int") return Task::interpolation;
  if (name == "extrapolation" || name == "ext") return Task::extrapolation;
  throw std::invalid_argument("unknown task '" + name + "' (expected interpolation or extrapolation)");
}

const SummaryRow* BacktestReport::find(const std::string& kernel, Task task) const {
  for (const auto& row : summary) {
    if (row.kernel == kernel && row.task == task) return &row;
  }
  return nullptr;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Job {
  std::size_t round;
  std::size_t kernel;
  Task task;
};

/// Observation indices grouped by timestamp index.
std::vector<std::vector<std::size_t>> by_time(const SpatioTemporalDataset& data, const std::vector<double>& times) {
  std::vector<std::vector<std::size_t>> groups(times.size());
  for (std::size_t i = 0; i < data.observations.size(); ++i) {
    const auto it = std::lower_bound(times.begin(), times.end(), data.observations[i].point.time);
    groups[static_cast<std::size_t>(it - times.begin())].push_back(i);
  }
  return groups;
}

std::vector<std::size_t> gather(const std::vector<std::vector<std::size_t>>& groups,
                                const std::vector<std::size_t>& time_indices) {
  std::vector<std::size_t> out;
  for (auto t : time_indices) out.insert(out.end(), groups[t].begin(), groups[t].end());
  return out;
}

RoundRecord run_job(const Job& job, const SpatioTemporalDataset& data, const KernelContext& ctx,
                    const BacktestSettings& s, const std::vector<std::vector<std::size_t>>& groups,
                    const WindowSplit& window) {
  const KernelSpec& spec = s.kernels[job.kernel];
  RoundRecord rec;
  rec.round = job.round;
  rec.kernel = spec.name();
  rec.task = job.task;
  const auto start = std::chrono::steady_clock::now();

  std::vector<std::size_t> train_t;
  std::vector<std::size_t> test_t;
  if (job.task == Task::extrapolation) {
    train_t = window.train;
    test_t = window.test;
  } else {
    const auto split = interpolation_split(window.train.size(), s.interp_fraction, s.plan.seed + job.round);
    for (auto i : split.train) train_t.push_back(window.train[i]);
    for (auto i : split.test) test_t.push_back(window.train[i]);
  }
  const auto train = data.subset(gather(groups, train_t));
  const auto test = data.subset(gather(groups, test_t));

  try {
    GPModel model{spec, s.noise_variance, s.mean_policy, s.time_offset};
    FitOptions fo = s.fit;
    fo.seed = s.fit.seed + 1000003ULL * job.round + job.kernel;
    const FitResult fitted = fit(model, ctx, train, fo);
    const auto pred = predict(fitted.model, ctx, train, test.points());
    const Eigen::VectorXd truth = test.targets();
    const std::span<const double> p(pred.mean.data(), static_cast<std::size_t>(pred.mean.size()));
    const std::span<const double> y(truth.data(), static_cast<std::size_t>(truth.size()));
    rec.result.round_index = job.round;
    rec.result.abs_errors.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) rec.result.abs_errors[i] = std::abs(p[i] - y[i]);
    rec.result.mae = mae(p, y);
    try {
      rec.result.mape = mape(p, y);
    } catch (const std::invalid_argument&) {
      rec.result.mape = kNaN;  // zero truth values
    }
    rec.lml = fitted.lml;
    rec.noise_variance = fitted.model.noise_variance;
    rec.hyper = fitted.model.kernel.hyper;
    rec.ok = std::isfinite(rec.result.mae);
    if (!rec.ok) rec.error = "non-finite prediction";
  } catch (const NumericError& e) {
    rec.error = e.what();
  }
  rec.result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? kNaN : acc / static_cast<double>(v.size());
}

}  // namespace

BacktestReport run_backtest(const SpatioTemporalDataset& data, const BacktestSettings& s) {
  data.validate();
  if (s.kernels.empty()) throw std::invalid_argument("no kernels configured");
  if (s.tasks.empty()) throw std::invalid_argument("no tasks configured");
  std::set<std::string> names;
  for (const auto& k : s.kernels) {
    k.validate();
    if (!names.insert(k.name()).second) throw std::invalid_argument("kernel '" + k.name() + "' listed twice");
  }
  if (!s.baseline.empty() && !names.contains(s.baseline)) {
    throw std::invalid_argument("baseline kernel '" + s.baseline + "' is not in the kernel list");
  }
  if (!(s.interp_fraction > 0.0 && s.interp_fraction < 1.0)) {
    throw std::invalid_argument("interpolation fraction must lie in (0, 1)");
  }

  const auto t0 = std::chrono::steady_clock::now();
  const auto times = data.timestamps();
  const auto windows = sliding_windows(s.plan, times.size());
  const auto groups = by_time(data, times);
  const KernelContext ctx(data.graph);

  std::vector<Job> jobs;
  for (auto task : s.tasks) {
    for (std::size_t k = 0; k < s.kernels.size(); ++k) {
      for (std::size_t r = 0; r < windows.size(); ++r) jobs.push_back({r, k, task});
    }
  }

  BacktestReport report;
  report.rounds.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      report.rounds[i] = run_job(jobs[i], data, ctx, s, groups, windows[jobs[i].round]);
    }
  };
  {
    const unsigned n_threads = std::max(1u, std::min<unsigned>(s.jobs, static_cast<unsigned>(jobs.size())));
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }

  auto records_for = [&](const std::string& kernel, Task task) {
    std::vector<const RoundRecord*> out;
    for (const auto& r : report.rounds) {
      if (r.kernel == kernel && r.task == task) out.push_back(&r);
    }
    return out;
  };

  for (const auto& k : s.kernels) {
    for (auto task : s.tasks) {
      SummaryRow row;
      row.kernel = k.name();
      row.task = task;
      std::vector<double> maes;
      std::vector<double> mapes;
      for (const auto* r : records_for(row.kernel, task)) {
        if (!r->ok) continue;
        maes.push_back(r->result.mae);
        mapes.push_back(r->result.mape);
      }
      row.rounds_ok = maes.size();
      row.mae = mean_of(maes);
      row.mape = mean_of(mapes);
      row.mae_ci = maes.size() >= 2 ? confidence_interval(maes).half_width : kNaN;
      row.mape_ci = mapes.size() >= 2 && std::all_of(mapes.begin(), mapes.end(), [](double v) { return std::isfinite(v); })
                        ? confidence_interval(mapes).half_width
                        : kNaN;
      row.dm_statistic = kNaN;
      row.dm_p = kNaN;
      if (!s.baseline.empty() && row.kernel != s.baseline) {
        // Paired absolute errors over rounds where both kernels succeeded.
        std::vector<double> mine;
        std::vector<double> base;
        const auto other = records_for(s.baseline, task);
        const auto own = records_for(row.kernel, task);
        for (std::size_t i = 0; i < own.size(); ++i) {
          if (!own[i]->ok || !other[i]->ok) continue;
          mine.insert(mine.end(), own[i]->result.abs_errors.begin(), own[i]->result.abs_errors.end());
          base.insert(base.end(), other[i]->result.abs_errors.begin(), other[i]->result.abs_errors.end());
        }
        if (mine.size() >= 4) {
          const auto dm = dm_test(mine, base, s.dm_horizon);
          row.dm_statistic = dm.statistic;
          row.dm_p = dm.p_value;
        }
      }
      report.summary.push_back(row);
    }
  }
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

namespace {

std::string num(double v) { return std::isnan(v) ? std::string() : format_double(v); }

}  // namespace

void write_results_csv(const std::filesystem::path& path, const BacktestReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "round,kernel,split,mae,mape,ci_half_width,dm_vs_baseline_p\n";
  for (const auto& r : report.rounds) {
    out << r.round << ',' << r.kernel << ',' << to_string(r.task) << ',';
    if (r.ok) out << num(r.result.mae) << ',' << num(r.result.mape);
    else out << ',';
    out << ",,\n";
  }
  for (const auto& row : report.summary) {
    out << "all," << row.kernel << ',' << to_string(row.task) << ',' << num(row.mae) << ',' << num(row.mape) << ','
        << num(row.mae_ci) << ',' << num(row.dm_p) << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

void write_rounds_detail_csv(const std::filesystem::path& path, const BacktestReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "round,kernel,split,status,lml,noise_variance,hyperparameters,wall_time\n";
  for (const auto& r : report.rounds) {
    std::string hyper;
    for (const auto& [k, v] : r.hyper) hyper += (hyper.empty() ? "" : ";") + k + "=" + format_double(v);
    std::string status = r.ok ? "ok" : "failed: " + r.error;
    std::replace(status.begin(), status.end(), ',', ';');
    out << r.round << ',' << r.kernel << ',' << to_string(r.task) << ',' << status << ','
        << (r.ok ? num(r.lml) : "") << ',' << (r.ok ? num(r.noise_variance) : "") << ',' << hyper << ','
        << format_double(r.result.wall_time) << '\n';
  }
}

std::string format_summary(const BacktestReport& report, const BacktestSettings& settings) {
  const bool with_ci = settings.plan.rounds >= 2;
  std::ostringstream os;
  char buf[64];
  auto cell = [&](double v, double ci) {
    if (std::isnan(v)) return std::string("n/a");
    if (with_ci && !std::isnan(ci)) std::snprintf(buf, sizeof buf, "%.4g ± %.2g", v, ci);
    else std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };
  auto pcell = [&](double p) {
    if (std::isnan(p)) return std::string("-");
    std::snprintf(buf, sizeof buf, "%.3g", p);
    return std::string(buf);
  };

  std::vector<std::string> header = {"kernel"};
  for (auto task : settings.tasks) {
    const std::string tag = task == Task::interpolation ? "int" : "ext";
    header.push_back("MAE_" + tag);
    header.push_back("MAPE_" + tag);
    if (!settings.baseline.empty()) header.push_back("DM_p_" + tag);
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& k : settings.kernels) {
    std::vector<std::string> cells = {k.name()};
    for (auto task : settings.tasks) {
      const auto* row = report.find(k.name(), task);
      cells.push_back(cell(row->mae, row->mae_ci));
      cells.push_back(cell(row->mape, row->mape_ci));
      if (!settings.baseline.empty()) cells.push_back(pcell(row->dm_p));
    }
    rows.push_back(std::move(cells));
  }
  std::vector<std::size_t> width(header.size());
  auto display = [](const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
  };
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = display(header[c]);
    for (const auto& r : rows) width[c] = std::max(width[c], display(r[c]));
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      os << (c ? "  " : "") << cells[c] << std::string(width[c] - display(cells[c]), ' ');
    }
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  if (!with_ci) os << "(single round: no confidence intervals)\n";
  if (!settings.baseline.empty()) os << "DM p-values are two-sided, against " << settings.baseline << ".\n";
  for (const auto& row : report.summary) {
    const std::size_t expected = settings.plan.rounds;
    if (row.rounds_ok < expected) {
      os << row.kernel << " (" << to_string(row.task) << "): " << expected - row.rounds_ok << " of " << expected
         << " rounds failed\n";
    }
  }
  return os.str();
}

}  // namespace graphspde::cli
