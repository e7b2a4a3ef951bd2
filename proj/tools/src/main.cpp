#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "graphspde_cli/commands.hpp"

namespace gc = graphspde::cli;

namespace {

void add_data_options(CLI::App* cmd, gc::DataOptions& d) {
  cmd->add_option("--kind", d.kind, "Synthetic generator: heat-line or wave-line")->capture_default_str();
  cmd->add_option("--nodes", d.nodes, "Line length (default 21 heat, 11 wave)");
  cmd->add_option("--k", d.k, "Heat conductivity")->capture_default_str();
  cmd->add_option("--speed", d.speed, "Wave speed")->capture_default_str();
  cmd->add_option("--t,--times", d.times, "Timestamps: a:b, a:step:b or a,b,c")->capture_default_str();
  cmd->add_option("--noise-sd", d.noise_sd, "Observation noise of the generator")->capture_default_str();
  cmd->add_option("--graph-csv", d.graph_csv, "Edge list (src,dst[,weight]) instead of a generator");
  cmd->add_option("--series-csv", d.series_csv, "Observations (node_id,t,y)");
  cmd->add_flag("--directed", d.directed, "Treat the edge list as directed");
}

void add_model_options(CLI::App* cmd, gc::ModelOptions& m) {
  cmd->add_option("--hyper", m.hyper, "Hyperparameter override name=value or kernel.name=value (repeatable)");
  cmd->add_option("--noise", m.noise, "Initial observation noise variance")->capture_default_str();
  cmd->add_option("--mean-policy", m.mean_policy, "zero or per-node")->capture_default_str();
  cmd->add_option("--time-offset", m.time_offset, "Kernel time of the earliest training point")->capture_default_str();
  cmd->add_flag("--raw-times", m.raw_times, "Use timestamps as given");
  cmd->add_option("--laplacian", m.laplacian, "unnormalized, sym_normalized or random_walk")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatio-temporal Gaussian processes on graphs with SPDE kernels"};
  app.set_config("--config", "", "TOML config; [subcommand] tables hold subcommand keys, flags win");
  app.require_subcommand(1);
  app.fallthrough();

  gc::GlobalOptions g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads")->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();

  gc::SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic line-graph dataset");
  add_data_options(synth_cmd, synth.data);

  gc::BacktestOptions bt;
  auto* bt_cmd = app.add_subcommand("backtest", "Sliding-window backtest of several kernels");
  add_data_options(bt_cmd, bt.data);
  add_model_options(bt_cmd, bt.model);
  bt_cmd->add_option("--kernels", bt.kernels, "Comma-separated kernel names")->capture_default_str();
  bt_cmd->add_option("--baseline", bt.baseline, "Kernel the DM test compares against")->capture_default_str();
  bt_cmd->add_option("--n-train", bt.n_train)->capture_default_str();
  bt_cmd->add_option("--n-test", bt.n_test)->capture_default_str();
  bt_cmd->add_option("--stride", bt.stride)->capture_default_str();
  bt_cmd->add_option("--rounds", bt.rounds)->capture_default_str();
  bt_cmd->add_option("--tasks", bt.tasks, "interpolation,extrapolation")->capture_default_str();
  bt_cmd->add_option("--interp-fraction", bt.interp_fraction)->capture_default_str();
  bt_cmd->add_option("--restarts", bt.restarts)->capture_default_str();
  bt_cmd->add_option("--max-iters", bt.max_iters)->capture_default_str();
  bt_cmd->add_flag("--include-smoothness", bt.include_smoothness, "Also fit nu and kappa");
  bt_cmd->add_option("--dm-horizon", bt.dm_horizon)->capture_default_str();

  gc::ValidateOptions val;
  auto* val_cmd = app.add_subcommand("validate-kernel", "Compare analytic SHEK/SWEK covariances with Euler-Maruyama");
  val_cmd->add_option("--kernel", val.kernel, "shek or swek")->capture_default_str();
  val_cmd->add_option("--nodes", val.nodes, "Path graph size")->capture_default_str();
  val_cmd->add_option("--graph-csv", val.graph_csv);
  val_cmd->add_flag("--directed", val.directed);
  val_cmd->add_option("--laplacian", val.laplacian)->capture_default_str();
  val_cmd->add_option("--c", val.c)->capture_default_str();
  val_cmd->add_option("--sigma", val.sigma)->capture_default_str();
  val_cmd->add_option("--nu", val.nu)->capture_default_str();
  val_cmd->add_option("--kappa", val.kappa)->capture_default_str();
  val_cmd->add_option("--dt", val.dt)->capture_default_str();
  val_cmd->add_option("--paths", val.paths)->capture_default_str();
  val_cmd->add_option("--times", val.times, "Evaluation times; every pair t >= s is compared")->capture_default_str();
  val_cmd->add_option("--threshold", val.threshold, "Pass bound in standard errors")->capture_default_str();

  gc::SampleOptions smp;
  auto* smp_cmd = app.add_subcommand("sample", "Prior or conditioned samples as tidy CSV");
  smp_cmd->add_option("--kernel", smp.kernel)->capture_default_str();
  smp_cmd->add_option("--nodes", smp.nodes)->capture_default_str();
  smp_cmd->add_option("--graph-csv", smp.graph_csv);
  smp_cmd->add_option("--c", smp.cs, "Diffusivity values, one output file each")->capture_default_str();
  smp_cmd->add_option("--t,--times", smp.times)->capture_default_str();
  smp_cmd->add_option("--condition-time", smp.condition_time)->capture_default_str();
  smp_cmd->add_option("--condition", smp.condition_values, "Values per vertex; empty samples the prior")
      ->capture_default_str();
  smp_cmd->add_option("--samples", smp.samples)->capture_default_str();
  add_model_options(smp_cmd, smp.model);

  gc::FitCommandOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one kernel's hyperparameters by marginal likelihood");
  add_data_options(fit_cmd, fit.data);
  add_model_options(fit_cmd, fit.model);
  fit_cmd->add_option("--kernel", fit.kernel)->capture_default_str();
  fit_cmd->add_option("--restarts", fit.restarts)->capture_default_str();
  fit_cmd->add_option("--max-iters", fit.max_iters)->capture_default_str();
  fit_cmd->add_flag("--include-smoothness", fit.include_smoothness);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? gc::kOk : gc::kUsage;
  }

  return gc::run_guarded(
      [&] {
        if (*synth_cmd) return gc::cmd_synth(g, synth, std::cout);
        if (*bt_cmd) return gc::cmd_backtest(g, bt, std::cout);
        if (*val_cmd) return gc::cmd_validate_kernel(g, val, std::cout);
        if (*smp_cmd) return gc::cmd_sample(g, smp, std::cout);
        return gc::cmd_fit(g, fit, std::cout);
      },
      std::cerr);
}
