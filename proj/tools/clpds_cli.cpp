// Command-line front end: simulate | montecarlo | replay | export | diagnose.
#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "clpds/scenario.hpp"

namespace {

using namespace clpds;

struct CommonOpts {
  std::string scenario;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string observer;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* app, CommonOpts& o) {
  app->add_option("--scenario", o.scenario, "Built-in scenario: sim1 | sim2");
  app->add_option("--config", o.config_path, "INI config file");
  app->add_option("--set", o.overrides,
                  "Override a config key, section.key=value (repeatable)");
  app->add_option("--observer", o.observer,
                  "Observer: full | reduced | reduced-diff | ls");
  app->add_option("--out", o.out_dir, "Output directory");
  auto* s = app->add_option("--seed", o.seed, "Base RNG seed");
  s->each([&o](const std::string&) { o.seed_set = true; });
}

ScenarioConfig build_config(const CommonOpts& o) {
  Config cfg;
  if (!o.config_path.empty()) cfg = Config::from_file(o.config_path);
  if (!o.scenario.empty()) {
    ScenarioConfig base;
    if (o.scenario == "sim1")
      base = scenario_sim1();
    else if (o.scenario == "sim2")
      base = scenario_sim2();
    else
      throw ConfigError("unknown scenario '" + o.scenario + "'");
    Config merged = base.to_config();
    for (const auto& [k, v] : cfg.values()) merged.set(k, v);
    cfg = merged;
  } else if (o.config_path.empty()) {
    throw ConfigError("one of --scenario or --config is required");
  }
  cfg.apply_overrides(o.overrides, ScenarioConfig::known_keys());
  ScenarioConfig sc = ScenarioConfig::from_config(cfg);
  if (!o.observer.empty()) sc.observer = observer_kind_from_string(o.observer);
  if (o.seed_set) {
    sc.seed = o.seed;
    sc.noise.seed = o.seed;
  }
  sc.validate();
  return sc;
}

void print_metrics(const RunResult& run) {
  if (run.metrics) {
    std::cout << "rmse_m = " << format_double(run.metrics->rmse_m) << "\n"
              << "mape_pct = " << format_double(run.metrics->mape_pct) << "\n"
              << "conv_time_s = "
              << (run.metrics->conv_time_s
                      ? format_double(*run.metrics->conv_time_s)
                      : "none")
              << "\n";
  } else {
    std::cout << "metrics unavailable (no ground-truth depth)\n";
  }
}

int cmd_simulate(const CommonOpts& o) {
  const ScenarioConfig sc = build_config(o);
  const RunResult run = run_scenario(sc);
  const auto written = write_run_artifacts(run, o.out_dir, sc.name);
  print_metrics(run);
  for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
  return 0;
}

int cmd_montecarlo(const CommonOpts& o, int runs) {
  const ScenarioConfig sc = build_config(o);
  MonteCarloSpec mc;
  mc.n_runs = runs;
  if (o.seed_set) mc.base_seed = o.seed;
  const McReport rep = run_monte_carlo(sc, mc);

  std::filesystem::create_directories(o.out_dir);
  Table t;
  t.columns = {"run", "rmse_m", "mape_pct", "conv_time_s", "diverged"};
  for (const auto& r : rep.runs)
    t.rows.push_back(
        {static_cast<double>(r.run), r.metrics.rmse_m, r.metrics.mape_pct,
         r.metrics.conv_time_s ? *r.metrics.conv_time_s
                               : std::numeric_limits<double>::quiet_NaN(),
         r.diverged ? 1.0 : 0.0});
  const auto runs_csv =
      std::filesystem::path(o.out_dir) / (sc.name + "_mc_runs.csv");
  write_table_csv(runs_csv, t);

  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("n_runs", std::to_string(mc.n_runs));
  kv.emplace_back("rmse_m", format_double(rep.rmse_m));
  kv.emplace_back("mape_pct", format_double(rep.mape_pct));
  kv.emplace_back("conv_time_median_s",
                  rep.conv_time_median_s ? format_double(*rep.conv_time_median_s)
                                         : "none");
  kv.emplace_back("n_diverged", std::to_string(rep.n_diverged));
  const auto summary_txt =
      std::filesystem::path(o.out_dir) / (sc.name + "_mc_summary.txt");
  write_kv_file(summary_txt, kv);

  for (const auto& [k, v] : kv) std::cout << k << " = " << v << "\n";
  std::cout << "wrote " << runs_csv.string() << "\n"
            << "wrote " << summary_txt.string() << "\n";
  return 0;
}

int cmd_replay(const CommonOpts& o, const std::string& log) {
  ScenarioConfig sc = build_config(o);
  if (!log.empty()) sc.log_path = log;
  if (sc.log_path.empty())
    throw ConfigError("replay needs --log or replay.log_path");
  const RunResult run = replay_log(sc.log_path, sc);
  const auto written = write_run_artifacts(run, o.out_dir, sc.name + "_replay");
  print_metrics(run);
  for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
  return 0;
}

int cmd_export(const CommonOpts& o, const std::string& figure) {
  const ScenarioConfig sc = build_config(o);
  const RunResult run = run_scenario(sc);
  const Table t = export_figure_data(run, figure);
  std::filesystem::create_directories(o.out_dir);
  const auto path = std::filesystem::path(o.out_dir) /
                    (sc.name + "_fig" + figure + ".csv");
  write_table_csv(path, t);
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_diagnose(const CommonOpts& o) {
  const ScenarioConfig sc = build_config(o);
  const RunResult run = run_scenario(sc);

  std::filesystem::create_directories(o.out_dir);
  Table diag;
  diag.columns = {"t", "sigma1", "sigma_bar", "update_flag",
                  "pe_window_integral"};
  for (const auto& d : run.diag)
    diag.rows.push_back({d.t, d.sigma1, d.sigma_bar, d.update_flag ? 1.0 : 0.0,
                         d.pe_window});
  const auto path =
      std::filesystem::path(o.out_dir) / (sc.name + "_diagnostics.csv");
  write_table_csv(path, diag);

  const auto& last = run.est.back();
  std::cout << "sigma1_final = " << format_double(last.sigma1) << "\n"
            << "sigma_bar_final = " << format_double(run.diag.back().sigma_bar)
            << "\n"
            << "gain_check = " << (last.gain_pass ? "pass" : "fail") << "\n"
            << "gain_margin = " << format_double(last.gain_margin) << "\n"
            << "L_g_run = " << format_double(run.summary.L_g_run) << "\n"
            << "d_bar = " << format_double(run.summary.d_bar) << "\n"
            << "n_stack_updates = "
            << std::count_if(run.diag.begin(), run.diag.end(),
                             [](const StepDiagnostics& d) {
                               return d.update_flag;
                             })
            << "\n"
            << "wrote " << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concurrent-learning depth observers for monocular camera motion"};
  app.require_subcommand(1);

  CommonOpts o;
  int mc_runs = 100;
  std::string log_path, figure = "1a";

  auto* sim = app.add_subcommand("simulate", "Run one scenario end to end");
  add_common(sim, o);
  auto* mc = app.add_subcommand("montecarlo", "Batch of randomized runs");
  add_common(mc, o);
  mc->add_option("--runs", mc_runs, "Number of runs");
  auto* rp = app.add_subcommand("replay", "Run an observer over a logged series");
  add_common(rp, o);
  rp->add_option("--log", log_path, "Input series CSV");
  auto* ex = app.add_subcommand("export", "Emit plot-ready figure data");
  add_common(ex, o);
  ex->add_option("--figure", figure, "Figure panel id (e.g. 1a, 2c, 3d)");
  auto* dg = app.add_subcommand("diagnose", "Excitation and gain diagnostics");
  add_common(dg, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(o);
    if (mc->parsed()) return cmd_montecarlo(o, mc_runs);
    if (rp->parsed()) return cmd_replay(o, log_path);
    if (ex->parsed()) return cmd_export(o, figure);
    if (dg->parsed()) return cmd_diagnose(o);
  } catch (const clpds::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
