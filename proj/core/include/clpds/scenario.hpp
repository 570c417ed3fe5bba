// Built-in simulation scenarios, the end-to-end run pipeline, Monte Carlo
// batches and log replay.
#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "clpds/config.hpp"
#include "clpds/csv.hpp"
#include "clpds/metrics.hpp"
#include "clpds/noise.hpp"
#include "clpds/observers.hpp"
#include "clpds/stacks.hpp"

namespace clpds {

enum class ObserverKind {
  full_order,
  reduced_integral,
  reduced_differential,
  ls_baseline,
};

std::string to_string(ObserverKind k);
ObserverKind observer_kind_from_string(const std::string& s);
std::string to_string(DiffMethod m);
DiffMethod diff_method_from_string(const std::string& s);

/// Serializable description of one run.
struct ScenarioConfig {
  std::string name = "custom";
  ObserverKind observer = ObserverKind::full_order;
  std::string profile = "sim1";  ///< sim1 | sim2 | zero | constant
  Eigen::Vector3d const_v = Eigen::Vector3d::Zero();
  Eigen::Vector3d const_w = Eigen::Vector3d::Zero();

  EuclideanPoint m0{2.5, 0.5, 3.0};
  double dt = 1.0 / 30.0;
  double horizon = 50.0;
  std::uint64_t seed = 1;
  NoiseSpec noise;

  FullOrderGains gains;
  double K_bar = 4.0;

  int M_minus_1 = 3;
  int N = 5;
  /// Replacement threshold; scenario-specific with no global default.
  double epsilon = std::numeric_limits<double>::quiet_NaN();

  Eigen::Vector2d s_hat0{10.0, 5.0};
  double chi_hat0 = 1.0;

  StateBounds bounds;
  DiffMethod derivative = DiffMethod::central2;
  int savgol_window = 31;  ///< sliding-fit width for the savgol derivative
  bool smooth_projection = false;

  double tail_window_s = 20.0;
  double conv_threshold_pct = 5.0;
  /// Moving-average width applied to the relative error before the
  /// convergence-time threshold test (0 disables smoothing).
  double conv_smooth_s = 1.0;
  double pe_window_s = 2.0;
  double ls_tol_sv = 1e-3;

  // replay-only
  std::string log_path;
  bool pixel_input = false;
  Intrinsics intrinsics;

  void validate() const;  ///< throws ConfigError on inconsistent values

  Config to_config() const;
  static ScenarioConfig from_config(const Config& cfg);
  /// Every config key the scenario mapping understands (override checking).
  static const std::vector<std::string>& known_keys();

  ChiProjector projector() const {
    return {bounds.chi_lo, bounds.chi_hi, smooth_projection};
  }
};

/// Full-order simulation study: published trajectory, gains and 40 dB noise.
ScenarioConfig scenario_sim1();
/// Reduced-order study with the excitation-violation window at 31-38 s.
ScenarioConfig scenario_sim2();

/// Camera velocity command for a scenario; state-feedback profiles read the
/// second argument.
VelocityProfile make_profile(const ScenarioConfig& cfg);
bool profile_uses_feedback(const std::string& profile);

/// Observer output record for one sample (pre-step state at t).
struct EstimateRecord {
  double t = 0.0;
  double x_hat = 0.0, y_hat = 0.0;
  double chi_hat = 0.0;
  double z = 0.0;  ///< chi - chi_hat; NaN without ground truth
  double sigma1 = 0.0;
  double gain_margin = 0.0;
  bool gain_pass = false;
  bool stack_updated = false;
};

struct StepDiagnostics {
  double t = 0.0;
  double sigma1 = 0.0;
  double sigma_bar = 0.0;
  bool update_flag = false;
  double pe_window = 0.0;  ///< trailing-window excitation integral
};

/// Output-map discontinuity at a stack replacement (integral mode).
struct GammaJump {
  double t = 0.0;
  double delta = 0.0;
};

struct RunSummary {
  double d_bar = 0.0;    ///< max observed |s_dot_bar - s_dot_true|
  double chi_bar = 0.0;  ///< max observed stack-staleness |chi_j - chi|
  double L_g_run = 0.0;  ///< running Lipschitz estimate along the run
  int n_ill_conditioned = 0;
  std::vector<GammaJump> gamma_jumps;
};

struct RunResult {
  ScenarioConfig cfg;
  Series truth;  ///< empty for replay without ground truth
  Series meas;   ///< what the observer consumed (chi column is reference)
  std::vector<EstimateRecord> est;
  std::vector<StepDiagnostics> diag;
  RunSummary summary;
  std::optional<MetricsReport> metrics;

  bool has_truth() const { return !truth.empty(); }
  DepthTrack track() const;
};

/// End-to-end pipeline: simulate truth, inject noise (closed-loop for
/// state-feedback profiles), run the selected observer with the stack
/// machinery, and collect metrics. Deterministic under the config seed.
RunResult run_scenario(const ScenarioConfig& cfg);

/// Steps the configured observer over an existing measurement series
/// (the shared path behind run_scenario and replay_log).
RunResult run_observer_series(const ScenarioConfig& cfg, Series meas,
                              Series truth);

struct MonteCarloSpec {
  int n_runs = 100;
  /// Std-dev of the normal initial-condition perturbation on
  /// (x_hat0, y_hat0, chi_hat0).
  Eigen::Vector3d init_std{1.0, 1.0, 0.3};
  std::uint64_t base_seed = 42;
};

struct McRunRow {
  int run = 0;
  MetricsReport metrics;
  bool diverged = false;
};

struct McReport {
  double rmse_m = 0.0;      ///< pooled over all post-window samples
  double mape_pct = 0.0;    ///< pooled
  std::optional<double> conv_time_median_s;
  int n_diverged = 0;
  std::vector<McRunRow> runs;
};

McReport run_monte_carlo(const ScenarioConfig& cfg, const MonteCarloSpec& mc);

/// Runs the configured observer over a logged series. Pixel-unit logs are
/// converted through the configured intrinsics; metrics are produced when
/// the log carries ground-truth inverse depth.
RunResult replay_log(const std::filesystem::path& path,
                     const ScenarioConfig& cfg);

/// The exact series behind one figure panel; throws on unknown ids.
Table export_figure_data(const RunResult& run, const std::string& figure_id);

/// Persists run CSV, estimate records, diagnostics, metrics summary and a
/// manifest (config echo + seed + artifact hashes). Returns written paths.
std::vector<std::filesystem::path> write_run_artifacts(
    const RunResult& run, const std::filesystem::path& out_dir,
    const std::string& stem);

}  // namespace clpds
