// Depth-domain error metrics and plot-ready data export.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "clpds/types.hpp"

namespace clpds {

struct MetricsReport {
  double rmse_m = 0.0;
  double mape_pct = 0.0;
  std::optional<double> conv_time_s;  ///< empty when never converged
  double window_start = 0.0;
  double window_end = 0.0;
};

/// Aligned truth/estimate pair in inverse depth, uniform time base.
struct DepthTrack {
  std::vector<double> t;
  std::vector<double> chi_true;
  std::vector<double> chi_est;
};

/// sqrt(mean((Z_hat - Z)^2)) over [t0, t1], depths in meters (Z = 1/chi).
double rmse(const DepthTrack& track, double t0, double t1);

/// 100 * mean(|Z_hat - Z| / Z) over [t0, t1].
double mape(const DepthTrack& track, double t0, double t1);

/// First time from which the relative depth error stays below the
/// threshold for every subsequent sample; empty if it never does.
/// `smooth_s > 0` applies a centered moving average of that width to the
/// relative-error series first, so the statistic reads the transient decay
/// rather than isolated sub-second noise blips.
std::optional<double> convergence_time(const DepthTrack& track,
                                       double threshold_pct,
                                       double smooth_s = 0.0);

MetricsReport compute_metrics(const DepthTrack& track, double window_start,
                              double window_end, double conv_threshold_pct,
                              double conv_smooth_s = 0.0);

}  // namespace clpds
