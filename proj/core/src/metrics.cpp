#include "clpds/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clpds {

namespace {

template <typename F>
void for_window(const DepthTrack& tr, double t0, double t1, F&& fn) {
  if (tr.t.size() != tr.chi_true.size() || tr.t.size() != tr.chi_est.size())
    throw std::invalid_argument("depth track: misaligned series");
  std::size_t n = 0;
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    if (tr.t[k] < t0 - 1e-9 || tr.t[k] > t1 + 1e-9) continue;
    fn(1.0 / tr.chi_true[k], 1.0 / tr.chi_est[k]);
    ++n;
  }
  if (n == 0) throw std::invalid_argument("depth metrics: empty window");
}

}  // namespace

double rmse(const DepthTrack& track, double t0, double t1) {
  double acc = 0.0;
  std::size_t n = 0;
  for_window(track, t0, t1, [&](double Z, double Z_hat) {
    acc += (Z_hat - Z) * (Z_hat - Z);
    ++n;
  });
  return std::sqrt(acc / static_cast<double>(n));
}

double mape(const DepthTrack& track, double t0, double t1) {
  double acc = 0.0;
  std::size_t n = 0;
  for_window(track, t0, t1, [&](double Z, double Z_hat) {
    acc += std::abs(Z_hat - Z) / Z;
    ++n;
  });
  return 100.0 * acc / static_cast<double>(n);
}

std::optional<double> convergence_time(const DepthTrack& track,
                                       double threshold_pct, double smooth_s) {
  if (threshold_pct <= 0.0)
    throw std::invalid_argument("convergence_time: threshold must be > 0");
  const std::size_t n = track.t.size();
  if (n == 0) return std::nullopt;
  if (track.chi_true.size() != n || track.chi_est.size() != n)
    throw std::invalid_argument("depth track: misaligned series");

  std::vector<double> rel(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double Z = 1.0 / track.chi_true[k];
    const double Zh = 1.0 / track.chi_est[k];
    rel[k] = std::abs(Zh - Z) / Z;
  }
  if (smooth_s > 0.0 && n >= 2) {
    const double dt = track.t[1] - track.t[0];
    const std::ptrdiff_t half =
        static_cast<std::ptrdiff_t>(std::floor(0.5 * smooth_s / dt));
    if (half > 0) {
      std::vector<double> sm(n);
      const std::ptrdiff_t last = static_cast<std::ptrdiff_t>(n) - 1;
      // prefix sums keep the pass linear
      std::vector<double> pre(n + 1, 0.0);
      for (std::size_t k = 0; k < n; ++k) pre[k + 1] = pre[k] + rel[k];
      for (std::ptrdiff_t k = 0; k <= last; ++k) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, k - half);
        const std::ptrdiff_t hi = std::min(last, k + half);
        sm[static_cast<std::size_t>(k)] =
            (pre[static_cast<std::size_t>(hi) + 1] -
             pre[static_cast<std::size_t>(lo)]) /
            static_cast<double>(hi - lo + 1);
      }
      rel = std::move(sm);
    }
  }

  const double thr = threshold_pct / 100.0;
  // scan backwards for the last violation
  std::ptrdiff_t last_bad = -1;
  for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(n) - 1; k >= 0; --k) {
    if (rel[static_cast<std::size_t>(k)] >= thr) {
      last_bad = k;
      break;
    }
  }
  const std::size_t first_ok = static_cast<std::size_t>(last_bad + 1);
  if (first_ok >= n) return std::nullopt;
  return track.t[first_ok];
}

MetricsReport compute_metrics(const DepthTrack& track, double window_start,
                              double window_end, double conv_threshold_pct,
                              double conv_smooth_s) {
  MetricsReport r;
  r.rmse_m = rmse(track, window_start, window_end);
  r.mape_pct = mape(track, window_start, window_end);
  r.conv_time_s = convergence_time(track, conv_threshold_pct, conv_smooth_s);
  r.window_start = window_start;
  r.window_end = window_end;
  return r;
}

}  // namespace clpds
