// Perspective dynamical system: feature motion fields, fixed-step RK4
// ground-truth integration, numerical differentiation and inverse-depth
// projection.
#pragma once

#include <functional>
#include <stdexcept>

#include "clpds/types.hpp"

namespace clpds {

/// Rotational part of the image-plane feature dynamics (2-vector).
Eigen::Vector2d feature_motion(const Eigen::Vector2d& s,
                               const Eigen::Vector3d& omega);

/// Translational interaction row: [x*vZ - vX, y*vZ - vY].
Eigen::RowVector2d interaction_row(const Eigen::Vector2d& s,
                                   const Eigen::Vector3d& v);

/// Inverse-depth dynamics: vZ*chi^2 + (y*wX - x*wY)*chi.
double depth_rate(const Eigen::Vector2d& s, double chi, const CameraInput& u);

/// Scalar excitation level of a single measurement: Omega * Omega^T.
inline double excitation_info(const Eigen::Vector2d& s,
                              const Eigen::Vector3d& v) {
  const Eigen::RowVector2d w = interaction_row(s, v);
  return w.squaredNorm();
}

/// Camera velocity command as a function of time and (fed-back) feature
/// coordinates. Time-only profiles ignore the second argument.
using VelocityProfile =
    std::function<CameraInput(double t, const Eigen::Vector2d& s)>;

/// Per-sample hook substituting the feature coordinates the profile sees
/// (e.g. a noisy measurement). Receives the sample index and true coords.
using FeedbackHook =
    std::function<Eigen::Vector2d(std::size_t k, const Eigen::Vector2d& s_true)>;

/// Thrown when an integrated trajectory leaves the configured state bounds,
/// which signals a physically invalid scenario.
struct TrajectoryBoundsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Fixed-step RK4 integration of the PDS from a Euclidean initial point.
/// The returned series holds samples at t = 0, dt, ..., including t = 0,
/// with the commanded input recorded at each sample. Acceleration columns
/// are filled by differentiating the commanded linear velocity.
///
/// When `hook` is set, the profile is evaluated with the hooked feature
/// coordinates held constant across each step (zero-order-hold command);
/// otherwise the profile sees the instantaneous integration state.
Series simulate_truth(const EuclideanPoint& m0, const VelocityProfile& profile,
                      double dt, double horizon,
                      const StateBounds& bounds = {},
                      const FeedbackHook* hook = nullptr);

enum class DiffMethod {
  central2,   ///< 2nd-order central, one-sided 2nd-order at the ends
  backward1,  ///< 1st-order backward; first sample gets zero (causal startup)
  savgol,     ///< Savitzky-Golay: quadratic local fit over a sliding window,
              ///< strong noise suppression at the cost of extra smoothing lag
  analytic,   ///< model-based: f_m + Omega^T chi from the series' own depth
              ///< channel (exact on clean simulated data; requires finite chi)
};

/// Numerical derivative of the (x, y) channels of a uniformly sampled series.
/// `savgol_window` (odd, >= 5) sets the sliding-fit width for the
/// Savitzky-Golay method and is ignored by the other methods.
std::vector<Eigen::Vector2d> differentiate_state(const Series& series,
                                                 DiffMethod method,
                                                 int savgol_window = 31);

/// Derivative of a generic uniformly sampled 3-vector channel (used for
/// acceleration reconstruction from commanded velocity).
std::vector<Eigen::Vector3d> differentiate_vec3(
    const std::vector<Eigen::Vector3d>& v, double dt);

/// Clamp-style projection keeping an inverse-depth estimate inside
/// [chi_lo, chi_hi]. Hard mode is an exact clamp; smooth mode saturates
/// through a C1 boundary layer strictly inside the interval.
struct ChiProjector {
  double chi_lo = 0.01;
  double chi_hi = 100.0;
  bool smooth = false;
  double layer_frac = 0.01;  ///< boundary-layer width as fraction of range

  double operator()(double chi_hat) const;
};

}  // namespace clpds
