// Core state and input types for the perspective camera motion model.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace clpds {

/// Image-plane feature state: normalized coordinates plus inverse depth.
struct FeatureState {
  double x = 0.0;    ///< X/Z, dimensionless
  double y = 0.0;    ///< Y/Z, dimensionless
  double chi = 0.0;  ///< 1/Z, 1/m

  Eigen::Vector2d s() const { return {x, y}; }
};

/// Camera motion measurement at one instant.
struct CameraInput {
  Eigen::Vector3d v = Eigen::Vector3d::Zero();      ///< linear velocity, m/s
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();  ///< angular velocity, rad/s
  Eigen::Vector3d v_dot = Eigen::Vector3d::Zero();  ///< linear acceleration, m/s^2
  double t = 0.0;                                   ///< time, s
};

/// Camera-frame Euclidean point.
struct EuclideanPoint {
  double X = 0.0;
  double Y = 0.0;
  double Z = 0.0;

  FeatureState to_feature() const { return {X / Z, Y / Z, 1.0 / Z}; }
};

/// Bounds on the feature state. x,y are limited by the sensor footprint,
/// chi by a positive floor and the focal-length ceiling 1/lambda.
struct StateBounds {
  double x_lo = -4.0, x_hi = 4.0;
  double y_lo = -4.0, y_hi = 4.0;
  double chi_lo = 0.01;
  double chi_hi = 100.0;  // 1/lambda with lambda = 0.01 m

  bool contains(const FeatureState& f) const {
    return f.x >= x_lo && f.x <= x_hi && f.y >= y_lo && f.y <= y_hi &&
           f.chi > chi_lo - 1e-12 && f.chi <= chi_hi + 1e-12;
  }
};

/// Additive measurement-noise description.
struct NoiseSpec {
  bool state_noise_on = true;
  double state_snr_db = 40.0;   ///< per-channel SNR on x,y when on
  double vel_noise_var = 0.01;  ///< variance on each v and omega component
  std::uint64_t seed = 0;

  static NoiseSpec off() { return {false, 0.0, 0.0, 0}; }
  bool is_off() const { return !state_noise_on && vel_noise_var == 0.0; }
};

/// One row of a time series: feature state plus applied camera input.
/// chi may be NaN when ground truth depth is unavailable (ingested logs).
struct Sample {
  double t = 0.0;
  FeatureState f;
  CameraInput u;

  bool has_chi() const { return std::isfinite(f.chi); }
};

using Series = std::vector<Sample>;

/// Pinhole intrinsics used only by the ingestion layer to map pixel
/// coordinates to normalized image coordinates.
struct Intrinsics {
  double fx = 407.1, fy = 407.1;
  double cx = 323.4, cy = 205.6;

  Eigen::Vector2d to_normalized(double px, double py) const {
    return {(px - cx) / fx, (py - cy) / fy};
  }
};

}  // namespace clpds
