// Seeded Gaussian noise injection for state and velocity channels.
#pragma once

#include <cstdint>
#include <random>

#include "clpds/types.hpp"

namespace clpds {

/// Deterministic standard-normal stream. Uses mt19937_64 with an explicit
/// Box-Muller transform so the exact draw sequence does not depend on the
/// standard library's distribution implementation.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double next();

 private:
  double uniform01();  // in (0, 1]

  std::mt19937_64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stateless mix of a base seed with a stream index (per-run derivation).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Per-channel noise variance for a target power SNR: signal power times
/// 10^(-snr_db/10), with signal power measured as the variance of the clean
/// series about its mean (DC carries no information and would make the level
/// depend on the coordinate origin).
double snr_noise_variance(double signal_power, double snr_db);

/// Mean squared value of a channel extracted from a series.
double channel_power(const Series& series, double (*channel)(const Sample&));

/// Perturbs the x,y state channels to the requested per-channel SNR and the
/// v, omega channels with zero-mean Gaussian noise of the given variance.
/// chi and acceleration channels are left untouched. A fixed seed makes the
/// result a pure function of (series, spec).
Series add_noise(const Series& series, const NoiseSpec& spec);

}  // namespace clpds
