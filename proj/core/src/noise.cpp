#include "clpds/noise.hpp"

#include <cmath>

namespace clpds {

double GaussianStream::uniform01() {
  // 53-bit mantissa draw mapped to (0, 1]
  const std::uint64_t r = rng_();
  return (static_cast<double>(r >> 11) + 1.0) * 0x1.0p-53;
}

double GaussianStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double mag = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * M_PI * u2;
  spare_ = mag * std::sin(ang);
  has_spare_ = true;
  return mag * std::cos(ang);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 over base + golden-ratio-scaled index
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double snr_noise_variance(double signal_power, double snr_db) {
  return signal_power * std::pow(10.0, -snr_db / 10.0);
}

double channel_power(const Series& series, double (*channel)(const Sample&)) {
  if (series.empty()) return 0.0;
  // AC power: variance about the series mean.  A DC offset carries no
  // information about the motion, and this makes the SNR level invariant to
  // the affine pixel <-> normalized-coordinate conversion.
  double mean = 0.0;
  for (const auto& s : series) mean += channel(s);
  mean /= static_cast<double>(series.size());
  double acc = 0.0;
  for (const auto& s : series) {
    const double v = channel(s) - mean;
    acc += v * v;
  }
  return acc / static_cast<double>(series.size());
}

Series add_noise(const Series& series, const NoiseSpec& spec) {
  if (spec.is_off()) return series;

  Series out = series;
  GaussianStream g(spec.seed);

  if (spec.state_noise_on) {
    const double px =
        channel_power(series, [](const Sample& s) { return s.f.x; });
    const double py =
        channel_power(series, [](const Sample& s) { return s.f.y; });
    const double sx = std::sqrt(snr_noise_variance(px, spec.state_snr_db));
    const double sy = std::sqrt(snr_noise_variance(py, spec.state_snr_db));
    for (auto& s : out) {
      s.f.x += sx * g.next();
      s.f.y += sy * g.next();
    }
  }
  if (spec.vel_noise_var > 0.0) {
    const double sv = std::sqrt(spec.vel_noise_var);
    for (auto& s : out) {
      for (int i = 0; i < 3; ++i) s.u.v[i] += sv * g.next();
      for (int i = 0; i < 3; ++i) s.u.omega[i] += sv * g.next();
    }
  }
  return out;
}

}  // namespace clpds
