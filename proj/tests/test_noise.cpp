#include <doctest.h>

#include <cmath>

#include "clpds/noise.hpp"

using namespace clpds;

namespace {

Series make_series(std::size_t n) {
  Series s(n);
  for (std::size_t k = 0; k < n; ++k) {
    s[k].t = k / 30.0;
    s[k].f = {std::sin(s[k].t), 0.5 * std::cos(s[k].t), 1.0};
    s[k].u.v = {0.3, 0.2, -0.3};
  }
  return s;
}

}  // namespace

TEST_CASE("noise off is identity") {
  const Series s = make_series(100);
  const Series out = add_noise(s, NoiseSpec::off());
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(out[k].f.x == s[k].f.x);
    CHECK(out[k].f.y == s[k].f.y);
    CHECK(out[k].u.v == s[k].u.v);
  }
}

TEST_CASE("snr noise power is empirically correct") {
  const Series s = make_series(20000);
  NoiseSpec spec;
  spec.state_noise_on = true;
  spec.state_snr_db = 40.0;
  spec.vel_noise_var = 0.0;
  spec.seed = 99;
  const Series out = add_noise(s, spec);

  const double px = channel_power(s, [](const Sample& a) { return a.f.x; });
  const double want = snr_noise_variance(px, 40.0);
  double acc = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double e = out[k].f.x - s[k].f.x;
    acc += e * e;
  }
  const double got = acc / static_cast<double>(s.size());
  CHECK(std::abs(got - want) / want < 0.05);
}

TEST_CASE("fixed seed is deterministic") {
  const Series s = make_series(500);
  NoiseSpec spec;
  spec.state_snr_db = 30.0;
  spec.vel_noise_var = 0.01;
  spec.seed = 1234;
  const Series a = add_noise(s, spec);
  const Series b = add_noise(s, spec);
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(a[k].f.x == b[k].f.x);
    CHECK(a[k].f.y == b[k].f.y);
    CHECK(a[k].u.v == b[k].u.v);
    CHECK(a[k].u.omega == b[k].u.omega);
  }
}

TEST_CASE("gaussian stream moments") {
  GaussianStream g(5);
  const int n = 200000;
  double m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = g.next();
    m1 += v;
    m2 += v * v;
  }
  m1 /= n;
  m2 /= n;
  CHECK(std::abs(m1) < 0.01);
  CHECK(std::abs(m2 - 1.0) < 0.02);
}

TEST_CASE("derived seeds differ per index") {
  CHECK(derive_seed(42, 0) != derive_seed(42, 1));
  CHECK(derive_seed(42, 0) != derive_seed(43, 0));
  CHECK(derive_seed(42, 7) == derive_seed(42, 7));
}
