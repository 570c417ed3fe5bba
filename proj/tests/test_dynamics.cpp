#include <doctest.h>

#include <cmath>
#include <random>

#include "clpds/dynamics.hpp"

using namespace clpds;

TEST_CASE("feature motion field") {
  CHECK(feature_motion({0, 0}, {0, 0, 0}).norm() == 0.0);

  const Eigen::Vector2d a = feature_motion({0, 0}, {0, 1, 0});
  CHECK(a.x() == doctest::Approx(-1.0));
  CHECK(a.y() == doctest::Approx(0.0));

  // hand-evaluated 2x3 product at (x,y)=(1,2), w=(1,0,0)
  const Eigen::Vector2d b = feature_motion({1, 2}, {1, 0, 0});
  CHECK(b.x() == doctest::Approx(2.0));
  CHECK(b.y() == doctest::Approx(5.0));
}

TEST_CASE("interaction row") {
  CHECK(interaction_row({0, 0}, {0, 0, 1}).norm() == 0.0);

  const Eigen::RowVector2d w = interaction_row({1, 1}, {0, 0, 1});
  CHECK(w(0) == doctest::Approx(1.0));
  CHECK(w(1) == doctest::Approx(1.0));

  // v aligned with the projection ray kills the row for any scale
  for (double c : {-2.0, 0.5, 3.0}) {
    const double x0 = 0.7, y0 = -1.2;
    const Eigen::RowVector2d z =
        interaction_row({x0, y0}, {x0 * c, y0 * c, c});
    CHECK(z.norm() == doctest::Approx(0.0));
    CHECK(excitation_info({x0, y0}, {x0 * c, y0 * c, c}) ==
          doctest::Approx(0.0));
  }
}

TEST_CASE("depth rate") {
  CameraInput u;
  u.v = {0, 0, 1};
  CHECK(depth_rate({0.3, -0.7}, 2.0, u) == doctest::Approx(4.0));

  u.v.setZero();
  CHECK(depth_rate({0.3, -0.7}, 5.0, u) == doctest::Approx(0.0));

  u.omega = {0, 1, 0};
  CHECK(depth_rate({1, 0}, 1.0, u) == doctest::Approx(-1.0));

  // chi = 0 is a fixed point
  u.v = {0.4, -0.1, 0.9};
  u.omega = {0.2, -0.3, 0.1};
  CHECK(depth_rate({1.5, -2.0}, 0.0, u) == 0.0);
}

TEST_CASE("simulate_truth equilibrium and pure-Z oracle") {
  const VelocityProfile zero = [](double, const Eigen::Vector2d&) {
    return CameraInput{};
  };
  const Series still = simulate_truth({0.5, -0.25, 2.0}, zero, 1.0 / 30, 2.0);
  CHECK(still.front().t == 0.0);
  for (const auto& s : still) {
    CHECK(s.f.x == doctest::Approx(0.25));
    CHECK(s.f.y == doctest::Approx(-0.125));
    CHECK(s.f.chi == doctest::Approx(0.5));
  }

  // Z(t) = Z0 - vZ t under pure Z translation
  const double vz = 0.3, Z0 = 2.0;
  const VelocityProfile pz = [vz](double, const Eigen::Vector2d&) {
    CameraInput u;
    u.v = {0, 0, vz};
    return u;
  };
  const Series tr = simulate_truth({0, 0, Z0}, pz, 1.0 / 30, 4.0);
  for (const auto& s : tr) {
    const double chi_exact = (1.0 / Z0) / (1.0 - vz * (1.0 / Z0) * s.t);
    CHECK(std::abs(s.f.chi - chi_exact) < 1e-9);
    CHECK(s.f.x == doctest::Approx(0.0));
  }
}

TEST_CASE("simulate_truth rejects bound violations") {
  const VelocityProfile away = [](double, const Eigen::Vector2d&) {
    CameraInput u;
    u.v = {-5.0, 0, 0};  // drives x out of [-4, 4] quickly
    return u;
  };
  CHECK_THROWS_AS(simulate_truth({0, 0, 1.0}, away, 1.0 / 30, 10.0),
                  TrajectoryBoundsError);
}

TEST_CASE("differentiate_state") {
  const double dt = 1.0 / 30;
  Series lin;
  for (int k = 0; k < 40; ++k) {
    Sample s;
    s.t = k * dt;
    s.f = {s.t, 2.0 * s.t, 1.0};
    lin.push_back(s);
  }
  const auto d = differentiate_state(lin, DiffMethod::central2);
  for (std::size_t k = 0; k < d.size(); ++k) {
    CHECK(d[k].x() == doctest::Approx(1.0));
    CHECK(d[k].y() == doctest::Approx(2.0));
  }

  Series wave;
  for (int k = 0; k < 200; ++k) {
    Sample s;
    s.t = k * dt;
    s.f = {std::sin(s.t), 0.0, 1.0};
    wave.push_back(s);
  }
  const auto dw = differentiate_state(wave, DiffMethod::central2);
  for (std::size_t k = 1; k + 1 < dw.size(); ++k)
    CHECK(std::abs(dw[k].x() - std::cos(wave[k].t)) <= dt * dt / 6.0);

  const auto db = differentiate_state(wave, DiffMethod::backward1);
  CHECK(db[0].norm() == 0.0);  // causal startup
  for (std::size_t k = 1; k < db.size(); ++k)
    CHECK(std::abs(db[k].x() - std::cos(wave[k].t)) <= dt);

  Series tiny(2);
  CHECK_THROWS(differentiate_state(tiny, DiffMethod::central2));
}

TEST_CASE("chi projection") {
  ChiProjector hard{0.01, 100.0, false};
  CHECK(hard(0.5) == 0.5);
  CHECK(hard(150.0) == 100.0);
  CHECK(hard(-3.0) == 0.01);

  ChiProjector smooth{0.01, 100.0, true};
  CHECK(smooth(50.0) == 50.0);
  // continuity across the upper boundary layer
  double prev = smooth(98.0);
  for (double c = 98.0; c < 105.0; c += 1e-3) {
    const double cur = smooth(c);
    CHECK(cur >= 0.01);
    CHECK(cur <= 100.0);
    CHECK(std::abs(cur - prev) < 2e-3);
    prev = cur;
  }

  // projection never increases estimation error for in-range truth
  std::mt19937_64 rng(7);
  const auto unif = [&](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  for (int i = 0; i < 2000; ++i) {
    const double chi = unif(0.01, 100.0);
    const double est = unif(-50.0, 150.0);
    CHECK(std::abs(hard(est) - chi) <= std::abs(est - chi) + 1e-12);
  }
}
