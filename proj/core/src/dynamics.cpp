#include "clpds/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace clpds {

Eigen::Vector2d feature_motion(const Eigen::Vector2d& s,
                               const Eigen::Vector3d& omega) {
  const double x = s.x(), y = s.y();
  Eigen::Matrix<double, 2, 3> J;
  J << x * y, -(1.0 + x * x), y,
      1.0 + y * y, -x * y, -x;
  return J * omega;
}

Eigen::RowVector2d interaction_row(const Eigen::Vector2d& s,
                                   const Eigen::Vector3d& v) {
  return {s.x() * v.z() - v.x(), s.y() * v.z() - v.y()};
}

double depth_rate(const Eigen::Vector2d& s, double chi, const CameraInput& u) {
  return u.v.z() * chi * chi +
         (s.y() * u.omega.x() - s.x() * u.omega.y()) * chi;
}

namespace {

Eigen::Vector3d pds_rhs(double t, const Eigen::Vector3d& state,
                        const VelocityProfile& profile,
                        const Eigen::Vector2d* frozen_fb) {
  const Eigen::Vector2d s = state.head<2>();
  const double chi = state.z();
  const CameraInput u = profile(t, frozen_fb ? *frozen_fb : s);
  Eigen::Vector3d d;
  d.head<2>() = feature_motion(s, u.omega) +
                interaction_row(s, u.v).transpose() * chi;
  d.z() = depth_rate(s, chi, u);
  return d;
}

Eigen::Vector3d rk4_step(double t, const Eigen::Vector3d& y, double dt,
                         const VelocityProfile& profile,
                         const Eigen::Vector2d* frozen_fb) {
  const Eigen::Vector3d k1 = pds_rhs(t, y, profile, frozen_fb);
  const Eigen::Vector3d k2 =
      pds_rhs(t + dt / 2, y + dt / 2 * k1, profile, frozen_fb);
  const Eigen::Vector3d k3 =
      pds_rhs(t + dt / 2, y + dt / 2 * k2, profile, frozen_fb);
  const Eigen::Vector3d k4 = pds_rhs(t + dt, y + dt * k3, profile, frozen_fb);
  return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Series simulate_truth(const EuclideanPoint& m0, const VelocityProfile& profile,
                      double dt, double horizon, const StateBounds& bounds,
                      const FeedbackHook* hook) {
  if (dt <= 0.0) throw std::invalid_argument("simulate_truth: dt must be > 0");
  if (horizon < dt)
    throw std::invalid_argument("simulate_truth: horizon shorter than dt");
  if (m0.Z <= 0.0)
    throw std::invalid_argument("simulate_truth: Z0 must be positive");

  const std::size_t n = static_cast<std::size_t>(std::floor(horizon / dt + 0.5)) + 1;
  Series out;
  out.reserve(n);

  const FeatureState f0 = m0.to_feature();
  Eigen::Vector3d y(f0.x, f0.y, f0.chi);

  std::vector<Eigen::Vector3d> v_cmd(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    const FeatureState f{y.x(), y.y(), y.z()};
    if (!bounds.contains(f)) {
      std::ostringstream msg;
      msg << "simulate_truth: trajectory left state bounds at t=" << t
          << " (x=" << f.x << ", y=" << f.y << ", chi=" << f.chi << ")";
      throw TrajectoryBoundsError(msg.str());
    }
    Eigen::Vector2d fb = y.head<2>();
    if (hook) fb = (*hook)(k, fb);
    const Eigen::Vector2d* frozen = hook ? &fb : nullptr;

    Sample smp;
    smp.t = t;
    smp.f = f;
    smp.u = profile(t, fb);
    smp.u.t = t;
    v_cmd[k] = smp.u.v;
    out.push_back(smp);

    if (k + 1 < n) y = rk4_step(t, y, dt, profile, frozen);
  }

  const auto accel = differentiate_vec3(v_cmd, dt);
  for (std::size_t k = 0; k < n; ++k) out[k].u.v_dot = accel[k];
  return out;
}

std::vector<Eigen::Vector2d> differentiate_state(const Series& series,
                                                 DiffMethod method,
                                                 int savgol_window) {
  const std::size_t n = series.size();
  const std::size_t need = method == DiffMethod::backward1 ? 2 : 3;
  if (n < need)
    throw std::invalid_argument("differentiate_state: not enough samples");
  const double dt = series[1].t - series[0].t;

  std::vector<Eigen::Vector2d> d(n);
  const auto s = [&](std::size_t k) { return series[k].f.s(); };

  switch (method) {
    case DiffMethod::central2:
      d[0] = (-3.0 * s(0) + 4.0 * s(1) - s(2)) / (2.0 * dt);
      for (std::size_t k = 1; k + 1 < n; ++k)
        d[k] = (s(k + 1) - s(k - 1)) / (2.0 * dt);
      d[n - 1] = (3.0 * s(n - 1) - 4.0 * s(n - 2) + s(n - 3)) / (2.0 * dt);
      break;

    case DiffMethod::backward1:
      d[0].setZero();  // no past sample yet
      for (std::size_t k = 1; k < n; ++k) d[k] = (s(k) - s(k - 1)) / dt;
      break;

    case DiffMethod::savgol: {
      if (savgol_window < 5 || savgol_window % 2 == 0)
        throw std::invalid_argument(
            "differentiate_state: savgol window must be odd and >= 5");
      const std::ptrdiff_t m = savgol_window / 2;
      const std::ptrdiff_t last = static_cast<std::ptrdiff_t>(n) - 1;
      for (std::ptrdiff_t k = 0; k <= last; ++k) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, k - m);
        const std::ptrdiff_t hi = std::min(last, k + m);
        // least-squares quadratic in tau = t_j - t_k; the derivative at the
        // sample is the linear coefficient
        Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
        Eigen::Matrix<double, 3, 2> atb = Eigen::Matrix<double, 3, 2>::Zero();
        for (std::ptrdiff_t j = lo; j <= hi; ++j) {
          const double tau = static_cast<double>(j - k) * dt;
          const Eigen::Vector3d row(1.0, tau, tau * tau);
          ata += row * row.transpose();
          atb += row * s(static_cast<std::size_t>(j)).transpose();
        }
        const Eigen::Matrix<double, 3, 2> coef = ata.ldlt().solve(atb);
        d[static_cast<std::size_t>(k)] = coef.row(1).transpose();
      }
      break;
    }

    case DiffMethod::analytic:
      for (std::size_t k = 0; k < n; ++k) {
        const auto& smp = series[k];
        if (!std::isfinite(smp.f.chi))
          throw std::invalid_argument(
              "differentiate_state: analytic method needs a depth channel");
        d[k] = feature_motion(smp.f.s(), smp.u.omega) +
               interaction_row(smp.f.s(), smp.u.v).transpose() * smp.f.chi;
      }
      break;
  }
  return d;
}

std::vector<Eigen::Vector3d> differentiate_vec3(
    const std::vector<Eigen::Vector3d>& v, double dt) {
  const std::size_t n = v.size();
  std::vector<Eigen::Vector3d> d(n, Eigen::Vector3d::Zero());
  if (n < 3) return d;
  d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt);
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (v[k + 1] - v[k - 1]) / (2.0 * dt);
  d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dt);
  return d;
}

double ChiProjector::operator()(double chi_hat) const {
  if (!smooth) return std::clamp(chi_hat, chi_lo, chi_hi);
  const double w = layer_frac * (chi_hi - chi_lo);
  if (chi_hat > chi_hi - w)
    return chi_hi - w + w * std::tanh((chi_hat - (chi_hi - w)) / w);
  if (chi_hat < chi_lo + w)
    return chi_lo + w - w * std::tanh(((chi_lo + w) - chi_hat) / w);
  return chi_hat;
}

}  // namespace clpds
