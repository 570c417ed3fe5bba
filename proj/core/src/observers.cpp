#include "clpds/observers.hpp"

#include <cmath>

#include "clpds/noise.hpp"

namespace clpds {

namespace {

/// CL residual sum used by the full-order depth update and the
/// differential-mode reduced observer:
///   sum_j Omega_j (s_dot_bar_j - f_m(s_j, w_j) - Omega_j^T chi_hat)
double cl_residual_sum(std::span<const StackEntry> entries, double chi_hat) {
  double acc = 0.0;
  for (const auto& e : entries) {
    const Eigen::RowVector2d w = e.omega_row();
    const Eigen::Vector2d resid =
        e.s_dot_bar - feature_motion(e.s, e.u.omega) -
        w.transpose() * chi_hat;
    acc += w.dot(resid);
  }
  return acc;
}

}  // namespace

Eigen::Vector3d FullOrderObserver::deriv(
    const FullOrderState& st, const Measurement& m,
    std::span<const StackEntry> cl_entries) const {
  const Eigen::Vector2d xi = m.s - st.s_hat;
  const Eigen::RowVector2d w = interaction_row(m.s, m.u.v);

  Eigen::Vector3d d;
  d.head<2>() = feature_motion(m.s, m.u.omega) +
                w.transpose() * st.chi_hat +
                gains_.H_diag.asDiagonal() * xi;
  d.z() = depth_rate(m.s, st.chi_hat, m.u) + gains_.Gamma * w.dot(xi) +
          gains_.K_cl * gains_.Gamma * cl_residual_sum(cl_entries, st.chi_hat);
  return d;
}

void FullOrderObserver::step(const Measurement& m,
                             std::span<const StackEntry> cl_entries,
                             double dt) {
  const auto rhs = [&](const Eigen::Vector3d& y) {
    FullOrderState s{y.head<2>(), y.z()};
    return deriv(s, m, cl_entries);
  };
  Eigen::Vector3d y(state.s_hat.x(), state.s_hat.y(), state.chi_hat);
  const Eigen::Vector3d k1 = rhs(y);
  const Eigen::Vector3d k2 = rhs(y + dt / 2 * k1);
  const Eigen::Vector3d k3 = rhs(y + dt / 2 * k2);
  const Eigen::Vector3d k4 = rhs(y + dt * k3);
  y += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  state.s_hat = y.head<2>();
  state.chi_hat = proj_(y.z());
}

double ReducedOrderObserver::gamma_term(double K_bar,
                                        std::span<const StackEntry> entries) {
  double acc = 0.0;
  for (const auto& e : entries) acc += e.theta().dot(e.u.v);
  return -K_bar * acc;
}

void ReducedOrderObserver::initialize(double chi_hat0,
                                      std::span<const StackEntry> cl_entries) {
  chi_hat_ = chi_hat0;
  gamma_ = gamma_term(K_bar_, cl_entries);
  kappa_ = chi_hat0 - gamma_;
  initialized_ = true;
}

double ReducedOrderObserver::kappa_dot(
    double chi_hat, const Measurement& m,
    std::span<const StackEntry> cl_entries) const {
  double acc = 0.0;
  for (const auto& e : cl_entries) {
    const Eigen::RowVector2d w = e.omega_row();
    acc += e.theta().dot(e.u.v_dot) -
           w.dot(feature_motion(e.s, e.u.omega) + w.transpose() * chi_hat);
  }
  return depth_rate(m.s, chi_hat, m.u) + K_bar_ * acc;
}

double ReducedOrderObserver::chi_dot_differential(
    double chi_hat, const Measurement& m,
    std::span<const StackEntry> cl_entries) const {
  return depth_rate(m.s, chi_hat, m.u) +
         K_bar_ * cl_residual_sum(cl_entries, chi_hat);
}

void ReducedOrderObserver::step(const Measurement& m,
                                std::span<const StackEntry> cl_entries,
                                double dt) {
  if (!initialized_) initialize(chi_hat_, cl_entries);

  if (mode_ == ReducedMode::integral) {
    // gamma from the live stack, held over the step
    gamma_ = gamma_term(K_bar_, cl_entries);
    const auto rhs = [&](double k) {
      return kappa_dot(proj_(k + gamma_), m, cl_entries);
    };
    const double k1 = rhs(kappa_);
    const double k2 = rhs(kappa_ + dt / 2 * k1);
    const double k3 = rhs(kappa_ + dt / 2 * k2);
    const double k4 = rhs(kappa_ + dt * k3);
    kappa_ += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    chi_hat_ = proj_(kappa_ + gamma_);
  } else {
    const auto rhs = [&](double c) {
      return chi_dot_differential(c, m, cl_entries);
    };
    const double k1 = rhs(chi_hat_);
    const double k2 = rhs(chi_hat_ + dt / 2 * k1);
    const double k3 = rhs(chi_hat_ + dt / 2 * k2);
    const double k4 = rhs(chi_hat_ + dt * k3);
    chi_hat_ = proj_(chi_hat_ + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4));
  }
}

LsResult ls_depth_estimate(const Eigen::Vector2d& s, const CameraInput& u,
                           const Eigen::Vector2d& s_dot_bar, double tol_sv) {
  const Eigen::RowVector2d w = interaction_row(s, u.v);
  const double nrm = w.norm();
  if (nrm < tol_sv) return {0.0, true};
  const Eigen::Vector2d resid = s_dot_bar - feature_motion(s, u.omega);
  return {w.dot(resid) / (nrm * nrm), false};
}

GainCheck check_gain_condition_full(double K_cl, double Gamma, double sigma1,
                                    double L_g) {
  if (sigma1 <= 0.0) return {false, -std::numeric_limits<double>::infinity(), true};
  const double required = L_g / (sigma1 * Gamma);
  return {K_cl > required, K_cl - required, false};
}

GainCheck check_gain_condition_reduced(double K_bar, double sigma1,
                                       double L_g) {
  if (sigma1 <= 0.0) return {false, -std::numeric_limits<double>::infinity(), true};
  const double required = L_g / sigma1;
  return {K_bar > required, K_bar - required, false};
}

double estimate_lipschitz_g(const LipschitzBoxes& b, int grid_per_dim,
                            int n_random, std::uint64_t seed) {
  const auto value = [](double x, double y, double chi, double chi_hat,
                        double vz, double wx, double wy) {
    return std::abs((chi + chi_hat) * vz + (y * wx - x * wy));
  };

  double best = 0.0;
  const auto grid = [&](double lo, double hi, int i) {
    return grid_per_dim <= 1
               ? lo
               : lo + (hi - lo) * static_cast<double>(i) / (grid_per_dim - 1);
  };
  for (int ix = 0; ix < grid_per_dim; ++ix)
    for (int iy = 0; iy < grid_per_dim; ++iy)
      for (int ic = 0; ic < grid_per_dim; ++ic)
        for (int ih = 0; ih < grid_per_dim; ++ih)
          for (int iv = 0; iv < grid_per_dim; ++iv)
            for (int iwx = 0; iwx < grid_per_dim; ++iwx)
              for (int iwy = 0; iwy < grid_per_dim; ++iwy)
                best = std::max(
                    best, value(grid(b.x_lo, b.x_hi, ix),
                                grid(b.y_lo, b.y_hi, iy),
                                grid(b.chi_lo, b.chi_hi, ic),
                                grid(b.chi_lo, b.chi_hi, ih),
                                grid(b.vz_lo, b.vz_hi, iv),
                                grid(b.wx_lo, b.wx_hi, iwx),
                                grid(b.wy_lo, b.wy_hi, iwy)));

  std::mt19937_64 rng(seed);
  const auto unif = [&](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  for (int i = 0; i < n_random; ++i)
    best = std::max(best, value(unif(b.x_lo, b.x_hi), unif(b.y_lo, b.y_hi),
                                unif(b.chi_lo, b.chi_hi),
                                unif(b.chi_lo, b.chi_hi),
                                unif(b.vz_lo, b.vz_hi),
                                unif(b.wx_lo, b.wx_hi),
                                unif(b.wy_lo, b.wy_hi)));
  return best;
}

}  // namespace clpds
