// History and auxiliary stacks driving the concurrent-learning correction
// terms, plus excitation diagnostics.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "clpds/dynamics.hpp"
#include "clpds/types.hpp"

namespace clpds {

/// One recorded data tuple. Carries both the numerically differentiated
/// state (full-order / differential-mode sums) and the linear acceleration
/// (reduced-order integral-mode sums); unused fields stay zero.
struct StackEntry {
  double t = 0.0;
  Eigen::Vector2d s = Eigen::Vector2d::Zero();
  CameraInput u;
  Eigen::Vector2d s_dot_bar = Eigen::Vector2d::Zero();
  double info = 0.0;  ///< Omega * Omega^T, recomputed on construction
  std::uint64_t seq = 0;  ///< insertion order, used for recency tie-breaks

  static StackEntry make(double t, const Eigen::Vector2d& s,
                         const CameraInput& u,
                         const Eigen::Vector2d& s_dot_bar = Eigen::Vector2d::Zero());

  Eigen::RowVector2d omega_row() const { return interaction_row(s, u.v); }
  Eigen::Vector3d theta() const {
    return {s.x(), s.y(), -(s.x() * s.x() + s.y() * s.y()) / 2.0};
  }
};

/// Fixed-capacity store of the M-1 informative past points. The current
/// measurement is not stored here; callers append it to the CL sums as the
/// Mth term.
class HistoryStack {
 public:
  HistoryStack(std::size_t capacity, double epsilon)
      : capacity_(capacity), epsilon_(epsilon) {}

  const std::vector<StackEntry>& entries() const { return entries_; }
  std::size_t capacity() const { return capacity_; }
  double epsilon() const { return epsilon_; }
  bool full() const { return entries_.size() >= capacity_; }

  /// Sum of info over stored entries (excludes the current-time slot).
  double sigma1() const;
  /// Running max of info over everything ever stored.
  double sigma_bar() const { return sigma_bar_; }
  /// Complete per the analysis: fully populated with sigma1 > 0.
  bool complete() const { return full() && sigma1() > 0.0; }

  void append(const StackEntry& e);
  void replace_all(std::vector<StackEntry> fresh);

 private:
  std::size_t capacity_;
  double epsilon_;
  double sigma_bar_ = 0.0;
  std::vector<StackEntry> entries_;
};

/// Sliding window of the N most recent points, pre-filled with zero entries
/// (which carry zero info and are eligible for selection).
class AuxiliaryStack {
 public:
  explicit AuxiliaryStack(std::size_t capacity)
      : entries_(capacity), next_(0) {}

  std::size_t capacity() const { return entries_.size(); }
  const std::vector<StackEntry>& entries() const { return entries_; }

  void push(StackEntry e);

  /// The count most informative entries, info descending, newer first on
  /// ties.
  std::vector<StackEntry> top_by_info(std::size_t count) const;

 private:
  std::vector<StackEntry> entries_;
  std::size_t next_;
  std::uint64_t seq_counter_ = 0;
};

struct PushResult {
  bool appended = false;  ///< entry stored while the stack was filling
  bool replaced = false;  ///< full-stack replacement from the aux window
};

/// One iteration of the stack-update procedure: fill the history stack
/// while it has room, insert into the auxiliary window cyclically, and once
/// full replace the whole stored set with the top M-1 auxiliary points
/// whenever their info sum clears the epsilon gate.
PushResult push_measurement(AuxiliaryStack& aux, HistoryStack& hist,
                            const StackEntry& entry);

/// Excitation integral of Omega*Omega^T over the half-open window [t0, t1)
/// (left-Riemann sum, so a velocity switch at t1 does not leak into the
/// window); throws if the window is outside the series.
double pe_integral(const Series& series, double t0, double t1);

}  // namespace clpds
