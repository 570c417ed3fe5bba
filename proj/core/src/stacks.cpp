#include "clpds/stacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace clpds {

StackEntry StackEntry::make(double t, const Eigen::Vector2d& s,
                            const CameraInput& u,
                            const Eigen::Vector2d& s_dot_bar) {
  StackEntry e;
  e.t = t;
  e.s = s;
  e.u = u;
  e.s_dot_bar = s_dot_bar;
  e.info = excitation_info(s, u.v);
  return e;
}

double HistoryStack::sigma1() const {
  return std::accumulate(entries_.begin(), entries_.end(), 0.0,
                         [](double acc, const StackEntry& e) {
                           return acc + e.info;
                         });
}

void HistoryStack::append(const StackEntry& e) {
  entries_.push_back(e);
  sigma_bar_ = std::max(sigma_bar_, e.info);
}

void HistoryStack::replace_all(std::vector<StackEntry> fresh) {
  entries_ = std::move(fresh);
  for (const auto& e : entries_) sigma_bar_ = std::max(sigma_bar_, e.info);
}

void AuxiliaryStack::push(StackEntry e) {
  e.seq = ++seq_counter_;
  entries_[next_] = std::move(e);
  next_ = (next_ + 1) % entries_.size();
}

std::vector<StackEntry> AuxiliaryStack::top_by_info(std::size_t count) const {
  std::vector<StackEntry> sorted = entries_;
  std::sort(sorted.begin(), sorted.end(),
            [](const StackEntry& a, const StackEntry& b) {
              if (a.info != b.info) return a.info > b.info;
              return a.seq > b.seq;  // newer wins ties
            });
  if (sorted.size() > count) sorted.resize(count);
  return sorted;
}

PushResult push_measurement(AuxiliaryStack& aux, HistoryStack& hist,
                            const StackEntry& entry) {
  PushResult res;
  if (!hist.full()) {
    hist.append(entry);
    res.appended = true;
  }
  aux.push(entry);
  if (hist.full() && !res.appended) {
    auto candidates = aux.top_by_info(hist.capacity());
    const double cand_sum = std::accumulate(
        candidates.begin(), candidates.end(), 0.0,
        [](double acc, const StackEntry& e) { return acc + e.info; });
    if (cand_sum >= hist.epsilon()) {
      hist.replace_all(std::move(candidates));
      res.replaced = true;
    }
  }
  return res;
}

double pe_integral(const Series& series, double t0, double t1) {
  if (series.size() < 2 || t0 >= t1)
    throw std::invalid_argument("pe_integral: bad window");
  if (t0 < series.front().t - 1e-9 || t1 > series.back().t + 1e-9)
    throw std::invalid_argument("pe_integral: window outside series");

  const double dt = series[1].t - series[0].t;
  const auto idx = [&](double t) {
    return static_cast<std::size_t>(
        std::clamp(std::floor((t - series.front().t) / dt + 0.5), 0.0,
                   static_cast<double>(series.size() - 1)));
  };
  const std::size_t i0 = idx(t0), i1 = idx(t1);
  if (i1 <= i0) throw std::invalid_argument("pe_integral: empty window");

  // Left-Riemann sum over the half-open window [t0, t1): the sample at t1
  // belongs to the next window, so a velocity switch at the right edge does
  // not leak into the excitation measured for this one.
  double acc = 0.0;
  for (std::size_t k = i0; k < i1; ++k)
    acc += excitation_info(series[k].f.s(), series[k].u.v) *
           (series[k + 1].t - series[k].t);
  return acc;
}

}  // namespace clpds
