#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace hyclf {

/// A point (t, j) of hybrid time: t seconds of flow, j jumps so far.
struct HybridTime {
  double t = 0.0;
  std::int64_t j = 0;
};

/// Union of intervals [t_start, t_end] x {j} with instantaneous jumps:
/// consecutive intervals share the t endpoint and increment j by one.
class HybridTimeDomain {
 public:
  struct Interval {
    double t_start;
    double t_end;
    std::int64_t j;
  };

  void start(double t0, std::int64_t j0) {
    if (!intervals_.empty())
      throw std::logic_error("HybridTimeDomain::start on nonempty domain");
    intervals_.push_back({t0, t0, j0});
  }

  /// Extend the current interval's flow time.
  void extend_flow(double t_end) {
    auto& iv = current();
    if (t_end < iv.t_end)
      throw std::invalid_argument("HybridTimeDomain: flow time must not decrease");
    iv.t_end = t_end;
  }

  /// Close the current interval and open the next one at the same t.
  void append_jump() {
    auto& iv = current();
    intervals_.push_back({iv.t_end, iv.t_end, iv.j + 1});
  }

  bool empty() const { return intervals_.empty(); }
  const std::vector<Interval>& intervals() const { return intervals_; }

  bool contains(double t, std::int64_t j, double tol = 0.0) const {
    for (const auto& iv : intervals_) {
      if (iv.j == j && t >= iv.t_start - tol && t <= iv.t_end + tol) return true;
    }
    return false;
  }

  HybridTime end() const {
    const auto& iv = current();
    return {iv.t_end, iv.j};
  }

  /// Structural invariants: matching endpoints, unit j increments,
  /// nonnegative interval lengths.
  bool well_formed() const {
    for (std::size_t k = 0; k < intervals_.size(); ++k) {
      const auto& iv = intervals_[k];
      if (iv.t_end < iv.t_start) return false;
      if (k + 1 < intervals_.size()) {
        const auto& nx = intervals_[k + 1];
        if (nx.t_start != iv.t_end) return false;
        if (nx.j != iv.j + 1) return false;
      }
    }
    return true;
  }

 private:
  Interval& current() {
    if (intervals_.empty())
      throw std::logic_error("HybridTimeDomain: empty domain");
    return intervals_.back();
  }
  const Interval& current() const {
    if (intervals_.empty())
      throw std::logic_error("HybridTimeDomain: empty domain");
    return intervals_.back();
  }

  std::vector<Interval> intervals_;
};

}  // namespace hyclf
