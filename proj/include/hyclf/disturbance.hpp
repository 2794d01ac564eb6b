#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include "hyclf/model.hpp"
#include "hyclf/rng.hpp"

namespace hyclf {

enum class DisturbanceKind { Constant, RateLimited, Adversarial };

inline const char* to_string(DisturbanceKind k) {
  switch (k) {
    case DisturbanceKind::Constant: return "constant";
    case DisturbanceKind::RateLimited: return "rate_limited";
    case DisturbanceKind::Adversarial: return "adversarial";
  }
  return "?";
}

/// Disturbance source for a single run. Emitted samples stay in the model's
/// per-state disturbance boxes (the `stress` config enlarges the model box
/// instead of bypassing it). Copy one instance per run: state is local.
///
/// - constant: fixed (w_c, w_d) values, clamped to the box.
/// - rate_limited: seeded random walk. Each flow step draws a rate vector in
///   [-rate, rate]^d; the walk advances by rate * (realized step length) on
///   commit and is projected onto the box, so emitted samples obey the
///   Lipschitz bound exactly even across event-split steps. Jumps redraw
///   uniformly in the box (the exosystem jump map covers the whole set).
/// - adversarial: per step, the box vertex maximizing <gradV, F> during
///   flows and V(G(x,u,w)) at jumps.
class DisturbanceGenerator {
 public:
  using Objective = std::function<double(const Vec& x)>;  // V for adversarial
  using Gradient = std::function<Vec(const Vec& x)>;      // gradV

  static DisturbanceGenerator constant(Vec w_c, Vec w_d) {
    DisturbanceGenerator g;
    g.kind_ = DisturbanceKind::Constant;
    g.wc_value_ = std::move(w_c);
    g.wd_value_ = std::move(w_d);
    return g;
  }

  static DisturbanceGenerator rate_limited(double rate, std::uint64_t seed) {
    if (rate < 0) throw std::invalid_argument("rate_limited: rate must be >= 0");
    DisturbanceGenerator g;
    g.kind_ = DisturbanceKind::RateLimited;
    g.rate_ = rate;
    g.seed_ = seed;
    return g;
  }

  static DisturbanceGenerator adversarial(Objective V, Gradient gradV) {
    DisturbanceGenerator g;
    g.kind_ = DisturbanceKind::Adversarial;
    g.V_ = std::move(V);
    g.gradV_ = std::move(gradV);
    return g;
  }

  DisturbanceKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }

  void reset(const HybridSystemModel& model, const Vec& x0) {
    rng_ = Rng(seed_);
    walk_initialized_ = false;
    if (kind_ == DisturbanceKind::RateLimited) {
      const InputBox bc = model.dist_box_flow(x0);
      if (!bc.empty()) wc_walk_ = bc.min_norm_point();
      walk_initialized_ = !bc.empty();
    }
  }

  /// Flow disturbance for the step starting at x, held constant across it.
  /// For the rate-limited walk this also draws the step's rate vector;
  /// commit_flow advances the walk by the realized step length.
  Vec flow_value(const HybridSystemModel& model, const Vec& x, const Vec& u_c,
                 double /*dt_intended*/) {
    const InputBox box = model.dist_box_flow(x);
    if (box.empty()) return Vec::Zero(model.d_c);
    switch (kind_) {
      case DisturbanceKind::Constant:
        return box.clamp(fit(wc_value_, model.d_c));
      case DisturbanceKind::RateLimited: {
        if (!walk_initialized_) {
          wc_walk_ = box.min_norm_point();
          walk_initialized_ = true;
        }
        wc_walk_ = box.clamp(wc_walk_);
        wc_rate_.resize(wc_walk_.size());
        for (Eigen::Index i = 0; i < wc_rate_.size(); ++i)
          wc_rate_[i] = rng_.uniform(-rate_, rate_);
        return wc_walk_;
      }
      case DisturbanceKind::Adversarial: {
        double best = -std::numeric_limits<double>::infinity();
        Vec bestw = box.min_norm_point();
        const Vec g = gradV_(x);
        for (const auto& w : box.vertices()) {
          const double val = g.dot(model.flow_map(x, u_c, w));
          if (val > best) {
            best = val;
            bestw = w;
          }
        }
        return bestw;
      }
    }
    return box.min_norm_point();
  }

  /// Advances the rate-limited walk after a flow step of realized length.
  void commit_flow(const HybridSystemModel& model, const Vec& x_next,
                   double realized_dt) {
    if (kind_ != DisturbanceKind::RateLimited || !walk_initialized_) return;
    wc_walk_ += realized_dt * wc_rate_;
    const InputBox box = model.dist_box_flow(x_next);
    if (!box.empty()) wc_walk_ = box.clamp(wc_walk_);
  }

  /// Jump disturbance applied at x.
  Vec jump_value(const HybridSystemModel& model, const Vec& x, const Vec& u_d) {
    const InputBox box = model.dist_box_jump(x);
    if (box.empty()) return Vec::Zero(model.d_d);
    switch (kind_) {
      case DisturbanceKind::Constant:
        return box.clamp(fit(wd_value_, model.d_d));
      case DisturbanceKind::RateLimited: {
        Vec w(box.dim());
        for (Eigen::Index i = 0; i < w.size(); ++i)
          w[i] = rng_.uniform(box.lower()[i], box.upper()[i]);
        // jump also redraws the flow-walk state
        walk_initialized_ = false;
        return w;
      }
      case DisturbanceKind::Adversarial: {
        double best = -std::numeric_limits<double>::infinity();
        Vec bestw = box.min_norm_point();
        for (const auto& w : box.vertices()) {
          const double val = V_(model.jump_map(x, u_d, w));
          if (val > best) {
            best = val;
            bestw = w;
          }
        }
        return bestw;
      }
    }
    return box.min_norm_point();
  }

 private:
  static Vec fit(const Vec& v, int dim) {
    if (v.size() == dim) return v;
    Vec r = Vec::Zero(dim);
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(v.size(), dim); ++i)
      r[i] = v[i];
    return r;
  }

  DisturbanceKind kind_ = DisturbanceKind::Constant;
  Vec wc_value_{Vec::Zero(0)}, wd_value_{Vec::Zero(0)};
  double rate_ = 0.0;
  std::uint64_t seed_ = 0;
  Objective V_;
  Gradient gradV_;

  Rng rng_{0};
  Vec wc_walk_, wc_rate_;
  bool walk_initialized_ = false;
};

}  // namespace hyclf
