#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hyclf {

/// Axis-aligned box of admissible input or disturbance values at a given
/// state. Coordinates may be half-infinite (inputs); the empty box is a
/// value, not an error: it marks states where no admissible value exists.
class InputBox {
 public:
  InputBox() : empty_(true) {}

  static InputBox bounds(Eigen::VectorXd lower, Eigen::VectorXd upper) {
    if (lower.size() != upper.size())
      throw std::invalid_argument("InputBox: lower/upper dimension mismatch");
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
      const bool lo_fin = std::isfinite(lower[i]);
      const bool hi_fin = std::isfinite(upper[i]);
      if (lo_fin && hi_fin && lower[i] > upper[i])
        throw std::invalid_argument("InputBox: lower > upper");
    }
    InputBox b;
    b.empty_ = false;
    b.lower_ = std::move(lower);
    b.upper_ = std::move(upper);
    return b;
  }

  static InputBox empty_box(Eigen::Index dim) {
    InputBox b;
    b.empty_ = true;
    b.lower_ = Eigen::VectorXd::Zero(dim);
    b.upper_ = Eigen::VectorXd::Zero(dim);
    return b;
  }

  /// (-inf, inf) in every coordinate.
  static InputBox unbounded(Eigen::Index dim) {
    const double inf = std::numeric_limits<double>::infinity();
    return bounds(Eigen::VectorXd::Constant(dim, -inf),
                  Eigen::VectorXd::Constant(dim, inf));
  }

  static InputBox symmetric(const Eigen::VectorXd& radius) {
    return bounds(-radius, radius);
  }

  bool empty() const { return empty_; }
  Eigen::Index dim() const { return lower_.size(); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }

  bool bounded_at(Eigen::Index i) const {
    return std::isfinite(lower_[i]) && std::isfinite(upper_[i]);
  }

  bool fully_bounded() const {
    if (empty_) return true;
    for (Eigen::Index i = 0; i < dim(); ++i)
      if (!bounded_at(i)) return false;
    return true;
  }

  bool contains(const Eigen::VectorXd& v, double tol = 0.0) const {
    if (empty_) return false;
    if (v.size() != dim())
      throw std::invalid_argument("InputBox::contains: dimension mismatch");
    for (Eigen::Index i = 0; i < dim(); ++i) {
      if (v[i] < lower_[i] - tol || v[i] > upper_[i] + tol) return false;
    }
    return true;
  }

  /// Componentwise projection onto the box.
  Eigen::VectorXd clamp(const Eigen::VectorXd& v) const {
    if (empty_) throw std::logic_error("InputBox::clamp on empty box");
    Eigen::VectorXd r = v;
    for (Eigen::Index i = 0; i < dim(); ++i) {
      if (r[i] < lower_[i]) r[i] = lower_[i];
      if (r[i] > upper_[i]) r[i] = upper_[i];
    }
    return r;
  }

  /// Minimum-norm element (projection of the origin).
  Eigen::VectorXd min_norm_point() const {
    return clamp(Eigen::VectorXd::Zero(dim()));
  }

  /// All 2^d corners; requires a fully bounded box.
  std::vector<Eigen::VectorXd> vertices() const {
    if (empty_) return {};
    if (!fully_bounded())
      throw std::logic_error("InputBox::vertices on unbounded box");
    const Eigen::Index d = dim();
    std::vector<Eigen::VectorXd> out;
    if (d == 0) {
      out.emplace_back(Eigen::VectorXd(0));
      return out;
    }
    out.reserve(std::size_t{1} << d);
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
      Eigen::VectorXd v(d);
      for (Eigen::Index i = 0; i < d; ++i)
        v[i] = (mask >> i) & 1 ? upper_[i] : lower_[i];
      out.push_back(std::move(v));
    }
    return out;
  }

  /// Regular grid with `per_coord` samples per coordinate (bounded box).
  std::vector<Eigen::VectorXd> grid(int per_coord) const {
    if (empty_) return {};
    if (!fully_bounded())
      throw std::logic_error("InputBox::grid on unbounded box");
    const Eigen::Index d = dim();
    std::vector<Eigen::VectorXd> out;
    if (d == 0) {
      out.emplace_back(Eigen::VectorXd(0));
      return out;
    }
    std::size_t total = 1;
    for (Eigen::Index i = 0; i < d; ++i) total *= per_coord;
    out.reserve(total);
    std::vector<int> idx(d, 0);
    for (std::size_t k = 0; k < total; ++k) {
      Eigen::VectorXd v(d);
      for (Eigen::Index i = 0; i < d; ++i) {
        const double f =
            per_coord == 1 ? 0.5 : static_cast<double>(idx[i]) / (per_coord - 1);
        v[i] = lower_[i] + f * (upper_[i] - lower_[i]);
      }
      out.push_back(std::move(v));
      for (Eigen::Index i = 0; i < d; ++i) {
        if (++idx[i] < per_coord) break;
        idx[i] = 0;
      }
    }
    return out;
  }

  /// Smallest box containing both operands (componentwise).
  static InputBox hull(const InputBox& a, const InputBox& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    return bounds(a.lower_.cwiseMin(b.lower_), a.upper_.cwiseMax(b.upper_));
  }

 private:
  bool empty_ = true;
  Eigen::VectorXd lower_, upper_;
};

}  // namespace hyclf
