#pragma once

#include <cmath>
#include <limits>
#include <ostream>

namespace hyclf {

/// Real value extended with a distinguished -inf marker, used by the
/// decrease functionals to encode "outside the admissible set".
class ExtendedReal {
 public:
  constexpr ExtendedReal() : value_(0.0), neg_inf_(false) {}
  constexpr explicit ExtendedReal(double v) : value_(v), neg_inf_(false) {}

  static constexpr ExtendedReal neg_infinity() {
    ExtendedReal r;
    r.neg_inf_ = true;
    r.value_ = -std::numeric_limits<double>::infinity();
    return r;
  }

  constexpr bool is_neg_inf() const { return neg_inf_; }
  constexpr bool finite() const { return !neg_inf_; }

  /// Finite value; calling this on -inf returns -infinity (double).
  constexpr double value() const { return value_; }

  friend constexpr bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.neg_inf_) return !b.neg_inf_;
    if (b.neg_inf_) return false;
    return a.value_ < b.value_;
  }
  friend constexpr bool operator<=(const ExtendedReal& a, const ExtendedReal& b) {
    return !(b < a);
  }
  friend constexpr bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.neg_inf_ || b.neg_inf_) return a.neg_inf_ && b.neg_inf_;
    return a.value_ == b.value_;
  }

  /// x <= c for a plain real threshold; -inf passes every threshold.
  constexpr bool leq(double c) const { return neg_inf_ || value_ <= c; }

  friend std::ostream& operator<<(std::ostream& os, const ExtendedReal& r) {
    if (r.neg_inf_) return os << "-inf";
    return os << r.value_;
  }

 private:
  double value_;
  bool neg_inf_;
};

}  // namespace hyclf
