#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace sel {

// Extended real line with the additive conventions used by every estimator
// here: log 0 = -inf, and a sum with a -inf operand is -inf even if the other
// operand is +inf. +inf wins only against finite values.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  constexpr ExtReal(double v) : v_(v) {}  // NOLINT: implicit by design

  static constexpr ExtReal neg_inf() {
    return ExtReal(-std::numeric_limits<double>::infinity());
  }
  static constexpr ExtReal pos_inf() {
    return ExtReal(std::numeric_limits<double>::infinity());
  }

  constexpr double value() const { return v_; }
  bool is_neg_inf() const { return std::isinf(v_) && v_ < 0; }
  bool is_pos_inf() const { return std::isinf(v_) && v_ > 0; }
  bool is_finite() const { return std::isfinite(v_); }

  friend ExtReal operator+(ExtReal a, ExtReal b) {
    if (a.is_neg_inf() || b.is_neg_inf()) return neg_inf();
    if (a.is_pos_inf() || b.is_pos_inf()) return pos_inf();
    return ExtReal(a.v_ + b.v_);
  }
  ExtReal& operator+=(ExtReal o) { return *this = *this + o; }

  // Scale by a positive constant (used for (1/d) * log N).
  ExtReal scaled(double c) const {
    if (!is_finite()) return *this;
    return ExtReal(v_ * c);
  }

  friend bool operator==(ExtReal a, ExtReal b) { return a.v_ == b.v_; }
  friend bool operator<(ExtReal a, ExtReal b) { return a.v_ < b.v_; }
  friend bool operator<=(ExtReal a, ExtReal b) { return a.v_ <= b.v_; }
  friend bool operator>(ExtReal a, ExtReal b) { return a.v_ > b.v_; }
  friend bool operator>=(ExtReal a, ExtReal b) { return a.v_ >= b.v_; }

 private:
  double v_ = 0.0;
};

inline ExtReal ext_max(ExtReal a, ExtReal b) { return a >= b ? a : b; }
inline ExtReal ext_min(ExtReal a, ExtReal b) { return a <= b ? a : b; }

// log of a cardinality, honouring log 0 = -inf.
inline ExtReal log_count(std::uint64_t n) {
  return n == 0 ? ExtReal::neg_inf() : ExtReal(std::log(static_cast<double>(n)));
}

// Certified interval [lo, hi] around an estimated quantity.
struct Bracket {
  ExtReal lo = ExtReal::neg_inf();
  ExtReal hi = ExtReal::pos_inf();

  static Bracket point(ExtReal v) { return Bracket{v, v}; }

  bool valid() const { return lo <= hi; }

  bool contains(double x) const { return lo <= ExtReal(x) && ExtReal(x) <= hi; }

  // Width: 0 for a degenerate pair of equal infinities, +inf if only one side
  // is unbounded.
  double width() const {
    if (lo == hi) return 0.0;
    if (!lo.is_finite() || !hi.is_finite()) {
      return std::numeric_limits<double>::infinity();
    }
    return hi.value() - lo.value();
  }

  // Point summary used by comparison reports: with one unbounded side the
  // finite endpoint is the estimate.
  double midpoint() const {
    if (lo.is_finite() && hi.is_finite()) return 0.5 * (lo.value() + hi.value());
    if (hi.is_finite()) return hi.value();
    if (lo.is_finite()) return lo.value();
    return lo.value();  // both infinite (degenerate)
  }

  Bracket scaled(double c) const { return Bracket{lo.scaled(c), hi.scaled(c)}; }

  friend Bracket operator+(const Bracket& a, const Bracket& b) {
    return Bracket{a.lo + b.lo, a.hi + b.hi};
  }
};

inline Bracket bracket_max(const Bracket& a, const Bracket& b) {
  return Bracket{ext_max(a.lo, b.lo), ext_max(a.hi, b.hi)};
}

inline Bracket bracket_min(const Bracket& a, const Bracket& b) {
  return Bracket{ext_min(a.lo, b.lo), ext_min(a.hi, b.hi)};
}

inline bool brackets_overlap(const Bracket& a, const Bracket& b, double tol = 0.0) {
  return a.lo <= b.hi + ExtReal(tol) && b.lo <= a.hi + ExtReal(tol);
}

}  // namespace sel
