#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace qpr {

/// Extended real value: finite, -inf or +inf. Optimal values of
/// infeasible/unbounded problems are +inf/-inf under the minimization
/// convention, and we want total, explicit comparisons instead of
/// sentinel floats.
class ExtReal {
 public:
  enum class Kind { NegInf = -1, Finite = 0, PosInf = 1 };

  ExtReal() : kind_(Kind::Finite), value_(0.0) {}

  static ExtReal finite(double v) { return ExtReal(Kind::Finite, v); }
  static ExtReal neg_inf() { return ExtReal(Kind::NegInf, 0.0); }
  static ExtReal pos_inf() { return ExtReal(Kind::PosInf, 0.0); }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::Finite; }
  bool is_neg_inf() const { return kind_ == Kind::NegInf; }
  bool is_pos_inf() const { return kind_ == Kind::PosInf; }

  /// Finite payload; only meaningful when is_finite().
  double value() const { return value_; }

  /// Collapses to a double using IEEE infinities (for display/plot files).
  double as_double() const {
    switch (kind_) {
      case Kind::NegInf:
        return -std::numeric_limits<double>::infinity();
      case Kind::PosInf:
        return std::numeric_limits<double>::infinity();
      default:
        return value_;
    }
  }

  ExtReal operator-() const {
    switch (kind_) {
      case Kind::NegInf:
        return pos_inf();
      case Kind::PosInf:
        return neg_inf();
      default:
        return finite(-value_);
    }
  }

  friend bool operator==(const ExtReal& a, const ExtReal& b) {
    if (a.kind_ != b.kind_) return false;
    return !a.is_finite() || a.value_ == b.value_;
  }
  friend bool operator!=(const ExtReal& a, const ExtReal& b) { return !(a == b); }
  friend bool operator<(const ExtReal& a, const ExtReal& b) {
    if (a.kind_ != b.kind_) return static_cast<int>(a.kind_) < static_cast<int>(b.kind_);
    return a.is_finite() && a.value_ < b.value_;
  }
  friend bool operator<=(const ExtReal& a, const ExtReal& b) { return a < b || a == b; }
  friend bool operator>(const ExtReal& a, const ExtReal& b) { return b < a; }
  friend bool operator>=(const ExtReal& a, const ExtReal& b) { return b <= a; }

  /// True when both are finite and within tol, or both are the same infinity.
  friend bool close(const ExtReal& a, const ExtReal& b, double tol) {
    if (a.is_finite() && b.is_finite()) return std::abs(a.value_ - b.value_) <= tol;
    return a.kind_ == b.kind_;
  }

  std::string str() const {
    switch (kind_) {
      case Kind::NegInf:
        return "-inf";
      case Kind::PosInf:
        return "+inf";
      default:
        return std::to_string(value_);
    }
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtReal& v) {
    switch (v.kind_) {
      case Kind::NegInf:
        return os << "-inf";
      case Kind::PosInf:
        return os << "+inf";
      default:
        return os << v.value_;
    }
  }

 private:
  ExtReal(Kind k, double v) : kind_(k), value_(v) {}

  Kind kind_;
  double value_;
};

}  // namespace qpr
