#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace affdim {

/// Non-negative real stored as mant * 2^exp with mant in [0.5, 1) or zero.
/// Word sums at depth 30+ leave the double range, so partition sums live here.
class Scaled {
 public:
  constexpr Scaled() = default;

  static Scaled from_double(double x) {
    Scaled r;
    if (x == 0.0) return r;
    int e = 0;
    r.mant_ = std::frexp(x, &e);
    r.exp_ = e;
    return r;
  }

  static Scaled from_log2(double l) {
    Scaled r;
    if (std::isinf(l) && l < 0) return r;
    const double fl = std::floor(l);
    r.mant_ = std::exp2(l - fl);
    r.exp_ = static_cast<std::int64_t>(fl);
    r.normalize();
    return r;
  }

  static Scaled infinity() {
    Scaled r;
    r.mant_ = std::numeric_limits<double>::infinity();
    return r;
  }

  bool is_zero() const noexcept { return mant_ == 0.0; }
  bool is_inf() const noexcept { return std::isinf(mant_); }
  double mantissa() const noexcept { return mant_; }
  std::int64_t exponent() const noexcept { return exp_; }

  double log2() const {
    if (is_zero()) return -std::numeric_limits<double>::infinity();
    if (is_inf()) return std::numeric_limits<double>::infinity();
    return std::log2(mant_) + static_cast<double>(exp_);
  }

  double to_double() const {
    if (is_zero() || is_inf()) return mant_;
    if (exp_ > 1100) return std::numeric_limits<double>::infinity();
    if (exp_ < -1100) return 0.0;
    return std::ldexp(mant_, static_cast<int>(exp_));
  }

  /// value^(1/n), computed in the log domain.
  double root(unsigned n) const {
    if (is_zero()) return 0.0;
    if (is_inf()) return mant_;
    return std::exp2(log2() / static_cast<double>(n));
  }

  Scaled& ldexp(std::int64_t k) {
    if (!is_zero() && !is_inf()) exp_ += k;
    return *this;
  }

  Scaled& operator+=(const Scaled& o) {
    if (o.is_zero()) return *this;
    if (is_zero() || o.is_inf() || is_inf()) {
      if (is_zero()) *this = o;
      else if (o.is_inf()) *this = o;
      return *this;
    }
    if (exp_ >= o.exp_) {
      const std::int64_t d = exp_ - o.exp_;
      if (d < 1100) mant_ += std::ldexp(o.mant_, -static_cast<int>(d));
    } else {
      const std::int64_t d = o.exp_ - exp_;
      mant_ = (d < 1100 ? std::ldexp(mant_, -static_cast<int>(d)) : 0.0) + o.mant_;
      exp_ = o.exp_;
    }
    normalize();
    return *this;
  }

  Scaled& operator*=(const Scaled& o) {
    mant_ *= o.mant_;
    exp_ += o.exp_;
    normalize();
    return *this;
  }

  Scaled& operator*=(double x) { return *this *= from_double(x); }

  friend Scaled operator+(Scaled a, const Scaled& b) { return a += b; }
  friend Scaled operator*(Scaled a, const Scaled& b) { return a *= b; }
  friend Scaled operator*(Scaled a, double b) { return a *= b; }

  friend bool operator==(const Scaled& a, const Scaled& b) {
    return a.mant_ == b.mant_ && a.exp_ == b.exp_;
  }
  friend bool operator<(const Scaled& a, const Scaled& b) {
    if (a.is_inf()) return false;
    if (b.is_inf()) return true;
    if (a.is_zero() || b.is_zero()) return a.is_zero() && !b.is_zero();
    if (a.exp_ != b.exp_) return a.exp_ < b.exp_;
    return a.mant_ < b.mant_;
  }
  friend bool operator<=(const Scaled& a, const Scaled& b) { return !(b < a); }

 private:
  void normalize() {
    if (mant_ == 0.0 || std::isinf(mant_)) {
      if (mant_ == 0.0) exp_ = 0;
      return;
    }
    int e = 0;
    mant_ = std::frexp(mant_, &e);
    exp_ += e;
  }

  double mant_ = 0.0;
  std::int64_t exp_ = 0;
};

}  // namespace affdim
