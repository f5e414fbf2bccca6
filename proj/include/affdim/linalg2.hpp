#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace affdim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// a*d - b*c with one rounding (Kahan's fma splitting).
inline double det2(double a, double b, double c, double d) noexcept {
  const double w = b * c;
  const double e = std::fma(-b, c, w);
  const double f = std::fma(a, d, -w);
  return f + e;
}

/// Largest singular value of [[a,b],[c,d]]; no A^T A is formed.
inline double top_singular_value(double a, double b, double c, double d) noexcept {
  return 0.5 * (std::hypot(a + d, b - c) + std::hypot(a - d, b + c));
}

/// Planar singular value function from alpha1 and |det|.
inline double svf_from(double alpha1, double absdet, double s) {
  if (s < 1.0) return std::pow(alpha1, s);
  if (s <= 2.0) return std::pow(alpha1, 2.0 - s) * std::pow(absdet, s - 1.0);
  return std::pow(absdet, 0.5 * s);
}

/// Same as svf_from, but on log2 inputs and output.
inline double log2_svf_from(double log2_alpha1, double log2_absdet, double s) noexcept {
  if (s < 1.0) return s * log2_alpha1;
  if (s <= 2.0) return (2.0 - s) * log2_alpha1 + (s - 1.0) * log2_absdet;
  return 0.5 * s * log2_absdet;
}

/// Exponent carried by the norm factor: s on [0,1], 2-s on (1,2], 0 beyond.
inline double norm_exponent(double s) noexcept {
  if (s <= 1.0) return s;
  if (s <= 2.0) return 2.0 - s;
  return 0.0;
}

/// Invertible real 2x2 matrix, row-major, with cached singular values.
class Matrix2 {
 public:
  Matrix2(double a, double b, double c, double d) : a_(a), b_(b), c_(c), d_(d) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(d))
      throw Error(ErrorCode::SingularMatrix, "non-finite matrix entry");
    det_ = det2(a, b, c, d);
    if (det_ == 0.0 || !std::isfinite(det_))
      throw Error(ErrorCode::SingularMatrix, "determinant is zero or underflows");
    alpha1_ = top_singular_value(a, b, c, d);
    alpha2_ = std::abs(det_) / alpha1_;
  }

  static Matrix2 diagonal(double x, double y) { return Matrix2(x, 0.0, 0.0, y); }
  static Matrix2 identity() { return Matrix2(1.0, 0.0, 0.0, 1.0); }
  static Matrix2 rotation(double theta) {
    return Matrix2(std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta));
  }

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double c() const noexcept { return c_; }
  double d() const noexcept { return d_; }
  double operator()(int row, int col) const noexcept {
    return row == 0 ? (col == 0 ? a_ : b_) : (col == 0 ? c_ : d_);
  }

  double det() const noexcept { return det_; }
  double alpha1() const noexcept { return alpha1_; }
  double alpha2() const noexcept { return alpha2_; }

  bool is_positive() const noexcept { return a_ > 0 && b_ > 0 && c_ > 0 && d_ > 0; }
  bool is_diagonal() const noexcept { return b_ == 0.0 && c_ == 0.0; }
  bool is_scalar() const noexcept { return is_diagonal() && a_ == d_; }

  Matrix2 operator*(const Matrix2& o) const {
    return Matrix2(a_ * o.a_ + b_ * o.c_, a_ * o.b_ + b_ * o.d_,
                   c_ * o.a_ + d_ * o.c_, c_ * o.b_ + d_ * o.d_);
  }
  Vec2 operator*(Vec2 v) const { return {a_ * v.x + b_ * v.y, c_ * v.x + d_ * v.y}; }

  Matrix2 inverse() const { return Matrix2(d_ / det_, -b_ / det_, -c_ / det_, a_ / det_); }

  friend bool operator==(const Matrix2& p, const Matrix2& q) noexcept {
    return p.a_ == q.a_ && p.b_ == q.b_ && p.c_ == q.c_ && p.d_ == q.d_;
  }

 private:
  double a_, b_, c_, d_;
  double det_ = 0.0;
  double alpha1_ = 0.0;
  double alpha2_ = 0.0;
};

inline std::pair<double, double> singular_values(const Matrix2& m) {
  return {m.alpha1(), m.alpha2()};
}

inline double svf(const Matrix2& m, double s) {
  if (!(s >= 0.0)) throw Error(ErrorCode::NegativeExponent, "s must be non-negative");
  return svf_from(m.alpha1(), std::abs(m.det()), s);
}

inline double entry_sum_norm(const Matrix2& m) {
  if (!m.is_positive()) throw Error(ErrorCode::NonPositiveEntry, "entry-sum norm needs a positive matrix");
  return m.a() + m.b() + m.c() + m.d();
}

/// phi^s with the spectral norm replaced by the entry-sum norm.
inline double entry_svf(const Matrix2& m, double s) {
  if (!(s >= 0.0)) throw Error(ErrorCode::NegativeExponent, "s must be non-negative");
  const double absdet = std::abs(m.det());
  if (s > 2.0) return std::pow(absdet, 0.5 * s);
  const double n = entry_sum_norm(m);
  if (s <= 1.0) return std::pow(n, s);
  return std::pow(n, 2.0 - s) * std::pow(absdet, s - 1.0);
}

/// Smallest same-column entry ratio over the family; 1 means rank-one columns.
inline double kappa(std::span<const Matrix2> family) {
  if (family.empty()) throw Error(ErrorCode::EmptyFamily, "kappa of an empty family");
  double k = 1.0;
  for (const Matrix2& m : family) {
    if (!m.is_positive()) throw Error(ErrorCode::NonPositiveEntry, "kappa needs positive matrices");
    const double r0 = m.a() / m.c();
    const double r1 = m.b() / m.d();
    k = std::min({k, r0, 1.0 / r0, r1, 1.0 / r1});
  }
  return k;
}

inline double kappa(const Matrix2& m) { return kappa(std::span<const Matrix2>(&m, 1)); }

/// Largest |eigenvalue|; exact Perron form for positive matrices.
inline double spectral_radius(const Matrix2& m) {
  const double t = m.a() + m.d();
  const double disc = (m.a() - m.d()) * (m.a() - m.d()) + 4.0 * m.b() * m.c();
  if (disc < 0.0) return std::sqrt(std::abs(m.det()));
  const double big = 0.5 * (t + std::copysign(std::sqrt(disc), t));
  if (big == 0.0) return std::sqrt(std::abs(m.det()));
  const double small = m.det() / big;
  return std::max(std::abs(big), std::abs(small));
}

/// Real eigenlines of a non-scalar matrix (zero, one or two unit vectors).
inline std::vector<Vec2> eigenvectors(const Matrix2& m) {
  std::vector<Vec2> out;
  const double t = m.a() + m.d();
  const double disc = (m.a() - m.d()) * (m.a() - m.d()) + 4.0 * m.b() * m.c();
  if (disc < 0.0 || m.is_scalar()) return out;
  const double r = std::sqrt(disc);
  const double big = 0.5 * (t + std::copysign(r, t == 0.0 ? 1.0 : t));
  const double small = big != 0.0 ? m.det() / big : 0.5 * (t - r);
  for (double lam : {big, small}) {
    Vec2 u{m.b(), lam - m.a()};
    Vec2 v{lam - m.d(), m.c()};
    Vec2 w = std::hypot(u.x, u.y) >= std::hypot(v.x, v.y) ? u : v;
    const double n = std::hypot(w.x, w.y);
    if (n == 0.0) continue;
    w = {w.x / n, w.y / n};
    bool dup = false;
    for (const Vec2& e : out) dup = dup || std::abs(e.x * w.y - e.y * w.x) < 1e-14;
    if (!dup) out.push_back(w);
  }
  return out;
}

}  // namespace affdim
