#pragma once

// Test-side oracles. Deliberately naive and independent of the library's numerics.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <affdim/affdim.hpp>

namespace oracle {

struct M {
  double a, b, c, d;
};

inline M mul(const M& x, const M& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

inline M of(const affdim::Matrix2& m) { return {m.a(), m.b(), m.c(), m.d()}; }

/// Largest singular value from the characteristic polynomial of A^T A.
inline double alpha1(const M& m) {
  const double p = m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d;
  const double q = m.a * m.d - m.b * m.c;
  return std::sqrt(0.5 * (p + std::sqrt(std::max(0.0, p * p - 4.0 * q * q))));
}

/// max |Av| over a uniform grid of unit vectors.
inline double alpha1_grid(const M& m, int points = 200000) {
  double best = 0.0;
  for (int i = 0; i < points; ++i) {
    const double t = M_PI * i / points;
    const double x = std::cos(t), y = std::sin(t);
    best = std::max(best, std::hypot(m.a * x + m.b * y, m.c * x + m.d * y));
  }
  return best;
}

/// alpha1^s for s <= 1, alpha1 alpha2^(s-1) on (1, 2], |det|^(s/2) beyond.
inline double phi(const M& m, double s) {
  const double a1 = alpha1(m);
  const double det = std::abs(m.a * m.d - m.b * m.c);
  const double a2 = det / a1;
  if (s <= 1.0) return std::pow(a1, s);
  if (s <= 2.0) return a1 * std::pow(a2, s - 1.0);
  return std::pow(a1 * a2, 0.5 * s);
}

/// Sum of phi^s over all words of length n, visited depth-first with letters in reverse order.
inline double partition_sum(const std::vector<M>& letters, double s, unsigned n) {
  std::function<double(const M&, unsigned)> rec = [&](const M& p, unsigned left) -> double {
    if (left == 0) return phi(p, s);
    double acc = 0.0;
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) acc += rec(mul(p, *it), left - 1);
    return acc;
  };
  return rec(M{1, 0, 0, 1}, n);
}

/// Root of a decreasing function on [lo, hi] by plain bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  for (int i = 0; i < iters; ++i) {
    const double m = 0.5 * (lo + hi);
    (f(m) > 0.0 ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

/// Positive matrix with entries in [lo, hi]; small entries keep it contracting.
inline affdim::Matrix2 random_positive(std::mt19937_64& rng, double lo = 0.02, double hi = 0.3) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (;;) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    if (std::abs(a * d - b * c) > 1e-4) return affdim::Matrix2(a, b, c, d);
  }
}

/// Invertible matrix with entries of either sign.
inline affdim::Matrix2 random_signed(std::mt19937_64& rng, double scale = 0.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (;;) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    if (std::abs(a * d - b * c) > 1e-3) return affdim::Matrix2(a, b, c, d);
  }
}

/// Finite system with indices 1..k and no declared separation.
inline affdim::IfsSystem finite_system(const std::vector<affdim::Matrix2>& mats) {
  std::vector<affdim::IndexedMap> maps;
  affdim::Index i = 1;
  for (const auto& m : mats) maps.push_back({i++, {m, {0.0, 0.0}}});
  return affdim::IfsSystem(std::move(maps), std::nullopt, affdim::Separation::None);
}

inline affdim::SubsetSpec first(affdim::Index k) {
  std::vector<affdim::Index> v;
  for (affdim::Index i = 1; i <= k; ++i) v.push_back(i);
  return affdim::SubsetSpec::finite(v);
}

}  // namespace oracle
