#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "ifs.hpp"
#include "pressure.hpp"
#include "subset.hpp"

namespace affdim {

struct DimensionOptions {
  double tolerance = 1e-3;
  EnumerationOptions enumeration{};
  Index truncation = 0;  // cofinite subsets: tail indices through this one are enumerated (0 = automatic)
};

struct DimensionInterval {
  SubsetSpec subset;
  double lo = 0.0;
  double hi = 0.0;
  unsigned depth_used = 0;
  std::uint64_t words_used = 0;
  bool certified = true;
  std::string method;

  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

namespace detail {

inline void validate_tolerance(double tol) {
  if (!(tol > 0.0 && std::isfinite(tol))) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
}

/// Midpoint of [a, b] rounded to the coarsest dyadic grid that still splits it.
inline double dyadic_mid(double a, double b) {
  const double w = b - a;
  int e = 0;
  std::frexp(w, &e);
  const double step = std::ldexp(1.0, e - 3);
  const double m = std::round(0.5 * (a + b) / step) * step;
  return (m > a && m < b) ? m : 0.5 * (a + b);
}

struct Bracket {
  bool certified = true;
  unsigned depth = 0;
  std::uint64_t words = 0;

  void note(const Enclosure& e) {
    depth = std::max(depth, e.depth);
    words += e.words;
  }
};

/// Largest certified point with lower > 1 found by bisection in [a, b].
template <class Eval>
double lower_edge(Eval&& eval, double a, double b, double width, Bracket& br) {
  for (int it = 0; it < 80 && b - a > width; ++it) {
    const double m = 0.5 * (a + b);
    const Enclosure e = eval(m);
    br.note(e);
    if (e.lower > 1.0) {
      a = m;
      br.certified = br.certified && e.lower_certified;
    } else {
      b = m;
    }
  }
  return a;
}

/// Smallest point with upper < 1 found by bisection in [a, b].
template <class Eval>
double upper_edge(Eval&& eval, double a, double b, double width, Bracket& br) {
  for (int it = 0; it < 80 && b - a > width; ++it) {
    const double m = 0.5 * (a + b);
    const Enclosure e = eval(m);
    br.note(e);
    if (e.upper < 1.0) b = m;
    else a = m;
  }
  return b;
}

}  // namespace detail

/// Certified enclosure of inf{s >= 0 : P(s) <= 1}.
inline DimensionInterval affinity_dimension(const IfsSystem& system, const SubsetSpec& subset, const DimensionOptions& opt = {}) {
  detail::validate_tolerance(opt.tolerance);
  DimensionInterval out;
  out.subset = subset;
  const ResolvedSubset r = system.resolve(subset);
  if (!r.tail_from && r.finite.size() == 1) {
    // P(s) = rho^sigma |det|^.. <= 1 = P(0)
    out.method = to_string(PressureMethod::ExactMultiplicative);
    return out;
  }
  const PressureOracle oracle(system, subset, opt.enumeration, opt.truncation);
  auto cheap = [&](double s) { return oracle.cheap(s); };

  detail::Bracket br;
  // P(0) is the number of maps, at least 2
  double lo = 0.0;
  double hi = 2.0;
  while (!(oracle.cheap(hi).upper < 1.0)) {
    hi *= 2.0;
    if (hi > 4096.0) throw Error(ErrorCode::Uncertifiable, "pressure stays above 1 for every tested s");
  }

  const double fine = 1e-13;
  hi = detail::upper_edge(cheap, lo, hi, fine, br);
  lo = detail::lower_edge(cheap, lo, hi, fine, br);

  const unsigned nmax = oracle.max_depth();
  bool refine = hi - lo > opt.tolerance && nmax >= 2 && hi < 2.0;
  if (refine && oracle.shape().positive) {
    const double m = 0.5 * (lo + hi);
    const Enclosure c = oracle.cheap(m);
    const double cheap_width = std::log(c.upper / std::max(c.lower, 1e-300));
    refine = oracle.enumeration_log_width(m, nmax) < 0.5 * cheap_width;
  }

  if (refine) {
    auto deep = [&](unsigned n) { return [&oracle, n](double s) { return oracle.refined(s, n); }; };
    unsigned n = std::min(nmax, 4u);
    int straddles = 0;
    double probe_hi = hi;  // after a straddle the next probe moves into the lower half
    while (hi - lo > opt.tolerance) {
      const double m = detail::dyadic_mid(lo, std::min(hi, probe_hi));
      const Enclosure e = oracle.refined(m, n);
      br.note(e);
      if (e.lower > 1.0) {
        lo = m;
        br.certified = br.certified && e.lower_certified;
        straddles = 0;
        probe_hi = hi;
      } else if (e.upper < 1.0) {
        hi = m;
        straddles = 0;
        probe_hi = hi;
      } else if (++straddles >= 2) {
        if (n == nmax) break;
        n = std::min(2 * n, nmax);
        straddles = 0;
        probe_hi = hi;
      } else {
        probe_hi = m;
      }
    }
    if (hi - lo > opt.tolerance) {
      const double m = 0.5 * (lo + hi);
      hi = detail::upper_edge(deep(nmax), m, hi, 0.25 * opt.tolerance, br);
      lo = detail::lower_edge(deep(nmax), lo, std::min(m, hi), 0.25 * opt.tolerance, br);
    }
  }

  PressureMethod method = oracle.shape().positive ? PressureMethod::AdditiveBound : PressureMethod::FeketeOnly;
  if (br.depth > 0 && oracle.shape().positive)
    method = oracle.infinite() ? PressureMethod::TruncatedWithTail : PressureMethod::KappaCertified;
  if (oracle.shape().multiplicative() || lo >= 2.0) method = PressureMethod::ExactMultiplicative;

  out.lo = lo;
  out.hi = hi;
  out.depth_used = br.depth;
  out.words_used = br.words;
  out.certified = br.certified;
  out.method = to_string(method);
  return out;
}

struct TruncationProfile {
  std::vector<DimensionInterval> truncations;  // one per N
  DimensionInterval limit;                     // the full subset, tail controlled additively
  bool monotone = true;                        // lo(N_k) <= hi(N_{k+1}) throughout, and against the limit
};

inline TruncationProfile truncation_profile(const IfsSystem& system, const SubsetSpec& subset, const std::vector<Index>& Ns,
                                            const DimensionOptions& opt = {}) {
  if (Ns.empty()) throw Error(ErrorCode::InvalidArgument, "empty truncation list");
  if (!std::is_sorted(Ns.begin(), Ns.end()) || std::adjacent_find(Ns.begin(), Ns.end()) != Ns.end())
    throw Error(ErrorCode::InvalidArgument, "truncation list must be strictly increasing");
  TruncationProfile p;
  for (Index N : Ns) p.truncations.push_back(affinity_dimension(system, system.truncate(subset, N), opt));
  DimensionOptions lim = opt;
  if (!subset.is_finite()) lim.truncation = std::max(opt.truncation, Ns.back());
  p.limit = affinity_dimension(system, subset, lim);
  for (std::size_t i = 0; i + 1 < p.truncations.size(); ++i)
    p.monotone = p.monotone && p.truncations[i].lo <= p.truncations[i + 1].hi;
  p.monotone = p.monotone && p.truncations.back().lo <= p.limit.hi;
  return p;
}

struct FinitenessEstimate {
  double theta_lo = 0.0;
  double theta_hi = 0.0;
};

/// Bisects between certified divergence and closed-form convergence of the tail series.
inline FinitenessEstimate finiteness_parameter(const IfsSystem& system, const SubsetSpec& subset) {
  const ResolvedSubset r = system.resolve(subset);
  if (!r.tail_from) return {0.0, 0.0};
  if (!system.tail()) throw Error(ErrorCode::TailUnavailable, "system has no tail generator");
  const TailGenerator& t = *system.tail();
  const Index N = *r.tail_from - 1;
  auto finite = [&](double s) { return !t.diverges(s) && std::isfinite(t.tail_svf_sum(N, s)); };
  double hi = 1.0;
  while (!finite(hi)) {
    hi *= 2.0;
    if (hi > 64.0) throw Error(ErrorCode::TailUnavailable, "tail series does not converge for any tested s");
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double m = 0.5 * (lo + hi);
    if (finite(m)) hi = m;
    else if (t.diverges(m)) lo = m;
    else break;
  }
  return {lo, hi};
}

}  // namespace affdim
