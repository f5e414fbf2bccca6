#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "enumerate.hpp"
#include "errors.hpp"
#include "ifs.hpp"
#include "linalg2.hpp"
#include "scaled.hpp"
#include "subset.hpp"

namespace affdim {

enum class PressureMethod { FeketeOnly, KappaCertified, ExactMultiplicative, TruncatedWithTail, AdditiveBound };

inline const char* to_string(PressureMethod m) {
  switch (m) {
    case PressureMethod::FeketeOnly: return "fekete-only";
    case PressureMethod::KappaCertified: return "kappa-certified";
    case PressureMethod::ExactMultiplicative: return "exact-multiplicative";
    case PressureMethod::TruncatedWithTail: return "truncated-with-tail";
    case PressureMethod::AdditiveBound: return "additive-bound";
  }
  return "fekete-only";
}

struct PartitionSum {
  SubsetSpec subset;
  double s = 0.0;
  unsigned depth = 0;
  Scaled value_euclidean;
  std::optional<Scaled> value_entry_sum;
  Scaled pruned_euclidean;  // upper bound on skipped mass, already excluded from value
  Scaled pruned_entry_sum;
  std::uint64_t words_evaluated = 0;
  double slack = 0.0;
};

struct PressureBound {
  SubsetSpec subset;
  double s = 0.0;
  unsigned depth = 0;
  double lower = 0.0;
  double upper = 0.0;
  double upper_entry = std::numeric_limits<double>::quiet_NaN();
  PressureMethod method = PressureMethod::FeketeOnly;
  bool lower_certified = false;
  std::uint64_t words_evaluated = 0;
};

namespace detail {

inline double up(double x, unsigned n) { return x * (1.0 + word_sum_slack(n)); }
inline double down(double x, unsigned n) { return x * (1.0 - word_sum_slack(n)); }

/// |det|^(s-1) factor exponent paired with norm_exponent(s).
inline double det_exponent(double s) {
  if (s <= 1.0) return 0.0;
  if (s <= 2.0) return s - 1.0;
  return 0.5 * s;
}

inline double weighted_svf(const Letter& l, double s) { return l.multiplicity * svf(l.matrix, s); }
inline double weighted_entry_svf(const Letter& l, double s) { return l.multiplicity * entry_svf(l.matrix, s); }

/// Exact pressure of one matrix repeated `multiplicity` times.
inline double single_letter_pressure(const Letter& l, double s) {
  const double absdet = std::abs(l.matrix.det());
  if (s > 2.0) return l.multiplicity * std::pow(absdet, 0.5 * s);
  const double rho = spectral_radius(l.matrix);
  return l.multiplicity * std::pow(rho, norm_exponent(s)) * std::pow(absdet, det_exponent(s));
}

/// +1: every letter has |m11| >= |m22|; -1: every letter has |m11| <= |m22|; 0: mixed or non-diagonal.
inline int diagonal_orientation(const std::vector<Letter>& letters) {
  bool xmajor = true, ymajor = true;
  for (const auto& l : letters) {
    if (!l.matrix.is_diagonal()) return 0;
    const double x = std::abs(l.matrix.a()), y = std::abs(l.matrix.d());
    xmajor = xmajor && x >= y;
    ymajor = ymajor && y >= x;
  }
  return xmajor ? 1 : (ymajor ? -1 : 0);
}

inline double diagonal_svf(const Matrix2& m, int orientation, double s) {
  const double x = std::abs(orientation >= 0 ? m.a() : m.d());
  const double y = std::abs(orientation >= 0 ? m.d() : m.a());
  if (s <= 1.0) return std::pow(x, s);
  if (s <= 2.0) return x * std::pow(y, s - 1.0);
  return std::pow(x * y, 0.5 * s);
}

inline double kappa_of(const std::vector<Letter>& letters) {
  std::vector<Matrix2> ms;
  for (const auto& l : letters) ms.push_back(l.matrix);
  return kappa(ms);
}

/// 1^T (sum_i m_i A_i)^k 1 for k = 1..n.
inline std::vector<Scaled> linear_entry_sums(const std::vector<Letter>& letters, unsigned n) {
  double a = 0, b = 0, c = 0, d = 0;
  for (const auto& l : letters) {
    a += l.multiplicity * l.matrix.a();
    b += l.multiplicity * l.matrix.b();
    c += l.multiplicity * l.matrix.c();
    d += l.multiplicity * l.matrix.d();
  }
  std::vector<Scaled> out;
  // row vector v = 1^T S^k, scaled by 2^e
  double v0 = 1.0, v1 = 1.0;
  std::int64_t e = 0;
  for (unsigned k = 1; k <= n; ++k) {
    const double w0 = v0 * a + v1 * c;
    const double w1 = v0 * b + v1 * d;
    int ex = 0;
    std::frexp(std::max(w0, w1), &ex);
    v0 = std::ldexp(w0, -ex);
    v1 = std::ldexp(w1, -ex);
    e += ex;
    out.push_back(Scaled::from_double(v0 + v1).ldexp(e));
  }
  return out;
}

}  // namespace detail

/// Structure of a resolved subset that decides which closed forms apply.
struct FamilyShape {
  std::vector<Letter> letters;       // finite part, grouped
  const TailGenerator* tail = nullptr;
  Index tail_after = 0;              // tail contributes indices > tail_after
  bool positive = false;
  int orientation = 0;               // non-zero: jointly multiplicative diagonal family
  bool single = false;               // one letter and no tail

  bool multiplicative() const { return single || orientation != 0; }
};

/// Groups the finite part; generated indices up to `extra_through` become explicit letters.
inline FamilyShape shape_of(const IfsSystem& system, const SubsetSpec& subset, Index extra_through = 0) {
  const ResolvedSubset r = system.resolve(subset);
  std::vector<Index> idx = r.finite;
  FamilyShape f;
  if (r.tail_from) {
    f.tail = &*system.tail();
    const Index last = std::max<Index>(extra_through, *r.tail_from - 1);
    for (Index i = *r.tail_from; i <= last; ++i) idx.push_back(i);
    f.tail_after = last;
  }
  f.letters = group_letters(system, idx);
  f.positive = !f.letters.empty() || f.tail;
  for (const auto& l : f.letters) f.positive = f.positive && l.matrix.is_positive();
  if (f.tail) f.positive = f.positive && f.tail->positive();
  f.orientation = f.letters.empty() ? 1 : detail::diagonal_orientation(f.letters);
  if (f.tail && f.orientation != 0) {
    if (!f.tail->is_diagonal()) f.orientation = 0;
    else {
      const auto& t = std::get<DiagonalTail>(f.tail->spec());
      // similarities fit either orientation; a fixed major axis is x-major
      if (t.major && f.orientation < 0) {
        bool all_scalar = std::all_of(f.letters.begin(), f.letters.end(), [](const Letter& l) {
          return std::abs(l.matrix.a()) == std::abs(l.matrix.d());
        });
        f.orientation = all_scalar ? 1 : 0;
      }
    }
  }
  f.single = !f.tail && f.letters.size() == 1;
  return f;
}

inline PartitionSum partition_sum(const IfsSystem& system, const SubsetSpec& subset, double s, unsigned n,
                                  const EnumerationOptions& opts = {}) {
  if (!(s >= 0.0)) throw Error(ErrorCode::NegativeExponent, "s must be non-negative");
  const ResolvedSubset r = system.resolve(subset);
  if (r.tail_from) throw Error(ErrorCode::InfiniteSubset, "partition sums need a finite subset; truncate first");
  const std::vector<Letter> letters = group_letters(system, r.finite);
  const bool positive = std::all_of(letters.begin(), letters.end(), [](const Letter& l) { return l.matrix.is_positive(); });
  const WordSums w = enumerate_word_sums(letters, s, n, positive, opts);
  PartitionSum out;
  out.subset = subset;
  out.s = s;
  out.depth = n;
  out.value_euclidean = w.euclidean[n - 1];
  out.pruned_euclidean = w.euclidean_pruned[n - 1];
  if (positive) {
    out.value_entry_sum = w.entry[n - 1];
    out.pruned_entry_sum = w.entry_pruned[n - 1];
  }
  out.words_evaluated = w.words_evaluated;
  out.slack = word_sum_slack(n);
  return out;
}

/// Upper bound (sum + pruned)^(1/n), lower bound (c_s sum')^(1/n), both at depth n.
inline PressureBound pressure_bound(const IfsSystem& system, const SubsetSpec& subset, double s, unsigned n,
                                    const EnumerationOptions& opts = {}) {
  if (!(s >= 0.0)) throw Error(ErrorCode::NegativeExponent, "s must be non-negative");
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "depth must be positive");
  const FamilyShape f = shape_of(system, subset);
  if (f.tail) throw Error(ErrorCode::InfiniteSubset, "pressure_bound needs a finite subset; use truncate_with_tail");
  PressureBound out;
  out.subset = subset;
  out.s = s;
  out.depth = n;

  if (s >= 2.0 || f.multiplicative()) {
    double v = 0.0;
    for (const auto& l : f.letters) {
      if (s >= 2.0) v += l.multiplicity * std::pow(std::abs(l.matrix.det()), 0.5 * s);
      else if (f.single) v += detail::single_letter_pressure(l, s);
      else v += l.multiplicity * detail::diagonal_svf(l.matrix, f.orientation, s);
    }
    out.lower = detail::down(v, 1);
    out.upper = detail::up(v, 1);
    out.method = PressureMethod::ExactMultiplicative;
    out.lower_certified = true;
    return out;
  }

  const double sig = norm_exponent(s);
  if (f.positive && s == 1.0) {
    const std::vector<Scaled> lin = detail::linear_entry_sums(f.letters, n);
    const double c = 0.5 * detail::kappa_of(f.letters);
    out.upper_entry = detail::up(lin[n - 1].root(n), n);
    out.upper = out.upper_entry;
    out.lower = detail::down((lin[n - 1] * std::pow(c, sig)).root(n), n);
    out.method = PressureMethod::KappaCertified;
    out.lower_certified = true;
    return out;
  }

  const WordSums w = enumerate_word_sums(f.letters, s, n, f.positive, opts);
  out.words_evaluated = w.words_evaluated;
  out.upper = detail::up((w.euclidean[n - 1] + w.euclidean_pruned[n - 1]).root(n), n);
  if (f.positive) {
    const double c = 0.5 * detail::kappa_of(f.letters);
    out.upper_entry = detail::up((w.entry[n - 1] + w.entry_pruned[n - 1]).root(n), n);
    out.lower = std::min(detail::down((w.entry[n - 1] * std::pow(c, sig)).root(n), n), out.upper);
    out.method = PressureMethod::KappaCertified;
    out.lower_certified = true;
  } else {
    out.lower = 0.0;
    out.method = PressureMethod::FeketeOnly;
  }
  return out;
}

/// Truncation at N plus the additive tail bound (2/kappa)^sigma * tail_sum(N, s).
inline PressureBound truncate_with_tail(const IfsSystem& system, const SubsetSpec& subset, double s, Index N, unsigned n,
                                        const EnumerationOptions& opts = {}) {
  if (!(s > 0.0 && s <= 2.0)) throw Error(ErrorCode::InvalidArgument, "truncate_with_tail needs s in (0, 2]");
  const ResolvedSubset r = system.resolve(subset);
  if (!r.tail_from) throw Error(ErrorCode::TailUnavailable, "subset has no generated tail");
  const TailGenerator& tail = *system.tail();
  const SubsetSpec trunc = system.truncate(subset, std::max<Index>(N, *r.tail_from - 1));
  const Index cut = std::max<Index>(N, *r.tail_from - 1);
  const FamilyShape f = shape_of(system, trunc);
  const double ts = tail.tail_sum(cut, s);
  PressureBound out;
  out.subset = subset;
  out.s = s;
  out.depth = n;
  out.method = PressureMethod::TruncatedWithTail;

  if (f.orientation != 0 && tail.is_diagonal()) {
    // jointly multiplicative: P = sum of phi^s over every index
    const FamilyShape whole = shape_of(system, subset);
    if (whole.orientation == 0) throw Error(ErrorCode::NotPositive, "diagonal truncation is not jointly multiplicative");
    double v = 0.0;
    for (const auto& l : f.letters) v += l.multiplicity * detail::diagonal_svf(l.matrix, f.orientation, s);
    out.lower = detail::down(v + (tail.tail_svf_exact(s) ? tail.tail_svf_sum(cut, s) : 0.0), 1);
    out.upper = detail::up(v + tail.tail_svf_sum(cut, s), 1);
    out.lower_certified = true;
    return out;
  }
  if (!system.positive() && !(f.positive && tail.positive()))
    throw Error(ErrorCode::NotPositive, "additive tail control needs a positive family");

  const PressureBound pb = pressure_bound(system, trunc, s, n, opts);
  const double k = detail::kappa_of(f.letters);
  const double gap = std::pow(2.0 / k, norm_exponent(s)) * ts;
  const double trunc_upper = std::isnan(pb.upper_entry) ? pb.upper : std::min(pb.upper, pb.upper_entry);
  out.lower = pb.lower;
  out.upper = detail::up(trunc_upper + gap, 1);
  out.lower_certified = pb.lower_certified;
  out.words_evaluated = pb.words_evaluated;
  return out;
}

// ---------------------------------------------------------------------------
// Composite enclosure used by the dimension solver.
// ---------------------------------------------------------------------------

struct Enclosure {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  bool lower_certified = true;
  PressureMethod method = PressureMethod::FeketeOnly;
  unsigned depth = 0;
  std::uint64_t words = 0;
};

/// Empirical quasimultiplicativity constant: min over short word pairs (u, v) of
/// max over connectors g (|g| <= max_connector) of phi(u g v) / (phi(u) phi(v)).
/// Not a proof; reported as non-certified.
struct QuasiEstimate {
  double c = 0.0;
  unsigned connector_length = 0;
};

inline QuasiEstimate estimate_quasimultiplicativity(const std::vector<Letter>& letters, double s, unsigned word_length = 2,
                                                    unsigned max_connector = 3) {
  auto words_upto = [&](unsigned len) {
    std::vector<Matrix2> out{Matrix2::identity()};
    std::vector<Matrix2> layer{Matrix2::identity()};
    for (unsigned t = 0; t < len; ++t) {
      std::vector<Matrix2> next;
      for (const auto& w : layer)
        for (const auto& l : letters) next.push_back(w * l.matrix);
      out.insert(out.end(), next.begin(), next.end());
      layer = std::move(next);
    }
    return out;
  };
  const std::vector<Matrix2> words = words_upto(word_length);
  const std::vector<Matrix2> connectors = words_upto(max_connector);
  QuasiEstimate q;
  q.c = std::numeric_limits<double>::infinity();
  q.connector_length = max_connector;
  for (std::size_t i = 1; i < words.size(); ++i)
    for (std::size_t j = 1; j < words.size(); ++j) {
      const double denom = svf(words[i], s) * svf(words[j], s);
      double best = 0.0;
      for (const auto& g : connectors) best = std::max(best, svf(words[i] * g * words[j], s) / denom);
      q.c = std::min(q.c, best);
    }
  if (!std::isfinite(q.c)) q.c = 1.0;
  return q;
}

/// Closed forms, additive decomposition and word enumeration, intersected.
class PressureOracle {
 public:
  PressureOracle(const IfsSystem& system, const SubsetSpec& subset, EnumerationOptions opts = {}, Index truncation = 0)
      : opts_(opts) {
    const ResolvedSubset r = system.resolve(subset);
    Index extra = 0;
    if (r.tail_from) extra = truncation ? std::max<Index>(truncation, *r.tail_from - 1) : *r.tail_from + 5;
    shape_ = shape_of(system, subset, extra);
    if (shape_.positive && !shape_.letters.empty()) kappa_ = detail::kappa_of(shape_.letters);
    cardinality_ = total_multiplicity(shape_.letters);
  }

  const FamilyShape& shape() const noexcept { return shape_; }
  bool lower_certifiable() const noexcept { return shape_.positive || shape_.multiplicative(); }
  double cardinality() const noexcept { return cardinality_; }
  bool infinite() const noexcept { return shape_.tail != nullptr; }

  /// Deepest enumeration the budget allows (0 when enumeration cannot help).
  unsigned max_depth() const {
    if (shape_.multiplicative() || shape_.letters.size() < 2) return 0;
    return std::min(feasible_depth(shape_.letters.size(), opts_.budget), 48u);
  }

  const EnumerationOptions& options() const noexcept { return opts_; }

  Enclosure cheap(double s) const {
    if (s >= 2.0) return determinant_branch(s);
    if (shape_.multiplicative()) return multiplicative(s);
    if (shape_.positive) return positive_cheap(s);
    Enclosure e;
    e.upper = detail::up(fekete_one(s), 1);
    e.lower = 0.0;
    e.lower_certified = false;
    e.method = PressureMethod::FeketeOnly;
    return e;
  }

  /// cheap(s) intersected with depth-n enumeration of the finite part.
  Enclosure refined(double s, unsigned n) const {
    Enclosure e = cheap(s);
    if (s >= 2.0 || shape_.multiplicative() || shape_.letters.size() < 2 || n < 2) return e;
    n = std::min(n, max_depth());
    if (n < 2) return e;
    const WordSums w = enumerate_word_sums(shape_.letters, s, n, shape_.positive, opts_);
    e.depth = n;
    e.words = w.words_evaluated;
    double u = std::numeric_limits<double>::infinity();
    double lo = 0.0;
    const double sig = norm_exponent(s);
    for (unsigned k = 1; k <= n; ++k) {
      u = std::min(u, detail::up((w.euclidean[k - 1] + w.euclidean_pruned[k - 1]).root(k), k));
      if (shape_.positive) {
        u = std::min(u, detail::up((w.entry[k - 1] + w.entry_pruned[k - 1]).root(k), k));
        lo = std::max(lo, detail::down((w.entry[k - 1] * std::pow(0.5 * kappa_, sig)).root(k), k));
      }
    }
    if (shape_.tail) {
      if (shape_.positive) u = detail::up(u + std::pow(2.0 / kappa_, sig) * shape_.tail->tail_sum(shape_.tail_after, s), 1);
      else u = std::numeric_limits<double>::infinity();
    }
    if (u < e.upper) {
      e.upper = u;
      e.method = shape_.tail ? PressureMethod::TruncatedWithTail
                             : (shape_.positive ? PressureMethod::KappaCertified : PressureMethod::FeketeOnly);
    }
    if (shape_.positive) {
      e.lower = std::max(e.lower, lo);
    } else if (!shape_.tail) {
      const QuasiEstimate q = estimate_quasimultiplicativity(shape_.letters, s, 1, 2);
      const double K = static_cast<double>(q.connector_length);
      const double C = q.c / (K * std::max(1.0, std::pow(e.upper, K)));
      e.lower = std::max(e.lower, (w.euclidean[n - 1] * C).root(n));
      e.lower_certified = false;
    }
    e.lower = std::min(e.lower, e.upper);
    return e;
  }

  /// Predicted log-width of the depth-n enumeration enclosure for positive families.
  double enumeration_log_width(double s, unsigned n) const {
    if (!shape_.positive || n == 0) return std::numeric_limits<double>::infinity();
    return -norm_exponent(s) * std::log(0.5 * kappa_) / static_cast<double>(n);
  }

 private:
  double fekete_one(double s) const {
    double v = 0.0;
    for (const auto& l : shape_.letters) v += detail::weighted_svf(l, s);
    if (shape_.tail) v += shape_.tail->tail_svf_sum(shape_.tail_after, s);
    return v;
  }

  Enclosure determinant_branch(double s) const {
    double v = 0.0;
    for (const auto& l : shape_.letters) v += l.multiplicity * std::pow(std::abs(l.matrix.det()), 0.5 * s);
    Enclosure e;
    e.method = PressureMethod::ExactMultiplicative;
    e.lower = detail::down(v + (shape_.tail && shape_.tail->tail_svf_exact(s) ? shape_.tail->tail_svf_sum(shape_.tail_after, s) : 0.0), 1);
    e.upper = detail::up(v + (shape_.tail ? shape_.tail->tail_svf_sum(shape_.tail_after, s) : 0.0), 1);
    return e;
  }

  Enclosure multiplicative(double s) const {
    double v = 0.0;
    for (const auto& l : shape_.letters)
      v += shape_.single ? detail::single_letter_pressure(l, s) : l.multiplicity * detail::diagonal_svf(l.matrix, shape_.orientation, s);
    Enclosure e;
    e.method = PressureMethod::ExactMultiplicative;
    double t_hi = 0.0, t_lo = 0.0;
    if (shape_.tail) {
      t_hi = shape_.tail->tail_svf_sum(shape_.tail_after, s);
      t_lo = shape_.tail->tail_svf_exact(s) ? t_hi : 0.0;
    }
    e.lower = detail::down(v + t_lo, 1);
    e.upper = detail::up(v + t_hi, 1);
    return e;
  }

  static double lower_recursive(std::vector<Letter> ls, double s) {
    if (ls.size() == 1) return detail::single_letter_pressure(ls[0], s);
    const double sig = norm_exponent(s);
    const double k = detail::kappa_of(ls);
    double sum = 0.0;
    std::size_t core = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < ls.size(); ++i) {
      const double v = detail::weighted_entry_svf(ls[i], s);
      sum += v;
      if (v > best) best = v, core = i;
    }
    const double l1 = std::pow(0.5 * k, sig) * sum;
    const double pcore = detail::single_letter_pressure(ls[core], s);
    ls.erase(ls.begin() + static_cast<std::ptrdiff_t>(core));
    const double ldec = pcore + std::pow(0.25 * k * k, sig) * lower_recursive(std::move(ls), s);
    return std::max(l1, ldec);
  }

  Enclosure positive_cheap(double s) const {
    const double sig = norm_exponent(s);
    Enclosure e;
    e.method = PressureMethod::AdditiveBound;
    const double ts = shape_.tail ? shape_.tail->tail_sum(shape_.tail_after, s) : 0.0;
    double sum_e = 0.0, sum = 0.0;
    std::size_t core = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < shape_.letters.size(); ++i) {
      const double v = detail::weighted_entry_svf(shape_.letters[i], s);
      sum_e += v;
      sum += detail::weighted_svf(shape_.letters[i], s);
      if (v > best) best = v, core = i;
    }
    double u = std::min(sum + (shape_.tail ? shape_.tail->tail_svf_sum(shape_.tail_after, s) : 0.0), sum_e + ts);
    if (!shape_.letters.empty()) {
      const Letter& c = shape_.letters[core];
      const double pcore = detail::single_letter_pressure(c, s);
      const double rest = sum_e - detail::weighted_entry_svf(c, s) + ts;
      u = std::min(u, pcore + std::pow(2.0 / kappa(c.matrix), sig) * std::max(0.0, rest));
      e.lower = lower_recursive(shape_.letters, s);
    }
    e.upper = detail::up(u, 1);
    e.lower = std::min(detail::down(e.lower, 1), e.upper);
    return e;
  }

  EnumerationOptions opts_;
  FamilyShape shape_;
  double kappa_ = 0.0;
  double cardinality_ = 0.0;
};

// ---------------------------------------------------------------------------
// Additive bounds on P_{I u J}(s) - P_I(s).
// ---------------------------------------------------------------------------

struct GapBounds {
  double lower_gap = 0.0;
  double upper_gap = 0.0;
  bool lower_certified = true;
  std::string method;
};

/// User-supplied almost-multiplicativity constants (c > 1 convention) for non-positive families.
struct AlmostMultiplicativeConstants {
  double c_I = 1.0;
  double c_union = 1.0;
};

/// Quasimultiplicativity constant c_I with connector length bound K.
struct QuasiConstants {
  double c_I = 1.0;
  unsigned K = 1;
};

namespace detail {

inline bool disjoint(const IfsSystem& system, const SubsetSpec& I, const SubsetSpec& J) {
  const ResolvedSubset a = system.resolve(I), b = system.resolve(J);
  for (Index i : a.finite)
    if (J.contains(i) && system.contains(i)) return false;
  for (Index j : b.finite)
    if (I.contains(j) && system.contains(j)) return false;
  return !(a.tail_from && b.tail_from);
}

inline bool is_empty(const SubsetSpec& J) { return J.base().empty() && !J.tail_start(); }

inline double phi_sum(const FamilyShape& f, double s, bool entry) {
  double v = 0.0;
  for (const auto& l : f.letters) v += entry ? weighted_entry_svf(l, s) : weighted_svf(l, s);
  if (f.tail) v += entry ? f.tail->tail_sum(f.tail_after, s) : f.tail->tail_svf_sum(f.tail_after, s);
  return v;
}

/// kappa over the finite part and, when present, the tail's column ratios.
inline double kappa_with_tail(const FamilyShape& f) {
  double k = f.letters.empty() ? 1.0 : kappa_of(f.letters);
  if (f.tail) k = std::min(k, f.tail->kappa_lower());
  return k;
}

}  // namespace detail

/// Positive families: P_I + (kappa(IuJ)^2/4)^sigma P_J <= P_{IuJ} <= P_I + (2/kappa(I))^sigma sum_J phi'.
inline GapBounds delta_bounds(const IfsSystem& system, const SubsetSpec& I, const SubsetSpec& J, double s,
                              const EnumerationOptions& opts = {}) {
  if (detail::is_empty(J)) return {0.0, 0.0, true, "empty"};
  if (!detail::disjoint(system, I, J)) throw Error(ErrorCode::InvalidArgument, "I and J must be disjoint");
  const FamilyShape fi = shape_of(system, I);
  const FamilyShape fj = shape_of(system, J);
  if (!(fi.positive && fj.positive))
    throw Error(ErrorCode::ConstantsUnavailable, "kappa constants need positive families; supply constants");
  if (fi.tail) throw Error(ErrorCode::InfiniteSubset, "I must be finite");
  const double sig = norm_exponent(s);
  GapBounds g;
  g.method = s > 1.0 ? "kappa-pc2" : "kappa-pc";
  g.upper_gap = detail::up(std::pow(2.0 / detail::kappa_of(fi.letters), sig) * detail::phi_sum(fj, s, true), 1);
  const double ku = std::min(detail::kappa_of(fi.letters), detail::kappa_with_tail(fj));
  PressureOracle oj(system, J, opts);
  const Enclosure ej = oj.refined(s, oj.max_depth());
  g.lower_gap = detail::down(std::pow(0.25 * ku * ku, sig) * ej.lower, 1);
  return g;
}

/// Almost-multiplicative form with supplied constants: P_I + P_J / c_union^2 <= P_{IuJ} <= P_I + c_I sum_J phi^s.
inline GapBounds delta_bounds(const IfsSystem& system, const SubsetSpec& I, const SubsetSpec& J, double s,
                              const AlmostMultiplicativeConstants& k, const EnumerationOptions& opts = {}) {
  if (detail::is_empty(J)) return {0.0, 0.0, true, "empty"};
  if (!detail::disjoint(system, I, J)) throw Error(ErrorCode::InvalidArgument, "I and J must be disjoint");
  const FamilyShape fj = shape_of(system, J);
  GapBounds g;
  g.method = "almost-multiplicative";
  g.upper_gap = detail::up(k.c_I * detail::phi_sum(fj, s, false), 1);
  PressureOracle oj(system, J, opts);
  const Enclosure ej = oj.refined(s, oj.max_depth());
  g.lower_gap = detail::down(ej.lower / (k.c_union * k.c_union), 1);
  g.lower_certified = ej.lower_certified;
  return g;
}

/// Quasimultiplicative form: upper gap C_I sum_J phi^s with C_I = c_I K max{1, P_I(s)^K}.
inline GapBounds delta_bounds(const IfsSystem& system, const SubsetSpec& I, const SubsetSpec& J, double s,
                              const QuasiConstants& q, const EnumerationOptions& opts = {}) {
  if (detail::is_empty(J)) return {0.0, 0.0, true, "empty"};
  if (!detail::disjoint(system, I, J)) throw Error(ErrorCode::InvalidArgument, "I and J must be disjoint");
  PressureOracle oi(system, I, opts);
  const double pi = oi.refined(s, oi.max_depth()).upper;
  const double C = q.c_I * static_cast<double>(q.K) * std::max(1.0, std::pow(pi, static_cast<double>(q.K)));
  GapBounds g;
  g.method = "quasi-multiplicative";
  g.upper_gap = detail::up(C * detail::phi_sum(shape_of(system, J), s, false), 1);
  g.lower_gap = 0.0;
  g.lower_certified = false;
  return g;
}

}  // namespace affdim
