#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dimension.hpp"
#include "errors.hpp"
#include "gallery.hpp"
#include "ifs.hpp"
#include "parallel.hpp"
#include "pressure.hpp"
#include "subset.hpp"

namespace affdim {

enum class SpectrumMode { Exhaustive, Sampled };

struct SpectrumOptions {
  Index n_max = 10;
  double tolerance = 1e-3;
  double budget = 1e7;       // shared by all subsets of the cloud
  SpectrumMode mode = SpectrumMode::Exhaustive;
  std::size_t samples = 256;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  bool include_cofinite = true;  // add the gallery's distinguished infinite subsets
  double isolation_width = 0.0;  // minimal gap on both sides of an isolated candidate (0 = automatic)
};

struct SpectrumPoint {
  SubsetSpec subset;
  DimensionInterval interval;
  std::string route;  // affinity, closed-form, projection-bound
  std::string note;
};

struct Gap {
  double a = 0.0;
  double b = 0.0;
  double width() const { return b - a; }
};

struct IsolatedCandidate {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<SubsetSpec> subsets;
  Gap below;
  Gap above;
};

struct SpectrumCloud {
  std::string gallery;
  SubsetSpec ground_set;
  Index n_max = 0;
  std::vector<SpectrumPoint> points;  // sorted by (lo, hi, subset)
  std::vector<Gap> gaps;              // relative to the enumerated universe
  std::vector<IsolatedCandidate> isolated_candidates;
  bool partial = false;
  bool all_certified = true;
  std::string universe = "relative to enumerated universe";
};

namespace detail {

inline double closed_slack(double v) { return v * 1e-12; }

inline DimensionInterval exact_interval(const SubsetSpec& s, double v, const std::string& method) {
  DimensionInterval d;
  d.subset = s;
  d.lo = std::max(0.0, v - closed_slack(v));
  d.hi = v + closed_slack(v);
  d.method = method;
  return d;
}

/// Root of sum_i r_i^s (+ closed-form tail) = 1 for similarity ratios, by bisection on certified sums.
inline DimensionInterval similarity_root(const SubsetSpec& subset, const std::vector<double>& ratios,
                                         const TailGenerator* ratio_tail, Index tail_after) {
  DimensionInterval d;
  d.subset = subset;
  d.method = "closed-form";
  if (!ratio_tail && ratios.size() <= 1) return d;
  auto f = [&](double s) {
    double v = 0.0;
    for (double r : ratios) v += std::pow(r, s);
    if (ratio_tail) v += ratio_tail->tail_svf_sum(tail_after, s);
    return v;
  };
  double lo = 0.0, hi = 1.0;
  while (!(f(hi) * (1.0 + 1e-12) < 1.0)) hi *= 2.0;
  double a = lo, b = hi;
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    const double m = 0.5 * (a + b);
    const double v = f(m);
    if (v * (1.0 - 1e-12) > 1.0) a = m;
    else if (v * (1.0 + 1e-12) < 1.0) b = m;
    else break;
  }
  // an undecided midpoint means the root is within slack of it; keep the certified ends
  d.lo = a;
  d.hi = b;
  return d;
}

}  // namespace detail

/// Membership of a subset in the three bands of the isolated-point example.
enum class IsolatedBand { Pair, Low, Mixed };

inline IsolatedBand isolated_band(const SubsetSpec& s) {
  const bool has1 = s.contains(1), has2 = s.contains(2);
  bool has_tail = !s.is_finite();
  for (Index i : s.base()) has_tail = has_tail || i >= 3;
  if (has1 && has2 && !has_tail) return IsolatedBand::Pair;
  if ((has1 || has2) && has_tail) return IsolatedBand::Mixed;
  return IsolatedBand::Low;
}

/// Hausdorff dimension for subsets a gallery declares exceptional; nullopt routes to the affinity dimension.
inline std::optional<SpectrumPoint> gallery_closed_form(const IfsSystem& system, const SubsetSpec& subset,
                                                        const DimensionOptions& opt) {
  const std::string& g = system.gallery().name;
  const ResolvedSubset r = system.resolve(subset);
  if (g == "paper51") {
    if (r.tail_from || r.finite.back() > 3) return std::nullopt;
    // one vertical line after conjugation: |S| similarities of ratio 1/gamma
    const Paper51Params p = paper51_params(system);
    const double k = static_cast<double>(r.finite.size());
    return SpectrumPoint{subset, detail::exact_interval(subset, std::log(k) / std::log(p.gamma), "closed-form"), "closed-form",
                         "reducible: similar copies on one line"};
  }
  if (g == "isolated52") {
    const IsolatedBand band = isolated_band(subset);
    if (band == IsolatedBand::Pair)
      return SpectrumPoint{subset, detail::exact_interval(subset, 0.5, "closed-form"), "closed-form",
                           "two 1/4-similar copies on the left edge"};
    if (band == IsolatedBand::Low) {
      std::vector<double> ratios;
      for (Index i : r.finite) ratios.push_back(i <= 2 ? 0.25 : system.tail()->diagonal_ratio(i));
      const TailGenerator scalar(isolated_params(system).ratios_only());
      DimensionInterval d = detail::similarity_root(subset, ratios, r.tail_from ? &scalar : nullptr,
                                                    r.tail_from ? *r.tail_from - 1 : 0);
      return SpectrumPoint{subset, d, "closed-form", "self-similar on a vertical line"};
    }
    // mixed: projection onto the x-axis contains a middle-third Cantor set; affinity dimension bounds above
    DimensionInterval aff = affinity_dimension(system, subset, opt);
    DimensionInterval d = aff;
    d.lo = std::log(2.0) / std::log(3.0) * (1.0 - 1e-15);
    d.hi = std::max(aff.hi, d.lo);
    d.method = "projection-bound";
    d.certified = aff.certified;
    return SpectrumPoint{subset, d, "projection-bound", "lower end from the x-projection"};
  }
  return std::nullopt;
}

inline SpectrumPoint spectrum_point(const IfsSystem& system, const SubsetSpec& subset, const DimensionOptions& opt) {
  if (auto p = gallery_closed_form(system, subset, opt)) return *p;
  SpectrumPoint p{subset, affinity_dimension(system, subset, opt), "affinity", ""};
  if (subset.is_finite() && subset.size() >= 2) {
    const IrreducibilityVerdict v = check_irreducibility(system, subset);
    if (v.verdict == Irreducibility::Reducible) p.note = "reducible: Hausdorff value may differ";
  }
  return p;
}

namespace detail {

inline std::vector<SubsetSpec> universe(const IfsSystem& system, const SpectrumOptions& opt) {
  const std::vector<Index> ground = system.indices_upto(opt.n_max);
  if (ground.empty()) throw Error(ErrorCode::EmptyFamily, "no indices up to n_max");
  std::vector<SubsetSpec> out;
  const std::size_t k = ground.size();
  auto from_mask = [&](std::uint64_t mask) {
    std::vector<Index> idx;
    for (std::size_t i = 0; i < k; ++i)
      if (mask >> i & 1u) idx.push_back(ground[i]);
    return SubsetSpec::finite(std::move(idx));
  };
  if (opt.mode == SpectrumMode::Exhaustive) {
    if (k > 22) throw Error(ErrorCode::InvalidArgument, "exhaustive mode needs at most 22 indices");
    for (std::uint64_t m = 1; m < (std::uint64_t{1} << k); ++m) out.push_back(from_mask(m));
  } else {
    std::mt19937_64 rng(opt.seed);
    std::set<std::vector<Index>> seen;
    const double total = std::ldexp(1.0, static_cast<int>(std::min<std::size_t>(k, 60))) - 1.0;
    const std::size_t want = static_cast<std::size_t>(std::min<double>(static_cast<double>(opt.samples), total));
    while (out.size() < want) {
      std::vector<Index> idx;
      for (Index i : ground)
        if (rng() & 1u) idx.push_back(i);
      if (idx.empty() || !seen.insert(idx).second) continue;
      out.push_back(SubsetSpec::finite(std::move(idx)));
    }
  }
  if (opt.include_cofinite && system.tail()) {
    const std::string& g = system.gallery().name;
    const Index t = system.tail()->start_index();
    if (g == "paper51") {
      out.push_back(SubsetSpec::cofinite({1, 2}, t));
      out.push_back(SubsetSpec::cofinite({3}, t));
      out.push_back(SubsetSpec::cofinite({1, 2, 3}, t));
    } else if (g == "isolated52") {
      out.push_back(SubsetSpec::cofinite({}, t));
      out.push_back(SubsetSpec::cofinite({1}, t));
    } else {
      out.push_back(SubsetSpec::cofinite({}, 1));
    }
  }
  return out;
}

inline void find_gaps(SpectrumCloud& cloud, double isolation_width) {
  std::vector<std::pair<double, double>> iv;
  for (const auto& p : cloud.points) iv.emplace_back(p.interval.lo, p.interval.hi);
  std::sort(iv.begin(), iv.end());
  struct Component {
    double lo, hi;
  };
  std::vector<Component> comps;
  for (const auto& [lo, hi] : iv) {
    if (!comps.empty() && lo <= comps.back().hi) comps.back().hi = std::max(comps.back().hi, hi);
    else comps.push_back({lo, hi});
  }
  for (std::size_t i = 0; i + 1 < comps.size(); ++i) cloud.gaps.push_back({comps[i].hi, comps[i + 1].lo});
  for (std::size_t i = 1; i + 1 < comps.size(); ++i) {
    const Gap below{comps[i - 1].hi, comps[i].lo};
    const Gap above{comps[i].hi, comps[i + 1].lo};
    if (below.width() < isolation_width || above.width() < isolation_width) continue;
    IsolatedCandidate c{comps[i].lo, comps[i].hi, {}, below, above};
    for (const auto& p : cloud.points)
      if (p.interval.lo >= c.lo && p.interval.hi <= c.hi) c.subsets.push_back(p.subset);
    cloud.isolated_candidates.push_back(std::move(c));
  }
}

/// One-tenth of the gap the gallery's closed forms predict, or 10 tolerances elsewhere.
inline double default_isolation_width(const IfsSystem& system, double tolerance) {
  const std::string& g = system.gallery().name;
  if (g == "isolated52") {
    const double s0 = isolated_s0(isolated_params(system)).second;
    return 0.1 * std::min(0.5 - s0, std::log(2.0) / std::log(3.0) - 0.5);
  }
  return 10.0 * tolerance;
}

}  // namespace detail

/// Dimension intervals for every enumerated subset; deterministic for a fixed budget.
inline SpectrumCloud enumerate_spectrum(const IfsSystem& system, const SpectrumOptions& opt = {}) {
  detail::validate_tolerance(opt.tolerance);
  const std::vector<SubsetSpec> subsets = detail::universe(system, opt);
  SpectrumCloud cloud;
  cloud.gallery = system.gallery().name;
  cloud.n_max = opt.n_max;
  cloud.ground_set = SubsetSpec::finite(system.indices_upto(opt.n_max));
  DimensionOptions dopt;
  dopt.tolerance = opt.tolerance;
  dopt.enumeration.budget = std::max(1e3, opt.budget / static_cast<double>(subsets.size()));
  dopt.enumeration.threads = 1;
  std::vector<std::optional<SpectrumPoint>> slots(subsets.size());
  std::vector<int> failed(subsets.size(), 0);
  parallel_for(subsets.size(), opt.threads, [&](std::size_t i) {
    try {
      slots[i] = spectrum_point(system, subsets[i], dopt);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BudgetExceeded && e.code() != ErrorCode::Uncertifiable) throw;
      failed[i] = 1;
    }
  });
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    if (failed[i]) {
      cloud.partial = true;
      continue;
    }
    cloud.all_certified = cloud.all_certified && slots[i]->interval.certified;
    cloud.points.push_back(std::move(*slots[i]));
  }
  std::sort(cloud.points.begin(), cloud.points.end(), [](const SpectrumPoint& x, const SpectrumPoint& y) {
    if (x.interval.lo != y.interval.lo) return x.interval.lo < y.interval.lo;
    if (x.interval.hi != y.interval.hi) return x.interval.hi < y.interval.hi;
    return x.subset < y.subset;
  });
  const double iso = opt.isolation_width > 0.0 ? opt.isolation_width : detail::default_isolation_width(system, opt.tolerance);
  detail::find_gaps(cloud, iso);
  return cloud;
}

// ---------------------------------------------------------------------------
// Verifications for the non-compact example.
// ---------------------------------------------------------------------------

struct LemmaCheck {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // lhs - rhs
};

/// beta^{2s} - beta^s > K^s at s = log 3 / log beta, K = 8 / (c eta).
inline LemmaCheck verify_lemma_sI(double beta, double c, double eta) {
  if (!(beta > 3.0)) throw Error(ErrorCode::ParameterOrder, "need beta > 3");
  if (!(c > 0.0 && c < 1.0 && eta > 0.0 && eta < 1.0)) throw Error(ErrorCode::ParameterOrder, "need c, eta in (0,1)");
  Paper51Params p;
  p.beta = beta;
  p.c = c;
  p.eta = eta;
  const CrucialTerms t = crucial_terms(p);
  return {t.sI_holds(), t.sI_lhs, t.sI_rhs, t.sI_lhs - t.sI_rhs};
}

struct CrucialCheck {
  bool holds = false;           // closed-form bound < 1
  CrucialTerms terms;
  double bound = 0.0;           // the rigorous right side
  double slack = 0.0;           // 1 - bound
  bool relaxed_applicable = false;  // the eta form needs the K-inequality
  PressureBound cross_check;    // truncate_with_tail enclosure of P_{I'}(s)
  bool cross_check_holds = false;
  StandingAssumptions assumptions;
};

inline CrucialCheck verify_lemma_crucial(const Paper51Params& params, Index truncation = 12,
                                         const EnumerationOptions& eopt = {}) {
  const Paper51Params p = resolve_paper51(params);
  CrucialCheck out;
  out.assumptions = check_standing_assumptions(p);
  if (!out.assumptions.all()) {
    std::string msg = "standing assumptions fail:";
    for (const auto& f : out.assumptions.failures) msg += " " + f + ";";
    throw Error(ErrorCode::AssumptionViolated, msg);
  }
  out.terms = crucial_terms(p);
  out.bound = out.terms.rigorous();
  out.slack = 1.0 - out.bound;
  out.holds = out.bound < 1.0;
  out.relaxed_applicable = out.terms.sI_holds();
  const IfsSystem system = build_paper_family_51(p);
  const SubsetSpec Iprime = SubsetSpec::cofinite({1, 2}, 5);
  const FamilyShape f = shape_of(system, system.truncate(Iprime, truncation));
  const unsigned n = std::max(1u, std::min(feasible_depth(f.letters.size(), eopt.budget), 12u));
  out.cross_check = truncate_with_tail(system, Iprime, out.terms.s, truncation, n, eopt);
  out.cross_check_holds = out.cross_check.upper < 1.0;
  return out;
}

struct DigitMonotonicity {
  bool holds = false;
  bool entry_domination = false;                   // A_n <= A_m entrywise
  std::vector<std::pair<double, double>> log2_sums;  // per depth: (I u {n}, I u {m})
  DimensionInterval dim_n;
  DimensionInterval dim_m;
  bool intervals_ordered = false;
};

/// Replacing the digit m by n > m never increases a word's value, so sums and dimensions are ordered.
inline DigitMonotonicity verify_digit_monotonicity(const IfsSystem& system, const SubsetSpec& I, Index m, Index n,
                                                   const std::vector<unsigned>& depths, double s = -1.0,
                                                   const DimensionOptions& dopt = {}) {
  if (system.gallery().name != "paper51") throw Error(ErrorCode::InvalidArgument, "digit replacement needs the paper51 gallery");
  if (!(n >= m && m >= 5)) throw Error(ErrorCode::InvalidArgument, "need n >= m >= 5");
  if (I.contains(m) || I.contains(n)) throw Error(ErrorCode::InvalidArgument, "m and n must lie outside I");
  if (!I.is_finite()) throw Error(ErrorCode::InfiniteSubset, "I must be finite");
  if (s < 0.0) s = paper51_params(system).s_target();
  DigitMonotonicity out;
  const Matrix2 An = system.matrix(n), Am = system.matrix(m);
  out.entry_domination = An.a() <= Am.a() && An.b() <= Am.b() && An.c() <= Am.c() && An.d() <= Am.d();
  const SubsetSpec In = I.unite(SubsetSpec::finite({n})), Im = I.unite(SubsetSpec::finite({m}));
  bool sums_ok = true;
  for (unsigned k : depths) {
    const PartitionSum a = partition_sum(system, In, s, k, dopt.enumeration);
    const PartitionSum b = partition_sum(system, Im, s, k, dopt.enumeration);
    const Scaled an = a.value_euclidean + a.pruned_euclidean;
    out.log2_sums.emplace_back(an.log2(), b.value_euclidean.log2());
    sums_ok = sums_ok && an.log2() <= b.value_euclidean.log2() + std::log2(1.0 + 2.0 * a.slack);
  }
  out.dim_n = affinity_dimension(system, In, dopt);
  out.dim_m = affinity_dimension(system, Im, dopt);
  out.intervals_ordered = out.dim_n.lo <= out.dim_m.hi;
  out.holds = out.entry_domination && sums_ok && out.intervals_ordered;
  return out;
}

// ---------------------------------------------------------------------------
// Hole below log 3 / log beta.
// ---------------------------------------------------------------------------

struct HoleCase {
  std::string name;
  SubsetSpec dominating;
  DimensionInterval interval;
  std::size_t members = 0;  // enumerated subsets falling in this case
};

struct HoleOptions {
  Index n_max = 10;
  double tolerance = 1e-3;
  double budget = 1e7;
  unsigned threads = 0;
};

struct HoleCertificate {
  double a = 0.0;  // sup of the dominating upper ends
  double b = 0.0;  // lower end of s({1,2,3})
  std::vector<HoleCase> cases;
  DimensionInterval core;                   // s({1,2,3})
  std::vector<DimensionInterval> extended;  // s({1,2,3,m}) for tail m <= n_max
  std::size_t core_supersets = 0;           // enumerated I strictly containing {1,2,3}
  std::size_t subsets_checked = 0;
  Paper51Params params;
  Index n_max = 0;
  double budget = 0.0;
  bool certified = false;

  bool gap_nonempty() const { return a < b; }
};

/// Four-case split: every enumerated I avoiding one of 1, 2, 3 lies in a dominating
/// cofinite subset, every strict superset of {1,2,3} sits strictly above s({1,2,3}).
inline HoleCertificate certify_hole(const IfsSystem& system, const HoleOptions& opt = {}) {
  detail::validate_tolerance(opt.tolerance);
  HoleCertificate h;
  h.params = paper51_params(system);
  h.n_max = opt.n_max;
  h.budget = opt.budget;
  const Index t = system.tail()->start_index();
  h.cases = {
      {"1,2 in I; 3 not", SubsetSpec::cofinite({1, 2}, t), {}, 0},
      {"1,2 not in I", SubsetSpec::cofinite({3}, t), {}, 0},
      {"1 in I; 2 not", SubsetSpec::cofinite({1, 3}, t), {}, 0},
      {"2 in I; 1 not", SubsetSpec::cofinite({2, 3}, t), {}, 0},
  };
  DimensionOptions dopt;
  dopt.tolerance = opt.tolerance;
  dopt.enumeration.budget = opt.budget;
  dopt.enumeration.threads = opt.threads;
  for (auto& c : h.cases) c.interval = affinity_dimension(system, c.dominating, dopt);
  h.core = affinity_dimension(system, SubsetSpec::finite({1, 2, 3}), dopt);
  std::vector<Index> extra;
  for (Index i : system.indices_upto(opt.n_max))
    if (i > 3) extra.push_back(i);
  h.extended.resize(extra.size());
  parallel_for(extra.size(), opt.threads, [&](std::size_t i) {
    h.extended[i] = affinity_dimension(system, SubsetSpec::finite({1, 2, 3, extra[i]}), dopt);
  });

  const std::vector<Index> ground = system.indices_upto(opt.n_max);
  if (ground.size() > 22) throw Error(ErrorCode::InvalidArgument, "n_max too large for exhaustive enumeration");
  bool structural = true;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << ground.size()); ++mask) {
    std::vector<Index> idx;
    for (std::size_t i = 0; i < ground.size(); ++i)
      if (mask >> i & 1u) idx.push_back(ground[i]);
    const SubsetSpec I = SubsetSpec::finite(idx);
    ++h.subsets_checked;
    const bool h1 = I.contains(1), h2 = I.contains(2), h3 = I.contains(3);
    std::size_t which = 4;
    if (h1 && h2 && !h3) which = 0;
    else if (!h1 && !h2) which = 1;
    else if (h1 && !h2) which = 2;
    else if (h2 && !h1) which = 3;
    if (which < 4) {
      for (Index i : idx) structural = structural && h.cases[which].dominating.contains(i);
      ++h.cases[which].members;
    } else if (idx.size() > 3) {
      ++h.core_supersets;
    }
  }
  h.a = 0.0;
  bool certified = structural && h.core.certified;
  for (const auto& c : h.cases) {
    h.a = std::max(h.a, c.interval.hi);
    certified = certified && c.interval.certified;
  }
  for (const auto& e : h.extended) certified = certified && e.certified && e.lo > h.core.hi;
  h.b = h.core.lo;
  if (!(h.a < h.b))
    throw Error(ErrorCode::Inconclusive, "dominating intervals reach the core value; raise the budget or lower the tolerance");
  h.certified = certified;
  return h;
}

// ---------------------------------------------------------------------------
// Demonstrations.
// ---------------------------------------------------------------------------

struct IsolatedPointReport {
  SpectrumCloud cloud;
  double s0_lo = 0.0;
  double s0_hi = 0.0;
  DimensionInterval pair;  // {1,2}
  std::size_t low = 0, mixed = 0, pairs = 0;
  bool sosc = false;
  bool bands_hold = false;
  bool isolated = false;   // 1/2 appears among the isolated candidates
};

inline IsolatedPointReport isolated_point_demo(const SpectrumOptions& options = {}, const IsolatedParams& params = {}) {
  const IfsSystem system = build_isolated_point_family(params);
  IsolatedPointReport r;
  std::tie(r.s0_lo, r.s0_hi) = isolated_s0(params);
  r.sosc = verify_sosc_rectangles(system, SubsetSpec::cofinite({1, 2}, 3));
  r.cloud = enumerate_spectrum(system, options);
  const double third = std::log(2.0) / std::log(3.0);
  bool ok = r.sosc && !r.cloud.partial;
  for (const auto& p : r.cloud.points) {
    switch (isolated_band(p.subset)) {
      case IsolatedBand::Pair:
        ++r.pairs;
        r.pair = p.interval;
        ok = ok && p.interval.contains(0.5);
        break;
      case IsolatedBand::Low:
        ++r.low;
        ok = ok && p.interval.lo <= r.s0_hi && p.interval.hi < 0.5;  // never certifiably above s_0
        break;
      case IsolatedBand::Mixed:
        ++r.mixed;
        ok = ok && p.interval.lo >= third * (1.0 - 1e-12);
        break;
    }
  }
  r.bands_hold = ok && r.pairs == 1;
  for (const auto& c : r.cloud.isolated_candidates) r.isolated = r.isolated || (c.lo <= 0.5 && 0.5 <= c.hi);
  return r;
}

struct NonCompactReport {
  Paper51Params params;
  double hausdorff_core = 0.0;  // dim F_{1,2,3}
  double s_target = 0.0;        // log 3 / log beta
  std::vector<Index> tail_indices;
  std::vector<DimensionInterval> approach;  // s({1,2,3,n})
  bool strictly_above = false;
  bool decreasing = false;
  double shrink_factor = 0.0;  // (hi_first - s) / (hi_last - s)
  std::optional<HoleCertificate> hole;
  bool holds = false;
};

inline NonCompactReport non_compact_demo(const HoleOptions& opt = {}, const Paper51Params& params = {}, Index last = 14) {
  const IfsSystem system = build_paper_family_51(params);
  NonCompactReport r;
  r.params = paper51_params(system);
  r.s_target = r.params.s_target();
  r.hausdorff_core = std::log(3.0) / std::log(r.params.gamma);
  DimensionOptions dopt;
  dopt.tolerance = opt.tolerance;
  dopt.enumeration.budget = opt.budget;
  dopt.enumeration.threads = opt.threads;
  for (Index n = system.tail()->start_index(); n <= last; ++n) r.tail_indices.push_back(n);
  r.approach.resize(r.tail_indices.size());
  parallel_for(r.tail_indices.size(), opt.threads, [&](std::size_t i) {
    r.approach[i] = affinity_dimension(system, SubsetSpec::finite({1, 2, 3, r.tail_indices[i]}), dopt);
  });
  r.strictly_above = std::all_of(r.approach.begin(), r.approach.end(),
                                 [&](const DimensionInterval& d) { return d.certified && d.lo > r.s_target; });
  r.decreasing = true;
  for (std::size_t i = 0; i + 1 < r.approach.size(); ++i) r.decreasing = r.decreasing && r.approach[i + 1].hi < r.approach[i].hi;
  if (!r.approach.empty())
    r.shrink_factor = (r.approach.front().hi - r.s_target) / (r.approach.back().hi - r.s_target);
  r.hole = certify_hole(system, opt);
  r.holds = r.strictly_above && r.decreasing && r.hole->certified && r.hole->gap_nonempty();
  return r;
}

}  // namespace affdim
