#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "ifs.hpp"

namespace affdim {

// ---------------------------------------------------------------------------
// Non-compact example: three copies of a conjugated diagonal matrix plus a
// positive tail indexed from 5 (index 4 is absent).
// ---------------------------------------------------------------------------

struct Paper51Params {
  double beta = 5.0;
  double gamma = 0.0;  // 0 selects the smallest admissible power of ten
  double b = 0.6;
  double d = 0.9;
  double c = 0.25;
  double eta = 0.5;

  double K() const { return 8.0 / (c * eta); }
  double s_target() const { return std::log(3.0) / std::log(beta); }
};

/// A_1 = M diag(1/beta, 1/gamma) M^-1 with M = [[1,-1],[1/2,1/2]].
inline Matrix2 paper51_core(double beta, double gamma) {
  const double p = 1.0 / beta;
  const double q = 1.0 / gamma;
  return Matrix2(0.5 * (p + q), p - q, 0.25 * (p - q), 0.5 * (p + q));
}

/// Same-column ratio bound of the core matrix: (1/beta - 1/gamma) / (2 (1/beta + 1/gamma)).
inline double paper51_core_kappa(double beta, double gamma) {
  const double p = 1.0 / beta;
  const double q = 1.0 / gamma;
  return (p - q) / (2.0 * (p + q));
}

struct StandingAssumptions {
  bool column = false;       // every same-column ratio >= c
  bool positive = false;     // core matrix entrywise positive
  bool dominates = false;    // core >= A_5 entrywise
  bool irreducible = false;  // core eigenvectors are never tail eigenvectors
  double kappa = 0.0;
  std::vector<std::string> failures;

  bool all() const { return column && positive && dominates && irreducible; }
};

inline StandingAssumptions check_standing_assumptions(const Paper51Params& p) {
  StandingAssumptions out;
  const double beta = p.beta, gamma = p.gamma;
  const double pb = 1.0 / beta, qg = 1.0 / gamma;
  out.positive = pb - qg > 0.0;
  if (!out.positive) out.failures.push_back("core entry 1/beta - 1/gamma is not positive");
  out.kappa = std::min(paper51_core_kappa(beta, gamma), std::min(p.b / p.d, p.d / p.b));
  out.column = out.positive && out.kappa >= p.c;
  if (!out.column) out.failures.push_back("same-column ratio " + std::to_string(out.kappa) + " below c");
  const double b5 = std::pow(beta, -5.0), g5 = std::pow(gamma, -5.0);
  out.dominates = 0.5 * (pb + qg) >= b5 && pb - qg >= p.b * g5 && 0.25 * (pb - qg) >= b5 && 0.5 * (pb + qg) >= p.d * g5;
  if (!out.dominates) out.failures.push_back("core does not dominate A_5 entrywise");
  // (1,1/2) fails since d/2 - b < 0; (-1,1/2) needs 3 gamma^n != (d/2 + b) beta^n for n >= 5
  out.irreducible = p.d / 2.0 - p.b < 0.0 && 3.0 * std::pow(gamma / beta, 5.0) > p.d / 2.0 + p.b;
  if (!out.irreducible) out.failures.push_back("core eigenvector may be shared with the tail");
  return out;
}

/// Terms of the crucial pressure bound at s = log 3 / log beta.
struct CrucialTerms {
  double s = 0.0;
  double pair = 0.0;      // P_{1,2}(s) = 2 beta^-s
  double beta_tail = 0.0; // (8/c)^s sum_{m>=5} beta^-ms
  double relaxed_beta_tail = 0.0;  // eta^s beta^-3s, valid only when the K-inequality holds
  double gamma_tail = 0.0;         // (4/c)^s (b+d)^s sum_{m>=5} gamma^-ms
  double sI_lhs = 0.0;    // beta^2s - beta^s
  double sI_rhs = 0.0;    // K^s

  bool sI_holds() const { return sI_lhs > sI_rhs; }
  double rigorous() const { return pair + beta_tail + gamma_tail; }
  double relaxed() const { return pair + relaxed_beta_tail + gamma_tail; }
};

inline CrucialTerms crucial_terms(const Paper51Params& p) {
  CrucialTerms t;
  const double s = p.s_target();
  t.s = s;
  const double bs = std::pow(p.beta, s);
  t.pair = 2.0 / bs;
  const double lb = -s * std::log(p.beta);
  t.beta_tail = std::pow(8.0 / p.c, s) * std::exp(5.0 * lb) / -std::expm1(lb);
  t.relaxed_beta_tail = std::pow(p.eta, s) / (bs * bs * bs);
  const double lg = -s * std::log(p.gamma);
  t.gamma_tail = std::pow(4.0 / p.c, s) * std::pow(p.b + p.d, s) * std::exp(5.0 * lg) / -std::expm1(lg);
  t.sI_lhs = bs * bs - bs;
  t.sI_rhs = std::pow(p.K(), s);
  return t;
}

/// Smallest power of ten above beta meeting the standing assumptions and the crucial bound.
inline double auto_gamma(const Paper51Params& base) {
  Paper51Params p = base;
  for (int k = 1; k <= 300; ++k) {
    p.gamma = std::pow(10.0, k);
    if (p.gamma <= p.beta) continue;
    if (check_standing_assumptions(p).all() && crucial_terms(p).rigorous() < 1.0) return p.gamma;
  }
  throw Error(ErrorCode::AssumptionViolated, "no power of ten makes the standing assumptions hold");
}

inline Paper51Params resolve_paper51(Paper51Params p) {
  if (!(p.beta > 3.0)) throw Error(ErrorCode::ParameterOrder, "need beta > 3");
  if (!(p.b > 0.5 && p.b < p.d && p.d < 1.0)) throw Error(ErrorCode::ParameterOrder, "need 1/2 < b < d < 1");
  if (!(p.c > 0.0 && p.c < 1.0 && p.eta > 0.0 && p.eta < 1.0))
    throw Error(ErrorCode::ParameterOrder, "need c and eta in (0,1)");
  if (p.gamma == 0.0) p.gamma = auto_gamma(p);
  if (!(p.gamma > p.beta)) throw Error(ErrorCode::ParameterOrder, "need gamma > beta");
  return p;
}

inline IfsSystem build_paper_family_51(Paper51Params params = {}) {
  const Paper51Params p = resolve_paper51(params);
  const Matrix2 A = paper51_core(p.beta, p.gamma);
  if (!A.is_positive())
    throw Error(ErrorCode::PositivityNotAchieved,
                "core entry (1,2) = " + std::to_string(A.b()) + " is not positive; enlarge gamma");
  // Conjugated by M the three maps become y -> diag(1/beta,1/gamma) y + (2w', f_i) with
  // f_i in {0, w', 2w'}: one vertical line, three 1/gamma-similar pieces.
  const double w = A.a() + A.b();
  const double h = A.c() + A.d();
  const double sp = 1.05 * w;
  auto conj = [](double u, double v) { return Vec2{u - v, 0.5 * (u + v)}; };
  std::vector<IndexedMap> maps;
  for (Index i = 1; i <= 3; ++i) maps.push_back({i, {A, conj(2.0 * sp, sp * (i - 1))}});
  PaperTail tail{p.beta, p.gamma, p.b, p.d, 5, 0.0, 2.0 * sp + h + 0.02};
  GalleryInfo info{"paper51", {{"beta", p.beta}, {"gamma", p.gamma}, {"b", p.b}, {"d", p.d}, {"c", p.c}, {"eta", p.eta}}};
  IfsSystem draft(maps, TailGenerator(tail), Separation::None, info);
  const bool sosc = verify_sosc_rectangles(draft, SubsetSpec::cofinite({1, 2, 3}, 5));
  return IfsSystem(std::move(maps), TailGenerator(tail), sosc ? Separation::SOSC : Separation::None, std::move(info));
}

/// Reads the gallery parameters back from a built system.
inline Paper51Params paper51_params(const IfsSystem& system) {
  if (system.gallery().name != "paper51") throw Error(ErrorCode::InvalidArgument, "system is not the paper51 gallery");
  const auto& g = system.gallery().params;
  Paper51Params p;
  p.beta = g.at("beta");
  p.gamma = g.at("gamma");
  p.b = g.at("b");
  p.d = g.at("d");
  p.c = g.at("c");
  p.eta = g.at("eta");
  return p;
}

// ---------------------------------------------------------------------------
// Isolated-point example: two diag(1/3,1/4) maps on the left edge and a tail
// diag(1/3, a_n) on the right edge.
// ---------------------------------------------------------------------------

struct IsolatedParams {
  TailLaw law = TailLaw::Geometric;
  double a0 = 1.0 / 16.0;  // a_3
  double rate = 0.25;      // a_n = 4^-(n-1)

  DiagonalTail ratios_only() const { return DiagonalTail{law, a0, rate, std::nullopt, 0.0, 3}; }
};

/// Enclosure of the root of sum_{n>=3} a_n^s = 1.
inline std::pair<double, double> isolated_s0(const IsolatedParams& p) {
  const TailGenerator scalar(p.ratios_only());
  auto upper = [&](double s) { return scalar.tail_svf_sum(2, s); };
  auto lower = [&](double s) {
    double acc = 0.0;
    for (Index n = 3; n < 400; ++n) acc += std::pow(scalar.diagonal_ratio(n), s);
    return acc;
  };
  double lo = 0.0, hi = 4.0;
  double a = 0.0, b = 4.0;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (lo + hi);
    if (upper(m) < 1.0) hi = m;
    else lo = m;
    const double m2 = 0.5 * (a + b);
    if (lower(m2) > 1.0) a = m2;
    else b = m2;
  }
  return {a, hi};
}

inline IfsSystem build_isolated_point_family(IsolatedParams params = {}) {
  const DiagonalTail scalar = params.ratios_only();
  if (!(params.a0 > 0.0 && params.a0 < 1.0 / 3.0)) throw Error(ErrorCode::ParameterOrder, "need 0 < a_3 < 1/3");
  const auto [s0lo, s0hi] = isolated_s0(params);
  if (!(s0hi < 0.5))
    throw Error(ErrorCode::RootTooLarge, "tail root s_0 <= " + std::to_string(s0hi) + " is not below log2/log4");
  DiagonalTail tail = scalar;
  tail.major = 1.0 / 3.0;
  tail.tx = 2.0 / 3.0;
  const Matrix2 S = Matrix2::diagonal(1.0 / 3.0, 0.25);
  std::vector<IndexedMap> maps{{1, {S, {0.0, 0.0}}}, {2, {S, {0.0, 0.5}}}};
  GalleryInfo info{"isolated52", {{"a0", params.a0}, {"rate", params.rate},
                                  {"law", params.law == TailLaw::Geometric ? 0.0 : 1.0}}};
  IfsSystem draft(maps, TailGenerator(tail), Separation::None, info);
  if (!verify_sosc_rectangles(draft, SubsetSpec::cofinite({1, 2}, 3)))
    throw Error(ErrorCode::OverlapDetected, "tail images do not fit disjointly");
  return IfsSystem(std::move(maps), TailGenerator(tail), Separation::SOSC, std::move(info));
}

inline IsolatedParams isolated_params(const IfsSystem& system) {
  if (system.gallery().name != "isolated52") throw Error(ErrorCode::InvalidArgument, "system is not the isolated52 gallery");
  const auto& g = system.gallery().params;
  IsolatedParams p;
  p.a0 = g.at("a0");
  p.rate = g.at("rate");
  p.law = g.at("law") == 0.0 ? TailLaw::Geometric : TailLaw::Power;
  return p;
}

// ---------------------------------------------------------------------------
// Self-similar systems: similarities laid side by side along the bottom edge.
// ---------------------------------------------------------------------------

inline IfsSystem build_self_similar(const std::vector<double>& ratios, std::optional<DiagonalTail> tail = std::nullopt) {
  if (ratios.empty() && !tail) throw Error(ErrorCode::EmptyFamily, "no ratios");
  std::vector<IndexedMap> maps;
  double x = 0.0;
  GalleryInfo info{"selfsimilar", {}};
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const double r = ratios[i];
    if (!(r > 0.0 && r < 1.0)) throw Error(ErrorCode::ParameterOrder, "ratios must lie in (0,1)");
    maps.push_back({static_cast<Index>(i + 1), {Matrix2::diagonal(r, r), {x, 0.0}}});
    info.params["r" + std::to_string(i + 1)] = r;
    x += r;
  }
  std::optional<TailGenerator> gen;
  if (tail) {
    tail->major.reset();
    tail->start = std::max<Index>(tail->start, static_cast<Index>(ratios.size() + 1));
    gen.emplace(*tail);
    info.params["tail_a0"] = tail->a0;
    info.params["tail_q"] = tail->rate;
  }
  IfsSystem draft(maps, gen, Separation::None, info);
  const SubsetSpec all = SubsetSpec::cofinite({}, 1);
  Separation sep = Separation::None;
  if (verify_sosc_rectangles(draft, all)) sep = Separation::SOSC;
  else if (x <= 1.0 && !gen) sep = Separation::OSC;
  return IfsSystem(std::move(maps), std::move(gen), sep, std::move(info));
}

}  // namespace affdim
