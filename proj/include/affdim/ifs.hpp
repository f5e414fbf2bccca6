#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "linalg2.hpp"
#include "subset.hpp"

namespace affdim {

struct AffineMap {
  Matrix2 linear;
  Vec2 translation;

  friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

/// Axis-aligned box [x0,x1] x [y0,y1].
struct Box {
  double x0, x1, y0, y1;

  bool inside_unit_square() const { return x0 >= 0.0 && y0 >= 0.0 && x1 <= 1.0 && y1 <= 1.0; }
  /// Open boxes meet iff both projections overlap with positive length.
  bool interiors_meet(const Box& o) const {
    return std::min(x1, o.x1) > std::max(x0, o.x0) && std::min(y1, o.y1) > std::max(y0, o.y0);
  }
};

/// Bounding box of S([0,1]^2).
inline Box image_box(const AffineMap& m) {
  const Matrix2& A = m.linear;
  const double x0 = m.translation.x + std::min(0.0, A.a()) + std::min(0.0, A.b());
  const double x1 = m.translation.x + std::max(0.0, A.a()) + std::max(0.0, A.b());
  const double y0 = m.translation.y + std::min(0.0, A.c()) + std::min(0.0, A.d());
  const double y1 = m.translation.y + std::max(0.0, A.c()) + std::max(0.0, A.d());
  return {x0, x1, y0, y1};
}

/// Tail of the non-compact example: A_n = [[beta^-n, b gamma^-n], [beta^-n, d gamma^-n]].
/// Images sit in one row at height y0, left to right from x0, gaps equal to widths.
struct PaperTail {
  double beta, gamma, b, d;
  Index start = 5;
  double x0 = 0.0;
  double y0 = 0.0;

  friend bool operator==(const PaperTail&, const PaperTail&) = default;
};

enum class TailLaw { Geometric, Power };

/// Diagonal tail diag(x_n, a_n) with a_n = a0 q^(n-start) (geometric) or a0 n^-p (power).
/// x_n is the fixed major axis when set, otherwise x_n = a_n (similarities).
/// Images are stacked downward from y = 1 at abscissa tx, gaps equal to heights.
struct DiagonalTail {
  TailLaw law = TailLaw::Geometric;
  double a0 = 0.25;
  double rate = 0.25;  // q for geometric, p for power
  std::optional<double> major;
  double tx = 0.0;
  Index start = 3;

  friend bool operator==(const DiagonalTail&, const DiagonalTail&) = default;
};

/// Parametric infinite family of maps indexed from start_index() upward.
class TailGenerator {
 public:
  explicit TailGenerator(PaperTail p) : spec_(p) { validate(); }
  explicit TailGenerator(DiagonalTail p) : spec_(p) { validate(); }

  const std::variant<PaperTail, DiagonalTail>& spec() const noexcept { return spec_; }
  bool is_paper() const noexcept { return std::holds_alternative<PaperTail>(spec_); }
  bool is_diagonal() const noexcept { return std::holds_alternative<DiagonalTail>(spec_); }
  bool positive() const noexcept { return is_paper(); }

  std::string family() const {
    if (is_paper()) return "paper51";
    return std::get<DiagonalTail>(spec_).law == TailLaw::Geometric ? "diagonal-geometric" : "diagonal-power";
  }

  Index start_index() const noexcept {
    return std::visit([](const auto& t) { return t.start; }, spec_);
  }

  /// Largest index whose matrix is still representable (determinant well above underflow).
  Index last_representable() const {
    double per_step = 0.0;
    double base = 0.0;
    if (const auto* p = std::get_if<PaperTail>(&spec_)) {
      per_step = std::log(p->beta) + std::log(p->gamma);
      base = std::log(p->d - p->b);
    } else {
      const auto& t = std::get<DiagonalTail>(spec_);
      Index lo = t.start;
      Index hi = 1'000'000;
      while (lo < hi) {
        const Index mid = lo + (hi - lo + 1) / 2;
        const double an = a(mid);
        const double x = t.major ? *t.major : an;
        if (an > 0 && std::log(an) + std::log(x) > -600.0) lo = mid;
        else hi = mid - 1;
      }
      return lo;
    }
    const double n = (base + 600.0) / per_step;
    return static_cast<Index>(std::max<double>(start_index(), std::floor(n)));
  }

  Matrix2 matrix(Index n) const {
    if (n < start_index()) throw Error(ErrorCode::IndexNotInSystem, "index below tail start");
    if (const auto* p = std::get_if<PaperTail>(&spec_)) {
      const double bn = std::pow(p->beta, -static_cast<double>(n));
      const double gn = std::pow(p->gamma, -static_cast<double>(n));
      return Matrix2(bn, p->b * gn, bn, p->d * gn);
    }
    const auto& t = std::get<DiagonalTail>(spec_);
    const double an = a(n);
    return Matrix2::diagonal(t.major ? *t.major : an, an);
  }

  Vec2 translation(Index n) const {
    if (const auto* p = std::get_if<PaperTail>(&spec_)) {
      double x = p->x0;
      for (Index m = p->start; m < n; ++m)
        x += 2.0 * (std::pow(p->beta, -static_cast<double>(m)) + p->b * std::pow(p->gamma, -static_cast<double>(m)));
      return {x, p->y0};
    }
    const auto& t = std::get<DiagonalTail>(spec_);
    double top = 1.0;
    for (Index m = t.start; m < n; ++m) top -= 2.0 * a(m);
    return {t.tx, top - a(n)};
  }

  AffineMap map(Index n) const { return {matrix(n), translation(n)}; }

  /// Smallest same-column entry ratio over every generated matrix (positive tails only).
  double kappa_lower() const {
    if (const auto* p = std::get_if<PaperTail>(&spec_)) return std::min(p->b / p->d, p->d / p->b);
    throw Error(ErrorCode::NotPositive, "diagonal tails have zero entries");
  }

  /// Upper bound on sum over n > N of the entry-sum form of phi^s (positive tails)
  /// or of phi^s itself (diagonal tails); +inf when the series diverges.
  double tail_sum(Index N, double s) const {
    if (!(s >= 0.0)) throw Error(ErrorCode::NegativeExponent, "s must be non-negative");
    const Index n1 = std::max<Index>(N + 1, start_index());
    if (const auto* p = std::get_if<PaperTail>(&spec_)) return paper_sum(*p, n1, s);
    return diagonal_sum(std::get<DiagonalTail>(spec_), n1, s);
  }

  /// Upper bound on sum over n > N of phi^s(A_n) in the spectral norm.
  double tail_svf_sum(Index N, double s) const {
    const Index n1 = std::max<Index>(N + 1, start_index());
    if (const auto* p = std::get_if<PaperTail>(&spec_)) {
      if (s > 2.0) {
        const double r = std::pow(p->beta * p->gamma, -0.5 * s);
        return std::pow(p->d - p->b, 0.5 * s) * std::pow(r, static_cast<double>(n1)) / (1.0 - r);
      }
      return paper_sum(*p, n1, s);
    }
    return diagonal_sum(std::get<DiagonalTail>(spec_), n1, s);
  }

  /// Whether tail_svf_sum is the exact series value rather than a bound.
  bool tail_svf_exact(double s) const {
    if (is_paper()) return s > 2.0;
    return std::get<DiagonalTail>(spec_).law == TailLaw::Geometric;
  }

  /// The phi^s series is certainly infinite at s (its terms are bounded below by a divergent series).
  bool diverges(double s) const {
    if (s <= 0.0) return true;
    if (is_paper()) return false;
    const auto& t = std::get<DiagonalTail>(spec_);
    const double e = exponent_on_a(t, s);
    if (e <= 0.0) return true;
    return t.law == TailLaw::Power && t.rate * e <= 1.0;
  }

  /// Bounding box containing every tail image.
  Box region() const {
    if (const auto* p = std::get_if<PaperTail>(&spec_)) {
      const double st = static_cast<double>(p->start);
      const double wsum = std::pow(p->beta, -st) / (1.0 - 1.0 / p->beta) +
                          p->b * std::pow(p->gamma, -st) / (1.0 - 1.0 / p->gamma);
      const double h = std::pow(p->beta, -st) + p->d * std::pow(p->gamma, -st);
      return {p->x0, p->x0 + 2.0 * wsum, p->y0, p->y0 + h};
    }
    const auto& t = std::get<DiagonalTail>(spec_);
    const double width = t.major ? *t.major : a(t.start);
    return {t.tx, t.tx + width, 1.0 - 2.0 * a_total(t), 1.0};
  }

  friend bool operator==(const TailGenerator& x, const TailGenerator& y) { return x.spec_ == y.spec_; }

 /// a_n of a diagonal tail.
  double diagonal_ratio(Index n) const { return a(n); }

 private:
  double a(Index n) const {
    const auto& t = std::get<DiagonalTail>(spec_);
    if (t.law == TailLaw::Geometric) return t.a0 * std::pow(t.rate, static_cast<double>(n - t.start));
    return t.a0 * std::pow(static_cast<double>(n), -t.rate);
  }

  static double a_total(const DiagonalTail& t) {
    if (t.law == TailLaw::Geometric) return t.a0 / (1.0 - t.rate);
    const double st = static_cast<double>(t.start);
    if (t.rate <= 1.0) return std::numeric_limits<double>::infinity();
    return t.a0 * (std::pow(st, -t.rate) + std::pow(st, 1.0 - t.rate) / (t.rate - 1.0));
  }

  /// phi^s(diag(x_n, a_n)) = coef * a_n^e with x_n >= a_n.
  static double exponent_on_a(const DiagonalTail& t, double s) {
    if (!t.major) return s;
    if (s <= 1.0) return 0.0;
    if (s <= 2.0) return s - 1.0;
    return 0.5 * s;
  }
  static double coefficient(const DiagonalTail& t, double s) {
    if (!t.major) return 1.0;
    const double x = *t.major;
    if (s <= 1.0) return std::pow(x, s);
    if (s <= 2.0) return x;
    return std::pow(x, 0.5 * s);
  }

  static double diagonal_sum(const DiagonalTail& t, Index n1, double s) {
    const double e = exponent_on_a(t, s);
    const double inf = std::numeric_limits<double>::infinity();
    if (e <= 0.0) return inf;
    const double coef = coefficient(t, s);
    if (t.law == TailLaw::Geometric) {
      const double qe = std::pow(t.rate, e);
      return coef * std::pow(t.a0, e) * std::pow(qe, static_cast<double>(n1 - t.start)) / (1.0 - qe);
    }
    const double pe = t.rate * e;
    if (pe <= 1.0) return inf;
    // sum over n >= n1 of n^-pe <= n1^-pe + integral from n1 to infinity
    const double x = static_cast<double>(n1);
    return coef * std::pow(t.a0, e) * (std::pow(x, -pe) + std::pow(x, 1.0 - pe) / (pe - 1.0));
  }

  static double paper_sum(const PaperTail& p, Index n1, double s) {
    const double inf = std::numeric_limits<double>::infinity();
    if (s <= 0.0) return inf;
    const double n = static_cast<double>(n1);
    if (s > 2.0) {
      const double r = std::pow(p.beta * p.gamma, -0.5 * s);
      return std::pow(p.d - p.b, 0.5 * s) * std::pow(r, n) / (1.0 - r);
    }
    // ||A_m||' = 2 beta^-m (1 + eps_m), eps_m = (b+d)/2 (beta/gamma)^m decreasing in m
    const double eps = 0.5 * (p.b + p.d) * std::pow(p.beta / p.gamma, n);
    const double lead = std::log(2.0 * (1.0 + eps));
    if (s <= 1.0) {
      const double lr = -s * std::log(p.beta);
      return std::exp(s * lead + n * lr) / -std::expm1(lr);
    }
    // ||A_m||'^(2-s) |det A_m|^(s-1), |det A_m| = (d-b) beta^-m gamma^-m
    const double lr = -std::log(p.beta) - (s - 1.0) * std::log(p.gamma);
    return std::exp((2.0 - s) * lead + (s - 1.0) * std::log(p.d - p.b) + n * lr) / -std::expm1(lr);
  }

  void validate() const {
    if (const auto* p = std::get_if<PaperTail>(&spec_)) {
      if (!(p->beta > 1.0 && p->gamma > p->beta && p->b > 0.0 && p->d > p->b))
        throw Error(ErrorCode::ParameterOrder, "tail needs 1 < beta < gamma and 0 < b < d");
      return;
    }
    const auto& t = std::get<DiagonalTail>(spec_);
    if (!(t.a0 > 0.0 && t.a0 < 1.0)) throw Error(ErrorCode::ParameterOrder, "tail needs 0 < a0 < 1");
    if (t.law == TailLaw::Geometric && !(t.rate > 0.0 && t.rate < 1.0))
      throw Error(ErrorCode::ParameterOrder, "geometric tail needs 0 < q < 1");
    if (t.law == TailLaw::Power && !(t.rate > 0.0)) throw Error(ErrorCode::ParameterOrder, "power tail needs p > 0");
    if (t.start < 1) throw Error(ErrorCode::ParameterOrder, "tail start must be >= 1");
    if (t.law == TailLaw::Power && t.start < 2) throw Error(ErrorCode::ParameterOrder, "power tail start must be >= 2");
    if (t.major && !(*t.major >= a(t.start) && *t.major < 1.0))
      throw Error(ErrorCode::ParameterOrder, "major axis must dominate the tail ratios");
  }

  std::variant<PaperTail, DiagonalTail> spec_;
};

enum class Separation { None, OSC, SOSC };

inline const char* to_string(Separation s) {
  switch (s) {
    case Separation::None: return "none";
    case Separation::OSC: return "OSC";
    case Separation::SOSC: return "SOSC";
  }
  return "none";
}

/// Which built-in construction produced a system; empty name for user systems.
struct GalleryInfo {
  std::string name;
  std::map<std::string, double> params;

  friend bool operator==(const GalleryInfo&, const GalleryInfo&) = default;
};

struct IndexedMap {
  Index index;
  AffineMap map;

  friend bool operator==(const IndexedMap&, const IndexedMap&) = default;
};

/// Finite subset resolved against a system: explicit indices plus an optional
/// generated tail from tail_from upward.
struct ResolvedSubset {
  std::vector<Index> finite;
  std::optional<Index> tail_from;
};

/// Immutable countable affine IFS: explicit maps followed by an optional tail.
class IfsSystem {
 public:
  IfsSystem(std::vector<IndexedMap> maps, std::optional<TailGenerator> tail, Separation sep,
            GalleryInfo gallery = {})
      : maps_(std::move(maps)), tail_(std::move(tail)), sep_(sep), gallery_(std::move(gallery)) {
    if (maps_.empty() && !tail_) throw Error(ErrorCode::InvalidSystem, "system has no maps");
    Index prev = 0;
    positive_ = true;
    for (const auto& m : maps_) {
      if (m.index <= prev) throw Error(ErrorCode::InvalidSystem, "indices must be strictly increasing and >= 1");
      if (!(m.map.linear.alpha1() < 1.0))
        throw Error(ErrorCode::InvalidSystem, "map " + std::to_string(m.index) + " is not a contraction");
      positive_ = positive_ && m.map.linear.is_positive();
      prev = m.index;
    }
    if (tail_) {
      if (tail_->start_index() <= prev) throw Error(ErrorCode::InvalidSystem, "tail must start after explicit maps");
      if (!(tail_->matrix(tail_->start_index()).alpha1() < 1.0))
        throw Error(ErrorCode::InvalidSystem, "tail maps are not contractions");
      positive_ = positive_ && tail_->positive();
    }
  }

  const std::vector<IndexedMap>& explicit_maps() const noexcept { return maps_; }
  const std::optional<TailGenerator>& tail() const noexcept { return tail_; }
  Separation declared_separation() const noexcept { return sep_; }
  const GalleryInfo& gallery() const noexcept { return gallery_; }
  bool positive() const noexcept { return positive_; }

  bool contains(Index i) const {
    if (tail_ && i >= tail_->start_index()) return true;
    return std::any_of(maps_.begin(), maps_.end(), [i](const IndexedMap& m) { return m.index == i; });
  }

  AffineMap map(Index i) const {
    for (const auto& m : maps_)
      if (m.index == i) return m.map;
    if (tail_ && i >= tail_->start_index()) return tail_->map(i);
    throw Error(ErrorCode::IndexNotInSystem, "index " + std::to_string(i) + " is not in the system");
  }

  Matrix2 matrix(Index i) const { return map(i).linear; }

  /// All system indices <= n in increasing order.
  std::vector<Index> indices_upto(Index n) const {
    std::vector<Index> out;
    for (const auto& m : maps_)
      if (m.index <= n) out.push_back(m.index);
    if (tail_)
      for (Index i = tail_->start_index(); i <= n; ++i) out.push_back(i);
    return out;
  }

  /// Checks membership and splits the subset into its finite part and generated tail.
  ResolvedSubset resolve(const SubsetSpec& subset) const {
    ResolvedSubset r;
    for (Index i : subset.base()) {
      if (!contains(i)) throw Error(ErrorCode::IndexNotInSystem, "index " + std::to_string(i) + " is not in the system");
      r.finite.push_back(i);
    }
    if (auto t = subset.tail_start()) {
      for (const auto& m : maps_)
        if (m.index >= *t) r.finite.push_back(m.index);
      if (tail_) r.tail_from = std::max(*t, tail_->start_index());
    }
    std::sort(r.finite.begin(), r.finite.end());
    r.finite.erase(std::unique(r.finite.begin(), r.finite.end()), r.finite.end());
    if (r.finite.empty() && !r.tail_from) throw Error(ErrorCode::EmptySubset, "subset selects no maps");
    return r;
  }

  /// The subset restricted to indices <= n, as a finite subset.
  SubsetSpec truncate(const SubsetSpec& subset, Index n) const {
    const ResolvedSubset r = resolve(subset);
    std::vector<Index> out;
    for (Index i : r.finite)
      if (i <= n) out.push_back(i);
    if (r.tail_from)
      for (Index i = *r.tail_from; i <= n; ++i) out.push_back(i);
    return SubsetSpec::finite(std::move(out));
  }

  friend bool operator==(const IfsSystem& x, const IfsSystem& y) {
    return x.maps_ == y.maps_ && x.tail_ == y.tail_ && x.sep_ == y.sep_ && x.gallery_ == y.gallery_;
  }

 private:
  std::vector<IndexedMap> maps_;
  std::optional<TailGenerator> tail_;
  Separation sep_;
  GalleryInfo gallery_;
  bool positive_ = false;
};

enum class Irreducibility { StronglyIrreducible, Irreducible, Reducible, Undetermined };

inline const char* to_string(Irreducibility v) {
  switch (v) {
    case Irreducibility::StronglyIrreducible: return "strongly-irreducible";
    case Irreducibility::Irreducible: return "irreducible";
    case Irreducibility::Reducible: return "reducible";
    case Irreducibility::Undetermined: return "undetermined";
  }
  return "undetermined";
}

struct IrreducibilityVerdict {
  Irreducibility verdict = Irreducibility::Undetermined;
  std::optional<Vec2> shared_eigenvector;
  std::string witness;
};

namespace detail {

/// |sin| of the angle between B v and v, relative to |B|; zero means v is an eigenvector of B.
inline double eigen_defect(const Matrix2& B, Vec2 v) {
  const Vec2 w = B * v;
  const double n = std::hypot(w.x, w.y) * std::hypot(v.x, v.y);
  return n == 0.0 ? 0.0 : std::abs(w.x * v.y - w.y * v.x) / n;
}

inline IrreducibilityVerdict irreducibility_of(const std::vector<Matrix2>& mats) {
  constexpr double kTight = 1e-12;
  constexpr double kLoose = 1e-9;
  IrreducibilityVerdict out;
  std::vector<Matrix2> distinct;
  for (const auto& m : mats)
    if (std::find(distinct.begin(), distinct.end(), m) == distinct.end()) distinct.push_back(m);
  const bool all_positive = std::all_of(distinct.begin(), distinct.end(), [](const Matrix2& m) { return m.is_positive(); });
  const auto pivot = std::find_if(distinct.begin(), distinct.end(), [](const Matrix2& m) { return !m.is_scalar(); });
  if (pivot == distinct.end()) {
    out.verdict = Irreducibility::Reducible;
    out.shared_eigenvector = Vec2{1.0, 0.0};
    out.witness = "all matrices are scalar";
    return out;
  }
  const auto lines = eigenvectors(*pivot);
  if (lines.empty()) {
    out.verdict = all_positive ? Irreducibility::StronglyIrreducible : Irreducibility::Irreducible;
    out.witness = "a member has no real eigenvector";
    return out;
  }
  bool ambiguous = false;
  for (const Vec2& v : lines) {
    double worst = 0.0;
    for (const auto& B : distinct) worst = std::max(worst, eigen_defect(B, v));
    if (worst <= kTight) {
      out.verdict = Irreducibility::Reducible;
      out.shared_eigenvector = v;
      out.witness = "common eigenvector";
      return out;
    }
    ambiguous = ambiguous || worst <= kLoose;
  }
  if (ambiguous) {
    out.witness = "eigenvector defect within rounding noise";
    return out;
  }
  out.verdict = all_positive ? Irreducibility::StronglyIrreducible : Irreducibility::Irreducible;
  out.witness = all_positive ? "no common eigenvector; positive family" : "no common eigenvector";
  return out;
}

}  // namespace detail

/// Shared-eigenvector test; the generated tail of the non-compact example is handled by its closed-form roots.
inline IrreducibilityVerdict check_irreducibility(const IfsSystem& system, const SubsetSpec& subset) {
  const ResolvedSubset r = system.resolve(subset);
  std::vector<Matrix2> mats;
  for (Index i : r.finite) mats.push_back(system.matrix(i));
  if (!r.tail_from) return detail::irreducibility_of(mats);

  const TailGenerator& tail = *system.tail();
  if (tail.is_diagonal()) {
    const bool diag = std::all_of(mats.begin(), mats.end(), [](const Matrix2& m) { return m.is_diagonal(); });
    if (diag) return {Irreducibility::Reducible, Vec2{1.0, 0.0}, "all matrices diagonal"};
    return {};
  }
  const auto& p = std::get<PaperTail>(tail.spec());
  // Two generated members already settle the tail: their eigenvector roots v_+- are
  // strictly monotone in n, so no line is shared by all of them.
  std::vector<Matrix2> probe = mats;
  probe.push_back(tail.matrix(*r.tail_from));
  probe.push_back(tail.matrix(*r.tail_from + 1));
  IrreducibilityVerdict v = detail::irreducibility_of(probe);
  if (v.verdict == Irreducibility::StronglyIrreducible) {
    const double f = std::pow(p.gamma / p.beta, static_cast<double>(*r.tail_from));
    const double disc = std::sqrt((f - p.d) * (f - p.d) + 4.0 * p.b * f);
    v.witness = "distinct tail eigenvector roots; v+ = " + std::to_string((p.d - f + disc) / (2.0 * p.b)) +
                " at the first tail index";
  }
  return v;
}

/// Sufficient SOSC check: image boxes pairwise interior-disjoint and inside the unit square.
inline bool verify_sosc_rectangles(const IfsSystem& system, const SubsetSpec& subset) {
  const ResolvedSubset r = system.resolve(subset);
  std::vector<Box> boxes;
  for (Index i : r.finite) boxes.push_back(image_box(system.map(i)));
  if (r.tail_from) {
    const TailGenerator& tail = *system.tail();
    const Index last = std::min<Index>(*r.tail_from + 40, tail.last_representable());
    for (Index i = *r.tail_from; i <= last; ++i) boxes.push_back(image_box(tail.map(i)));
    Box region = tail.region();
    if (!region.inside_unit_square()) return false;
    for (std::size_t k = 0; k < r.finite.size(); ++k)
      if (boxes[k].interiors_meet(region)) return false;
  }
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (!boxes[i].inside_unit_square()) return false;
    for (std::size_t j = i + 1; j < boxes.size(); ++j)
      if (boxes[i].interiors_meet(boxes[j])) return false;
  }
  return true;
}

}  // namespace affdim
