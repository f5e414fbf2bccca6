#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "ifs.hpp"
#include "linalg2.hpp"
#include "parallel.hpp"
#include "scaled.hpp"

namespace affdim {

/// Relative rounding allowance for a depth-n word sum.
inline double word_sum_slack(unsigned n) { return 1e-12 * (static_cast<double>(n) + 8.0); }

/// A distinct linear part and the number of subset indices that share it.
struct Letter {
  Matrix2 matrix;
  double multiplicity = 1.0;
  std::vector<Index> indices;
};

/// Merges bitwise-identical matrices; letter order follows first occurrence.
inline std::vector<Letter> group_letters(const IfsSystem& system, const std::vector<Index>& indices) {
  std::vector<Letter> out;
  for (Index i : indices) {
    const Matrix2 m = system.matrix(i);
    bool merged = false;
    for (auto& l : out) {
      if (l.matrix == m) {
        l.multiplicity += 1.0;
        l.indices.push_back(i);
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back({m, 1.0, {i}});
  }
  return out;
}

inline double total_multiplicity(const std::vector<Letter>& letters) {
  double m = 0.0;
  for (const auto& l : letters) m += l.multiplicity;
  return m;
}

struct EnumerationOptions {
  std::uint64_t budget = 10'000'000;
  unsigned threads = 0;  // 0 selects default_threads()
  bool prune = true;
  double prune_ratio = 1e-18;
};

/// Number of words of length n over k letters, saturating at UINT64_MAX.
inline std::uint64_t word_count(std::size_t k, unsigned n) {
  std::uint64_t c = 1;
  for (unsigned i = 0; i < n; ++i) {
    if (c > std::numeric_limits<std::uint64_t>::max() / std::max<std::size_t>(k, 1))
      return std::numeric_limits<std::uint64_t>::max();
    c *= k;
  }
  return c;
}

/// Largest n with k^n <= budget (capped at 256).
inline unsigned feasible_depth(std::size_t k, std::uint64_t budget) {
  unsigned n = 0;
  while (n < 256 && word_count(k, n + 1) <= budget) ++n;
  return n;
}

/// Sums over every depth 1..n from one traversal of the word tree; slot k-1 holds depth k.
/// Pruned entries bound the mass of skipped subtrees from above.
struct WordSums {
  unsigned depth = 0;
  std::vector<Scaled> euclidean;
  std::vector<Scaled> euclidean_pruned;
  std::vector<Scaled> entry;
  std::vector<Scaled> entry_pruned;
  std::uint64_t words_evaluated = 0;
  std::uint64_t nodes_evaluated = 0;
  bool has_entry = false;
};

namespace detail {

/// Product (a,b,c,d) * 2^e with log2|det| and log2 weight carried separately,
/// so near-rank-one products keep an accurate determinant.
struct Node {
  double a, b, c, d;
  std::int64_t e;
  double ldet;
  double lw;
};

inline void renormalize(Node& x) {
  const double m = std::max(std::max(std::abs(x.a), std::abs(x.b)), std::max(std::abs(x.c), std::abs(x.d)));
  if (m > 0x1p-256 && m < 0x1p256) return;
  int ex = 0;
  std::frexp(m, &ex);
  x.a = std::ldexp(x.a, -ex);
  x.b = std::ldexp(x.b, -ex);
  x.c = std::ldexp(x.c, -ex);
  x.d = std::ldexp(x.d, -ex);
  x.e += ex;
}

inline Node leaf(const Letter& l) {
  Node x{l.matrix.a(), l.matrix.b(), l.matrix.c(), l.matrix.d(), 0, std::log2(std::abs(l.matrix.det())),
         std::log2(l.multiplicity)};
  int ex = 0;
  std::frexp(std::max(std::max(std::abs(x.a), std::abs(x.b)), std::max(std::abs(x.c), std::abs(x.d))), &ex);
  x.a = std::ldexp(x.a, -ex);
  x.b = std::ldexp(x.b, -ex);
  x.c = std::ldexp(x.c, -ex);
  x.d = std::ldexp(x.d, -ex);
  x.e = ex;
  return x;
}

inline Node multiply(const Node& x, const Node& y) {
  Node r{x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d,
         x.e + y.e, x.ldet + y.ldet, x.lw + y.lw};
  renormalize(r);
  return r;
}

inline void neumaier(double& sum, double& comp, double x) {
  const double t = sum + x;
  if (std::abs(sum) >= std::abs(x)) comp += (sum - t) + x;
  else comp += (x - t) + sum;
  sum = t;
}

class WordWalker {
 public:
  WordWalker(const std::vector<Node>& letters, double s, unsigned n, bool entry, bool prune, double prune_ratio)
      : L_(letters), s_(s), n_(n), entry_(entry), prune_(prune), lratio_(std::log2(prune_ratio)) {
    double s1 = 0.0, s1e = 0.0;
    lmax_ = lmax_e_ = -std::numeric_limits<double>::infinity();
    for (const Node& x : L_) {
      const double v = log2_euclid(x);
      s1 += std::exp2(v);
      lmax_ = std::max(lmax_, v);
      if (entry_) {
        const double ve = log2_entry(x);
        s1e += std::exp2(ve);
        lmax_e_ = std::max(lmax_e_, ve);
      }
    }
    ls1_ = std::log2(s1);
    ls1e_ = entry_ ? std::log2(s1e) : 0.0;
  }

  double log2_euclid(const Node& x) const {
    if (s_ > 2.0) return 0.5 * s_ * x.ldet + x.lw;
    const double p = std::sqrt((x.a + x.d) * (x.a + x.d) + (x.b - x.c) * (x.b - x.c));
    const double q = std::sqrt((x.a - x.d) * (x.a - x.d) + (x.b + x.c) * (x.b + x.c));
    const double la1 = std::log2(0.5 * (p + q)) + static_cast<double>(x.e);
    return log2_svf_from(la1, x.ldet, s_) + x.lw;
  }

  double log2_entry(const Node& x) const {
    if (s_ > 2.0) return 0.5 * s_ * x.ldet + x.lw;
    const double le = std::log2(x.a + x.b + x.c + x.d) + static_cast<double>(x.e);
    if (s_ <= 1.0) return s_ * le + x.lw;
    return (2.0 - s_) * le + (s_ - 1.0) * x.ldet + x.lw;
  }

  struct Block {
    std::vector<Scaled> euc, euc_pruned, ent, ent_pruned;
    std::uint64_t words = 0;
    std::uint64_t nodes = 0;
  };

  /// Sums the subtree rooted at `root` (a word of length p), depths p..n.
  Block run(const Node& root, unsigned p) {
    p_ = p;
    const std::size_t m = n_ - p + 1;
    sum_.assign(m, 0.0);
    comp_.assign(m, 0.0);
    pr_.assign(m, 0.0);
    sum_e_.assign(m, 0.0);
    comp_e_.assign(m, 0.0);
    pr_e_.assign(m, 0.0);
    R_.assign(m, 0);
    Re_.assign(m, 0);
    words_ = nodes_ = 0;
    const double l0 = log2_euclid(root);
    const double l0e = entry_ ? log2_entry(root) : 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      R_[k] = static_cast<std::int64_t>(std::ceil(l0 + static_cast<double>(k) * lmax_));
      if (entry_) Re_[k] = static_cast<std::int64_t>(std::ceil(l0e + static_cast<double>(k) * lmax_e_));
    }
    visit(root, p);
    Block b;
    b.words = words_;
    b.nodes = nodes_;
    b.euc.resize(m);
    b.euc_pruned.resize(m);
    if (entry_) {
      b.ent.resize(m);
      b.ent_pruned.resize(m);
    }
    for (std::size_t k = 0; k < m; ++k) {
      b.euc[k] = Scaled::from_double(sum_[k] + comp_[k]).ldexp(R_[k]);
      b.euc_pruned[k] = Scaled::from_double(pr_[k]).ldexp(R_[k]);
      if (entry_) {
        b.ent[k] = Scaled::from_double(sum_e_[k] + comp_e_[k]).ldexp(Re_[k]);
        b.ent_pruned[k] = Scaled::from_double(pr_e_[k]).ldexp(Re_[k]);
      }
    }
    return b;
  }

 private:
  static constexpr double kFloor = -1000.0;

  void add(std::vector<double>& sum, std::vector<double>& comp, std::vector<double>& pr, std::int64_t R, std::size_t k,
           double lv) {
    const double rel = lv - static_cast<double>(R);
    if (rel < kFloor) pr[k] += std::exp2(kFloor);
    else neumaier(sum[k], comp[k], std::exp2(rel));
  }

  void visit(const Node& x, unsigned j) {
    ++nodes_;
    const std::size_t k = j - p_;
    const double lv = log2_euclid(x);
    add(sum_, comp_, pr_, R_[k], k, lv);
    double lve = 0.0;
    if (entry_) {
      lve = log2_entry(x);
      add(sum_e_, comp_e_, pr_e_, Re_[k], k, lve);
    }
    if (j == n_) {
      ++words_;
      return;
    }
    if (prune_ && negligible(lv, lve, j)) {
      for (unsigned dd = j + 1; dd <= n_; ++dd) {
        const std::size_t kk = dd - p_;
        const double steps = static_cast<double>(dd - j);
        pr_[kk] += std::exp2(std::max(kFloor, lv + steps * ls1_ - static_cast<double>(R_[kk])));
        if (entry_) pr_e_[kk] += std::exp2(std::max(kFloor, lve + steps * ls1e_ - static_cast<double>(Re_[kk])));
      }
      return;
    }
    for (const Node& l : L_) visit(multiply(x, l), j + 1);
  }

  bool negligible(double lv, double lve, unsigned j) const {
    const std::size_t kn = n_ - p_;
    const double total = sum_[kn] + comp_[kn];
    if (!(total > 0.0)) return false;
    const double rem = static_cast<double>(n_ - j);
    if (lv + rem * ls1_ >= std::log2(total) + static_cast<double>(R_[kn]) + lratio_) return false;
    if (!entry_) return true;
    const double te = sum_e_[kn] + comp_e_[kn];
    if (!(te > 0.0)) return false;
    return lve + rem * ls1e_ < std::log2(te) + static_cast<double>(Re_[kn]) + lratio_;
  }

  const std::vector<Node>& L_;
  double s_;
  unsigned n_;
  bool entry_;
  bool prune_;
  double lratio_;
  double ls1_ = 0.0, ls1e_ = 0.0, lmax_ = 0.0, lmax_e_ = 0.0;
  unsigned p_ = 0;
  std::vector<double> sum_, comp_, pr_, sum_e_, comp_e_, pr_e_;
  std::vector<std::int64_t> R_, Re_;
  std::uint64_t words_ = 0, nodes_ = 0;
};

constexpr std::uint64_t kMinBlocks = 256;

}  // namespace detail

/// Sums phi^s (and, for positive letters, its entry-sum counterpart) over all
/// words of length 1..n. Deterministic: blocks are fixed prefixes, each summed
/// in lexicographic order, combined in a fixed tree.
inline WordSums enumerate_word_sums(const std::vector<Letter>& letters, double s, unsigned n, bool with_entry,
                                    const EnumerationOptions& opts = {}) {
  if (!(s >= 0.0)) throw Error(ErrorCode::NegativeExponent, "s must be non-negative");
  if (letters.empty()) throw Error(ErrorCode::EmptySubset, "no letters to enumerate");
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "word length must be positive");
  const std::size_t k = letters.size();
  if (word_count(k, n) > opts.budget) {
    const unsigned f = feasible_depth(k, opts.budget);
    throw BudgetExceededError(f, std::to_string(k) + "^" + std::to_string(n) + " words exceed the budget; largest feasible depth is " +
                                     std::to_string(f));
  }
  if (with_entry)
    for (const auto& l : letters)
      if (!l.matrix.is_positive()) throw Error(ErrorCode::NotPositive, "entry-sum variant needs positive letters");

  std::vector<detail::Node> L;
  for (const auto& l : letters) L.push_back(detail::leaf(l));
  detail::WordWalker proto(L, s, n, with_entry, opts.prune, opts.prune_ratio);

  unsigned p = 1;
  while (p < n && word_count(k, p) < detail::kMinBlocks) ++p;
  const std::uint64_t blocks = word_count(k, p);

  WordSums out;
  out.depth = n;
  out.has_entry = with_entry;
  out.euclidean.assign(n, Scaled{});
  out.euclidean_pruned.assign(n, Scaled{});
  if (with_entry) {
    out.entry.assign(n, Scaled{});
    out.entry_pruned.assign(n, Scaled{});
  }

  // Depths below the block prefix: few enough words to sum serially.
  {
    std::vector<detail::Node> frontier = L;
    for (unsigned j = 1; j < p; ++j) {
      for (const auto& x : frontier) {
        out.euclidean[j - 1] += Scaled::from_log2(proto.log2_euclid(x));
        if (with_entry) out.entry[j - 1] += Scaled::from_log2(proto.log2_entry(x));
        ++out.nodes_evaluated;
      }
      std::vector<detail::Node> next;
      next.reserve(frontier.size() * k);
      for (const auto& x : frontier)
        for (const auto& l : L) next.push_back(detail::multiply(x, l));
      frontier = std::move(next);
    }
  }

  std::vector<detail::WordWalker::Block> results(blocks);
  parallel_for(blocks, opts.threads, [&](std::size_t bi) {
    detail::WordWalker walker(L, s, n, with_entry, opts.prune, opts.prune_ratio);
    std::vector<std::size_t> digits(p);
    std::uint64_t r = bi;
    for (unsigned t = p; t-- > 0;) {
      digits[t] = static_cast<std::size_t>(r % k);
      r /= k;
    }
    detail::Node root = L[digits[0]];
    for (unsigned t = 1; t < p; ++t) root = detail::multiply(root, L[digits[t]]);
    results[bi] = walker.run(root, p);
  });

  auto combine = [](const detail::WordWalker::Block& x, const detail::WordWalker::Block& y) {
    detail::WordWalker::Block r = x;
    for (std::size_t i = 0; i < r.euc.size(); ++i) {
      r.euc[i] += y.euc[i];
      r.euc_pruned[i] += y.euc_pruned[i];
    }
    for (std::size_t i = 0; i < r.ent.size(); ++i) {
      r.ent[i] += y.ent[i];
      r.ent_pruned[i] += y.ent_pruned[i];
    }
    r.words += y.words;
    r.nodes += y.nodes;
    return r;
  };
  const detail::WordWalker::Block total = tree_reduce(std::move(results), combine);
  for (unsigned j = p; j <= n; ++j) {
    out.euclidean[j - 1] = total.euc[j - p];
    out.euclidean_pruned[j - 1] = total.euc_pruned[j - p];
    if (with_entry) {
      out.entry[j - 1] = total.ent[j - p];
      out.entry_pruned[j - 1] = total.ent_pruned[j - p];
    }
  }
  out.words_evaluated = total.words;
  out.nodes_evaluated += total.nodes;
  return out;
}

}  // namespace affdim
