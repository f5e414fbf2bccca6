// One PASS/FAIL line per acceptance criterion; exit status is nonzero if any line fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "support.hpp"

using namespace affdim;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double log3_over_log(double beta) { return std::log(3.0) / std::log(beta); }

void c1(Verdict& v) {
  const IfsSystem sys = build_self_similar({0.5, 0.25});
  DimensionOptions o;
  o.tolerance = 1e-6;
  const auto t0 = std::chrono::steady_clock::now();
  const DimensionInterval d = affinity_dimension(sys, oracle::first(2), o);
  const double secs = seconds_since(t0);
  const double root = oracle::bisect([](double s) { return std::pow(0.5, s) + std::pow(0.25, s) - 1.0; }, 0.0, 4.0);
  v.detail << "[" << fmt17(d.lo) << ", " << fmt17(d.hi) << "] oracle " << fmt17(root) << " width " << d.width() << " in " << secs << " s";
  v.require(d.certified, "certified");
  v.require(d.contains(root), "contains oracle root");
  v.require(d.width() <= 1e-6, "width <= 1e-6");
  v.require(secs < 1.0, "runtime < 1 s");
}

void c2(Verdict& v) {
  const IfsSystem sys = build_paper_family_51();
  DimensionOptions o;
  o.tolerance = 1e-3;
  const auto t0 = std::chrono::steady_clock::now();
  const DimensionInterval d = affinity_dimension(sys, parse_subset("1,2,3"), o);
  const double secs = seconds_since(t0);
  const double target = log3_over_log(5.0);
  v.detail << "s({1,2,3}) in [" << fmt17(d.lo) << ", " << fmt17(d.hi) << "] target " << fmt17(target) << " via " << d.method << " in "
           << secs << " s";
  v.require(d.certified, "certified");
  v.require(d.contains(target), "contains log3/log5");
  v.require(d.width() <= 1e-3, "width <= 1e-3");
  v.require(secs < 30.0, "runtime < 30 s");
}

void c3(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  const CrucialCheck c = verify_lemma_crucial({});
  const double secs = seconds_since(t0);
  v.detail << "gamma " << fmt17(resolve_paper51({}).gamma) << " bound " << fmt17(c.bound) << " P_I'(s) <= "
           << fmt17(c.cross_check.upper) << " in " << secs << " s";
  v.require(c.assumptions.all(), "standing assumptions");
  v.require(c.holds, "closed-form bound < 1");
  v.require(c.cross_check_holds, "truncation enclosure certified");
  v.require(c.cross_check.upper <= 0.99, "upper end <= 0.99");
  v.require(secs < 60.0, "runtime < 60 s");
}

void c4(Verdict& v) {
  const IfsSystem sys = build_paper_family_51();
  HoleOptions o;
  const auto t0 = std::chrono::steady_clock::now();
  const HoleCertificate a = certify_hole(sys, o);
  o.budget *= 4.0;
  const HoleCertificate b = certify_hole(sys, o);
  const double secs = seconds_since(t0);
  v.detail << "hole (" << fmt17(a.a) << ", " << fmt17(a.b) << ") over " << a.subsets_checked << " subsets; 4x budget (" << fmt17(b.a)
           << ", " << fmt17(b.b) << ") in " << secs << " s";
  v.require(a.certified && a.gap_nonempty(), "certified nonempty gap");
  v.require(a.b <= a.params.s_target() && a.a < a.params.s_target(), "gap below log3/log beta");
  v.require(a.certified == b.certified && a.gap_nonempty() == b.gap_nonempty(), "same verdict at 4x budget");
  v.require(secs < 300.0, "runtime < 5 min");
}

void c5(Verdict& v) {
  SpectrumOptions o;
  o.n_max = 10;
  const auto t0 = std::chrono::steady_clock::now();
  const IsolatedPointReport r = isolated_point_demo(o);
  const double secs = seconds_since(t0);
  const double s0 = oracle::bisect(
      [](double s) {
        double acc = -1.0;
        for (int n = 3; n < 4000; ++n) acc += std::pow(4.0, -(n - 1) * s);
        return acc;
      },
      0.0, 2.0);
  const double third = std::log(2.0) / std::log(3.0);
  bool low_ok = true, mixed_ok = true;
  for (const auto& p : r.cloud.points) {
    const IsolatedBand band = isolated_band(p.subset);
    if (band == IsolatedBand::Low) low_ok = low_ok && p.interval.hi <= s0 + 1e-12;
    if (band == IsolatedBand::Mixed) mixed_ok = mixed_ok && p.interval.lo >= third * (1 - 1e-12);
  }
  v.detail << "s({1,2}) in [" << fmt17(r.pair.lo) << ", " << fmt17(r.pair.hi) << "] s0 " << fmt17(s0) << "; " << r.low << " low, "
           << r.mixed << " mixed, " << r.pairs << " pair in " << secs << " s";
  v.require(r.pair.contains(0.5) && r.pair.certified, "{1,2} contains 1/2");
  v.require(s0 < 0.5, "s0 < 1/2");
  v.require(low_ok, "tail-only subsets <= s0");
  v.require(mixed_ok, "mixed subsets >= log2/log3");
  v.require(r.bands_hold && r.low + r.mixed + r.pairs == r.cloud.points.size(), "three bands cover the universe");
  v.require(r.isolated, "1/2 isolated");
}

void c6(Verdict& v) {
  HoleOptions o;
  const auto t0 = std::chrono::steady_clock::now();
  const NonCompactReport r = non_compact_demo(o, {}, 14);
  const double secs = seconds_since(t0);
  bool above = true, decreasing = true;
  for (std::size_t i = 0; i < r.approach.size(); ++i) {
    above = above && r.approach[i].certified && r.approach[i].lo > r.s_target;
    if (i > 0) decreasing = decreasing && r.approach[i].hi < r.approach[i - 1].hi;
  }
  const double first = r.approach.front().hi - r.s_target, last = r.approach.back().hi - r.s_target;
  v.detail << r.approach.size() << " intervals, hi-target " << first << " -> " << last << " (factor " << first / last << ") in " << secs
           << " s";
  v.require(r.approach.size() == 10, "n = 5..14");
  v.require(above, "strictly above log3/log beta");
  v.require(decreasing, "upper ends decrease");
  v.require(last * 10.0 <= first, "shrink factor >= 10");
}

void c7(Verdict& v) {
  std::size_t checks = 0;
  auto note = [&](bool ok, const std::string& what) {
    ++checks;
    if (!ok) v.require(false, what);
  };
  {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> us(0.0, 3.0);
    bool ok = true;
    for (int i = 0; i < 10000; ++i) {
      const Matrix2 p = oracle::random_signed(rng, 2.0), q = oracle::random_signed(rng, 2.0);
      const double s = us(rng);
      ok = ok && svf(p * q, s) <= svf(p, s) * svf(q, s) * (1.0 + 1e-12);
    }
    note(ok, "svf submultiplicative on 1e4 pairs");
  }
  {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> len(2, 12), pick(0, 2);
    bool ok = true;
    for (int w = 0; w < 1000; ++w) {
      std::vector<Matrix2> fam;
      for (int k = 0; k < 3; ++k) fam.push_back(oracle::random_positive(rng, 0.05, 0.4));
      const double c = 0.5 * kappa(fam);
      const int L = len(rng);
      const int cut = std::uniform_int_distribution<int>(1, L - 1)(rng);
      Matrix2 u = Matrix2::identity(), x = Matrix2::identity();
      for (int i = 0; i < L; ++i) (i < cut ? u : x) = (i < cut ? u : x) * fam[static_cast<std::size_t>(pick(rng))];
      ok = ok && entry_sum_norm(u * x) >= c * entry_sum_norm(u) * entry_sum_norm(x) * (1.0 - 1e-12);
    }
    note(ok, "almost multiplicativity on 1e3 positive words");
  }
  {
    std::mt19937_64 rng(19);
    bool ok = true;
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Matrix2> mats;
      for (int i = 0; i < 3; ++i) mats.push_back(trial % 2 == 0 ? oracle::random_positive(rng) : oracle::random_signed(rng, 0.5));
      const IfsSystem sys = oracle::finite_system(mats);
      const double s = std::uniform_real_distribution<double>(0.05, 1.95)(rng);
      for (unsigned n : {1u, 2u, 3u, 4u})
        ok = ok && pressure_bound(sys, oracle::first(3), s, 2 * n).upper <=
                       pressure_bound(sys, oracle::first(3), s, n).upper * (1 + word_sum_slack(2 * n));
    }
    note(ok, "Fekete nesting");
  }
  {
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> us(0.05, 1.95);
    std::uniform_int_distribution<int> size(1, 3);
    EnumerationOptions opt;
    opt.budget = 20'000;
    opt.threads = 1;
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
      const int ni = size(rng), nj = size(rng);
      std::vector<Matrix2> mats;
      for (int i = 0; i < ni + nj; ++i) mats.push_back(oracle::random_positive(rng, 0.05, 0.3));
      const IfsSystem sys = oracle::finite_system(mats);
      std::vector<Index> iv, jv, uv;
      for (int i = 1; i <= ni + nj; ++i) {
        (i <= ni ? iv : jv).push_back(static_cast<Index>(i));
        uv.push_back(static_cast<Index>(i));
      }
      const SubsetSpec I = SubsetSpec::finite(iv), J = SubsetSpec::finite(jv), U = SubsetSpec::finite(uv);
      const double s = us(rng);
      const PressureOracle oi(sys, I, opt), ou(sys, U, opt);
      const Enclosure pi = oi.refined(s, oi.max_depth()), pu = ou.refined(s, ou.max_depth());
      const GapBounds g = delta_bounds(sys, I, J, s, opt);
      const double tol = 1e-12 * pu.upper;
      ok = ok && pu.upper + tol >= pi.lower + g.lower_gap && pu.lower <= pi.upper + g.upper_gap + tol && g.lower_gap <= g.upper_gap &&
           g.lower_gap > 0.0;
    }
    note(ok, "three-way gap sandwich on 1e2 pairs");
  }
  {
    std::mt19937_64 rng(41);
    std::vector<Matrix2> mats;
    for (int i = 0; i < 5; ++i) mats.push_back(oracle::random_positive(rng));
    const IfsSystem sys = oracle::finite_system(mats);
    auto at = [&](unsigned t) {
      EnumerationOptions o;
      o.threads = t;
      return partition_sum(sys, oracle::first(5), 0.83, 7, o);
    };
    const PartitionSum ref = at(1);
    bool ok = true;
    for (unsigned t : {4u, 16u}) {
      const PartitionSum p = at(t);
      ok = ok && p.value_euclidean == ref.value_euclidean && *p.value_entry_sum == *ref.value_entry_sum &&
           p.words_evaluated == ref.words_evaluated;
    }
    note(ok, "bitwise determinism across 1, 4, 16 threads");
  }
  v.detail << checks << " property suites";
}

void c8(Verdict& v) {
  // five ordinary maps and five maps scaled by 1e-5, so deep words fall below the pruning ratio
  std::mt19937_64 rng(8);
  std::vector<Matrix2> mats;
  for (int i = 0; i < 5; ++i) mats.push_back(oracle::random_positive(rng, 0.02, 0.09));
  for (int i = 0; i < 5; ++i) {
    const Matrix2 m = oracle::random_positive(rng, 0.02, 0.09);
    mats.emplace_back(1e-5 * m.a(), 1e-5 * m.b(), 1e-5 * m.c(), 1e-5 * m.d());
  }
  const IfsSystem sys = oracle::finite_system(mats);
  EnumerationOptions full;
  full.threads = 8;
  full.budget = 1e7;
  full.prune = false;
  const double s = 1.3;
  const auto t0 = std::chrono::steady_clock::now();
  const PartitionSum a = partition_sum(sys, oracle::first(10), s, 7, full);
  const double secs = seconds_since(t0);
  const PartitionSum b = partition_sum(sys, oracle::first(10), s, 7, full);
  EnumerationOptions cut = full;
  cut.prune = true;  // default ratio
  const PartitionSum c = partition_sum(sys, oracle::first(10), s, 7, cut);
  const PartitionSum c2 = partition_sum(sys, oracle::first(10), s, 7, cut);
  const double exact = a.value_euclidean.to_double();
  const double upper = (c.value_euclidean + c.pruned_euclidean).to_double();
  const double rel = std::abs(upper - exact) / exact;
  v.detail << a.words_evaluated << " words in " << secs << " s with 8 threads on " << std::thread::hardware_concurrency()
           << " cores; pruned run evaluated " << c.words_evaluated << ", upper bounds differ by " << rel << " (slack " << c.slack << ")";
  v.require(a.words_evaluated == 10'000'000u, "1e7 words");
  v.require(secs < 10.0, "runtime < 10 s");
  v.require(a.value_euclidean == b.value_euclidean && *a.value_entry_sum == *b.value_entry_sum, "deterministic");
  v.require(c.value_euclidean == c2.value_euclidean && c.pruned_euclidean == c2.pruned_euclidean, "pruned run deterministic");
  v.require(c.words_evaluated < a.words_evaluated, "pruning fired");
  v.require(upper >= exact * (1 - c.slack) && rel <= c.slack, "pruned upper within declared slack");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Verdict&)>>> criteria{
      {"self-similar oracle", c1},   {"closed form at beta = 5", c2}, {"crucial pressure bound", c3}, {"hole certificate", c4},
      {"isolated point", c5},        {"non-compactness", c6},        {"property suites", c7},        {"performance", c8}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    if (!v.pass) ++failed;
    std::printf("%s criterion %zu: %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.str().c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
