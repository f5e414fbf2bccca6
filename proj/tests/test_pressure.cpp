#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "support.hpp"

using namespace affdim;

namespace {

EnumerationOptions small_budget(std::uint64_t b = 20'000) {
  EnumerationOptions o;
  o.budget = b;
  o.threads = 1;
  return o;
}

double s_target() { return std::log(3.0) / std::log(5.0); }

}  // namespace

TEST(PressureBound, ScalarFamilyIsExact) {
  const Matrix2 r = Matrix2::diagonal(1.0 / 3.0, 1.0 / 3.0);
  const IfsSystem sys = oracle::finite_system({r, r, r});
  const PressureBound p = pressure_bound(sys, oracle::first(3), 1.0, 4);
  EXPECT_EQ(p.method, PressureMethod::ExactMultiplicative);
  EXPECT_LE(p.lower, 1.0);
  EXPECT_GE(p.upper, 1.0);
  EXPECT_LE(p.upper - p.lower, 1e-9);
  for (double s : {0.2, 0.9, 1.7}) {
    const PressureBound q = pressure_bound(sys, oracle::first(3), s, 4);
    EXPECT_LE(q.lower, 3.0 * std::pow(3.0, -s));
    EXPECT_GE(q.upper, 3.0 * std::pow(3.0, -s));
  }
}

TEST(PressureBound, CoreTripleContainsOneAtTarget) {
  const IfsSystem sys = build_paper_family_51();
  const PressureBound p = pressure_bound(sys, parse_subset("1,2,3"), s_target(), 8);
  EXPECT_LE(p.lower, 1.0);
  EXPECT_GE(p.upper, 1.0);
  for (double s : {0.1, 0.5, 0.9}) {
    const PressureBound q = pressure_bound(sys, parse_subset("1,2,3"), s, 3);
    EXPECT_LE(q.lower, 3.0 * std::pow(5.0, -s));
    EXPECT_GE(q.upper, 3.0 * std::pow(5.0, -s));
  }
}

TEST(PressureBound, DeterminantBranchIsExact) {
  std::mt19937_64 rng(3);
  std::vector<Matrix2> mats;
  for (int i = 0; i < 4; ++i) mats.push_back(oracle::random_signed(rng, 0.5));
  const IfsSystem sys = oracle::finite_system(mats);
  double v = 0.0;
  for (const auto& m : mats) v += std::pow(std::abs(m.det()), 1.2);
  const PressureBound p = pressure_bound(sys, oracle::first(4), 2.4, 3);
  EXPECT_EQ(p.method, PressureMethod::ExactMultiplicative);
  EXPECT_LE(p.lower, v);
  EXPECT_GE(p.upper, v);
  EXPECT_LE(p.upper - p.lower, 2 * word_sum_slack(1) * v * (1 + 1e-9));
}

TEST(PressureBound, NonPositiveFamilyIsUpperOnly) {
  const IfsSystem sys = oracle::finite_system({Matrix2(0.3, -0.1, 0.2, 0.25), Matrix2(0.2, 0.1, -0.15, 0.3)});
  const PressureBound p = pressure_bound(sys, oracle::first(2), 0.7, 6);
  EXPECT_EQ(p.method, PressureMethod::FeketeOnly);
  EXPECT_FALSE(p.lower_certified);
  EXPECT_EQ(p.lower, 0.0);
  EXPECT_TRUE(std::isnan(p.upper_entry));
}

TEST(PressureBound, UpperIsRootOfPartitionSum) {
  std::mt19937_64 rng(9);
  std::vector<Matrix2> mats;
  for (int i = 0; i < 3; ++i) mats.push_back(oracle::random_positive(rng));
  const IfsSystem sys = oracle::finite_system(mats);
  std::vector<oracle::M> ls;
  for (auto& m : mats) ls.push_back(oracle::of(m));
  const double s = 0.8;
  const PressureBound p = pressure_bound(sys, oracle::first(3), s, 5);
  const double root = std::pow(oracle::partition_sum(ls, s, 5), 0.2);
  EXPECT_GE(p.upper, root);
  EXPECT_LE(p.upper, root * (1 + 1e-10));
  // lower = (c^s Z'_n)^(1/n) with c = kappa/2
  double zprime = 0.0;
  std::function<void(const Matrix2&, int)> rec = [&](const Matrix2& P, int left) {
    if (left == 0) {
      zprime += std::pow(P.a() + P.b() + P.c() + P.d(), s);
      return;
    }
    for (const auto& m : mats) rec(P * m, left - 1);
  };
  rec(Matrix2::identity(), 5);
  const double c = 0.5 * kappa(mats);
  EXPECT_NEAR(p.lower, std::pow(std::pow(c, s) * zprime, 0.2), 1e-10 * p.lower);
}

TEST(PressureBound, LinearPathAtOneMatchesEnumeration) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Matrix2> mats;
    for (int i = 0; i < 3; ++i) mats.push_back(oracle::random_positive(rng));
    const IfsSystem sys = oracle::finite_system(mats);
    const unsigned n = 7;
    const PressureBound lin = pressure_bound(sys, oracle::first(3), 1.0, n);
    const PartitionSum ps = partition_sum(sys, oracle::first(3), 1.0, n);
    const double enumerated = ps.value_entry_sum->root(n);
    EXPECT_NEAR(lin.upper_entry / (1 + word_sum_slack(n)), enumerated, 1e-12 * enumerated);
    EXPECT_EQ(lin.words_evaluated, 0u);
  }
}

TEST(PressureBound, Errors) {
  const IfsSystem sys = build_paper_family_51();
  EXPECT_THROW(pressure_bound(sys, parse_subset("1,2"), -0.5, 3), Error);
  EXPECT_THROW(pressure_bound(sys, parse_subset("1,2"), 0.5, 0), Error);
  EXPECT_THROW(pressure_bound(sys, parse_subset("1+tail(5)"), 0.5, 3), Error);
}

TEST(PressureProperty, FeketeNesting) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Matrix2> mats;
    const bool positive = trial % 2 == 0;
    for (int i = 0; i < 3; ++i) mats.push_back(positive ? oracle::random_positive(rng) : oracle::random_signed(rng, 0.5));
    const IfsSystem sys = oracle::finite_system(mats);
    const double s = std::uniform_real_distribution<double>(0.05, 1.95)(rng);
    for (unsigned n : {1u, 2u, 3u, 4u}) {
      const PressureBound a = pressure_bound(sys, oracle::first(3), s, n);
      const PressureBound b = pressure_bound(sys, oracle::first(3), s, 2 * n);
      EXPECT_LE(b.upper, a.upper * (1 + word_sum_slack(2 * n))) << trial << " n=" << n;
    }
  }
}

TEST(PressureProperty, EnclosureSandwichAcrossDepths) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Matrix2> mats;
    for (int i = 0; i < 3; ++i) mats.push_back(oracle::random_positive(rng));
    const IfsSystem sys = oracle::finite_system(mats);
    const double s = std::uniform_real_distribution<double>(0.05, 1.95)(rng);
    std::vector<PressureBound> bs;
    for (unsigned n = 1; n <= 8; ++n) bs.push_back(pressure_bound(sys, oracle::first(3), s, n));
    for (const auto& x : bs)
      for (const auto& y : bs) EXPECT_LE(x.lower, y.upper);
  }
}

TEST(PressureProperty, NormIndependence) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Matrix2> mats;
    for (int i = 0; i < 3; ++i) mats.push_back(oracle::random_positive(rng));
    const IfsSystem sys = oracle::finite_system(mats);
    const double s = std::uniform_real_distribution<double>(0.05, 1.95)(rng);
    for (unsigned n = 1; n <= 9; ++n) {
      const PressureBound p = pressure_bound(sys, oracle::first(3), s, n);
      const double u = std::max(p.upper, p.upper_entry);
      EXPECT_LE(std::abs(p.upper - p.upper_entry), (std::exp2(1.0 / n) - 1.0) * u + 1e-12 * u);
    }
  }
}

TEST(PressureProperty, MonotoneInIndexSet) {
  std::mt19937_64 rng(47);
  std::vector<Matrix2> mats;
  for (int i = 0; i < 5; ++i) mats.push_back(oracle::random_positive(rng));
  const IfsSystem sys = oracle::finite_system(mats);
  for (double s : {0.3, 0.9, 1.5})
    for (unsigned n : {2u, 5u}) {
      const PressureBound small = pressure_bound(sys, parse_subset("1,3"), s, n);
      const PressureBound mid = pressure_bound(sys, parse_subset("1,3,4"), s, n);
      const PressureBound big = pressure_bound(sys, oracle::first(5), s, n);
      EXPECT_LE(small.upper, mid.upper);
      EXPECT_LE(mid.upper, big.upper);
    }
}

TEST(TruncateWithTail, PrimeSubsetBelowOneAtTarget) {
  const Paper51Params p = resolve_paper51({});
  const IfsSystem sys = build_paper_family_51(p);
  const double s = p.s_target();
  const PressureBound tw = truncate_with_tail(sys, parse_subset("1,2+tail(5)"), s, 12, 6);
  EXPECT_EQ(tw.method, PressureMethod::TruncatedWithTail);
  EXPECT_LT(tw.upper, 0.99);
  EXPECT_LE(tw.lower, crucial_terms(p).rigorous());
  EXPECT_LE(tw.lower, tw.upper);
  EXPECT_GE(tw.upper, 2.0 / 3.0);
}

TEST(TruncateWithTail, VanishingTailMatchesTruncation) {
  const IfsSystem sys = build_paper_family_51();
  const double s = s_target();
  const PressureBound tw = truncate_with_tail(sys, parse_subset("1,2+tail(5)"), s, 40, 3);
  const PressureBound fin = pressure_bound(sys, sys.truncate(parse_subset("1,2+tail(5)"), 40), s, 3);
  EXPECT_LT(sys.tail()->tail_sum(40, s), 1e-15);
  EXPECT_NEAR(tw.upper, std::min(fin.upper, fin.upper_entry), 2 * word_sum_slack(1) * tw.upper);
  EXPECT_EQ(tw.lower, fin.lower);
}

TEST(TruncateWithTail, GeometricSelfSimilarTailConverges) {
  DiagonalTail t;
  t.a0 = 0.25;
  t.rate = 0.5;
  t.start = 2;
  const IfsSystem sys = build_self_similar({0.5}, t);
  const SubsetSpec all = parse_subset("1+tail(2)");
  for (double s : {0.5, 0.8, 1.2}) {
    const double closed = std::pow(0.5, s) + std::pow(0.25, s) / (1.0 - std::pow(0.5, s));
    double prev = std::numeric_limits<double>::infinity();
    for (Index N : {3u, 6u, 12u}) {
      const PressureBound b = truncate_with_tail(sys, all, s, N, 2);
      EXPECT_LE(b.lower, closed);
      EXPECT_GE(b.upper, closed);
      EXPECT_LE(b.upper - b.lower, prev);
      prev = b.upper - b.lower;
    }
    EXPECT_LT(prev, 3 * word_sum_slack(1) * closed);  // only the rounding slack remains
  }
}

TEST(TruncateWithTail, Errors) {
  const IfsSystem sys = build_paper_family_51();
  EXPECT_THROW(truncate_with_tail(sys, parse_subset("1,2"), 0.5, 10, 3), Error);
  EXPECT_THROW(truncate_with_tail(sys, parse_subset("1+tail(5)"), 2.5, 10, 3), Error);
}

TEST(DeltaBounds, EmptyJ) {
  const IfsSystem sys = build_paper_family_51();
  const GapBounds g = delta_bounds(sys, parse_subset("1,2"), SubsetSpec{}, 0.6);
  EXPECT_EQ(g.lower_gap, 0.0);
  EXPECT_EQ(g.upper_gap, 0.0);
}

TEST(DeltaBounds, FarTailIndexGivesTinyGap) {
  const IfsSystem sys = build_paper_family_51();
  const double s = s_target();
  const SubsetSpec I = parse_subset("1,2,3");
  for (Index n : {8u, 12u, 20u}) {
    const GapBounds g = delta_bounds(sys, I, SubsetSpec::finite({n}), s, small_budget());
    const double k = kappa(sys.matrix(1));
    const double bound = std::pow(2.0 / k, s) * std::pow(entry_sum_norm(sys.matrix(n)), s);
    EXPECT_LE(g.upper_gap, bound * (1 + 1e-11));
    EXPECT_GE(g.upper_gap, 0.0);
    EXPECT_LE(g.lower_gap, g.upper_gap);
    EXPECT_LT(g.upper_gap, std::pow(3.0, -(static_cast<double>(n) - 4.0)));
  }
}

TEST(DeltaBounds, Preconditions) {
  const IfsSystem sys = build_paper_family_51();
  EXPECT_THROW(delta_bounds(sys, parse_subset("1,2"), parse_subset("2,5"), 0.6), Error);
  const IfsSystem signed_sys = oracle::finite_system({Matrix2(0.3, -0.1, 0.2, 0.25), Matrix2(0.2, 0.1, -0.15, 0.3)});
  try {
    delta_bounds(signed_sys, parse_subset("1"), parse_subset("2"), 0.6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConstantsUnavailable);
  }
  const GapBounds am = delta_bounds(signed_sys, parse_subset("1"), parse_subset("2"), 0.6, AlmostMultiplicativeConstants{2.0, 3.0},
                                    small_budget());
  EXPECT_NEAR(am.upper_gap, 2.0 * svf(signed_sys.matrix(2), 0.6), 2 * word_sum_slack(1));
  const GapBounds q = delta_bounds(signed_sys, parse_subset("1"), parse_subset("2"), 0.6, QuasiConstants{1.5, 2}, small_budget());
  EXPECT_FALSE(q.lower_certified);
  EXPECT_GE(q.upper_gap, 1.5 * 2 * svf(signed_sys.matrix(2), 0.6));
}

TEST(DeltaBoundsProperty, ThreeWaySandwichOnRandomPositivePairs) {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> us(0.05, 1.95);
  std::uniform_int_distribution<int> size(1, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const int ni = size(rng), nj = size(rng);
    std::vector<Matrix2> mats;
    for (int i = 0; i < ni + nj; ++i) mats.push_back(oracle::random_positive(rng, 0.05, 0.3));
    const IfsSystem sys = oracle::finite_system(mats);
    std::vector<Index> iv, jv, uv;
    for (int i = 1; i <= ni + nj; ++i) (i <= ni ? iv : jv).push_back(static_cast<Index>(i)), uv.push_back(static_cast<Index>(i));
    const SubsetSpec I = SubsetSpec::finite(iv), J = SubsetSpec::finite(jv), U = SubsetSpec::finite(uv);
    const double s = us(rng);
    const EnumerationOptions opt = small_budget();
    auto encl = [&](const SubsetSpec& X) {
      const PressureOracle o(sys, X, opt);
      return o.refined(s, o.max_depth());
    };
    const Enclosure pi = encl(I), pu = encl(U);
    const GapBounds g = delta_bounds(sys, I, J, s, opt);
    const double tol = 1e-12 * pu.upper;
    // true P_U lies in [P_I + lower_gap, P_I + upper_gap]
    EXPECT_GE(pu.upper + tol, pi.lower + g.lower_gap) << "trial " << trial;
    EXPECT_LE(pu.lower, pi.upper + g.upper_gap + tol) << "trial " << trial;
    EXPECT_LE(g.lower_gap, g.upper_gap);
    EXPECT_GT(g.lower_gap, 0.0);
    // and P_U >= P_I termwise
    EXPECT_GE(pu.upper + tol, pi.lower);
  }
}

TEST(PressureOracle, CheapAndRefinedEnclosTrueValue) {
  const IfsSystem sys = build_self_similar({0.5, 0.25, 0.125});
  const PressureOracle o(sys, oracle::first(3));
  for (double s : {0.3, 0.9, 1.8, 2.5}) {
    const double v = std::pow(0.5, s) + std::pow(0.25, s) + std::pow(0.125, s);
    for (const Enclosure& e : {o.cheap(s), o.refined(s, 6)}) {
      EXPECT_LE(e.lower, v);
      EXPECT_GE(e.upper, v);
      EXPECT_TRUE(e.lower_certified);
    }
  }
}

TEST(PressureOracle, InfinitePositiveSubsetEnclosures) {
  const IfsSystem sys = build_paper_family_51();
  const PressureOracle o(sys, parse_subset("1,2+tail(5)"), small_budget(200'000));
  EXPECT_TRUE(o.infinite());
  const double s = s_target();
  const Enclosure c = o.cheap(s), r = o.refined(s, o.max_depth());
  EXPECT_LE(r.upper, c.upper * (1 + 1e-12));
  EXPECT_LE(c.lower, r.upper);
  EXPECT_LE(r.lower, c.upper);
  EXPECT_LT(r.upper, 1.0);
  EXPECT_GE(r.upper, 2.0 / 3.0);
}

TEST(Quasimultiplicativity, PositiveFamilyHasPositiveConstant) {
  std::mt19937_64 rng(53);
  std::vector<Letter> letters;
  for (int i = 0; i < 2; ++i) letters.push_back({oracle::random_positive(rng), 1.0, {static_cast<Index>(i + 1)}});
  const QuasiEstimate q = estimate_quasimultiplicativity(letters, 0.7);
  EXPECT_GT(q.c, 0.0);
  EXPECT_LE(q.c, 1.0 + 1e-12);
}
