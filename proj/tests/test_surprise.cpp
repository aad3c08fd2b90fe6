#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "test_util.hpp"

using namespace attrsample;
using namespace testutil;

namespace {

constexpr double kTol = 1e-9;

EmpiricalDistribution counts(std::initializer_list<double> c) {
  EmpiricalDistribution d(c.size());
  int i = 0;
  for (double x : c) d.add(i++, x);
  return d;
}

}  // namespace

TEST(EmpiricalDistribution, CountsOverSample) {
  // red = 0, blue = 1; sample {red, red, blue}.
  auto g = path(3);
  set_discrete(g, {{0, 0, 1}});
  SymbolTable sym(g);
  SampleState s(g, sym);
  for (NodeId v : {0u, 1u, 2u}) s.extend(v);
  EXPECT_NEAR(s.empirical_distribution(0).probability(0), 2.0 / 3.0, kTol);
  EXPECT_NEAR(s.empirical_distribution(0).probability(1), 1.0 / 3.0, kTol);
}

TEST(EmpiricalDistribution, SingleNodeIsPointMass) {
  auto g = path(2);
  set_discrete(g, {{0, 1}});
  SymbolTable sym(g);
  SampleState s(g, sym);
  s.extend(0);
  EXPECT_EQ(s.empirical_distribution(0).probability(0), 1.0);
}

TEST(EmpiricalDistribution, EmptySampleIsError) {
  auto g = path(2);
  set_discrete(g, {{0, 1}});
  SymbolTable sym(g);
  SampleState s(g, sym);
  EXPECT_THROW(s.empirical_distribution(0), ContractError);
}

TEST(Binning, LogBinsOfDecades) {
  BinningRule rule{BinningKind::log, 10, 1.0, 1000.0};
  // Bin index = floor(10 * log(x) / log(1000)): 0, 3.33 -> 3, 6.67 -> 6.
  EXPECT_EQ(rule.bin(1.0), 0);
  EXPECT_EQ(rule.bin(10.0), 3);
  EXPECT_EQ(rule.bin(100.0), 6);
  std::set<int> bins{rule.bin(1.0), rule.bin(10.0), rule.bin(100.0)};
  EXPECT_EQ(bins.size(), 3u);
  EXPECT_EQ(rule.bin(1000.0), 9);
}

TEST(Binning, LinearBinsAndMissing) {
  BinningRule rule{BinningKind::linear, 4, 0.0, 8.0};
  EXPECT_EQ(rule.bin(0.0), 0);
  EXPECT_EQ(rule.bin(1.99), 0);
  EXPECT_EQ(rule.bin(2.0), 1);
  EXPECT_EQ(rule.bin(8.0), 3);
  EXPECT_EQ(rule.bin(kMissing), -1);
}

TEST(Binning, NonPositiveMinimumIsShiftedForLogBins) {
  BinningRule rule{BinningKind::log, 10, -5.0, 5.0};
  EXPECT_EQ(rule.bin(-5.0), 0);
  EXPECT_EQ(rule.bin(5.0), 9);
}

TEST(Surprise, AllSeenAtProbabilityOneIsZero) {
  auto d = counts({1.0, 0.0});
  std::vector<int> cand{0, 0, 0};
  auto s = surprise(cand, d);
  EXPECT_FALSE(s.divergent());
  EXPECT_EQ(s.value, 0.0);
}

TEST(Surprise, BalancedPairIsLnTwo) {
  auto d = counts({1.0, 1.0});
  std::vector<int> cand{0, 1};
  EXPECT_NEAR(surprise(cand, d).value, std::log(2.0), kTol);
}

TEST(Surprise, UnseenValueDiverges) {
  auto d = counts({1.0, 0.0});
  std::vector<int> cand{0, 1};
  auto s = surprise(cand, d);
  EXPECT_TRUE(s.divergent());
  EXPECT_EQ(s.unseen, 1u);
  EXPECT_TRUE(std::isinf(s.value));
}

TEST(Surprise, BinaryLinearForm) {
  // Minority probability p = 0.25; candidate {minority, majority}, x = 0.5.
  const double p = 0.25, x = 0.5;
  auto d = counts({1.0 - p, p});
  std::vector<int> cand{1, 0};
  const double oracle = -std::log(1.0 - p) + x * std::log((1.0 - p) / p);
  EXPECT_NEAR(surprise(cand, d).value, oracle, kTol);
  EXPECT_NEAR(oracle, 0.8370, 5e-5);
}

TEST(Surprise, DivergentOrdersAboveFiniteAndByUnseenCount) {
  auto big = SurpriseScore::finite(1e300);
  auto one = SurpriseScore::diverged(1);
  auto two = SurpriseScore::diverged(2);
  EXPECT_LT(big, one);
  EXPECT_LT(one, two);
  EXPECT_LT(SurpriseScore::finite(0.1), SurpriseScore::finite(0.2));
}

TEST(Surprise, EmptyReferenceIsContractError) {
  EmpiricalDistribution d(2);
  std::vector<int> cand{0};
  EXPECT_THROW(surprise(cand, d), ContractError);
}

TEST(MultiAttributeSurprise, SingleAttributeMatches) {
  auto d = counts({3.0, 1.0});
  std::vector<std::vector<int>> cands{{0, 1, 1}};
  std::vector<EmpiricalDistribution> refs{d};
  EXPECT_NEAR(multi_attribute_surprise(cands, refs).value, surprise(cands[0], d).value, kTol);
}

TEST(MultiAttributeSurprise, AdditiveAcrossAttributes) {
  std::vector<std::vector<int>> cands{{0, 1}, {2, 3}};
  std::vector<EmpiricalDistribution> refs{counts({1, 1}), counts({0, 0, 1, 1})};
  EXPECT_NEAR(multi_attribute_surprise(cands, refs).value, 2.0 * std::log(2.0), kTol);
}

TEST(MultiAttributeSurprise, DivergenceIsAbsorbing) {
  std::vector<std::vector<int>> cands{{0, 1}, {0, 1, 2}};
  std::vector<EmpiricalDistribution> refs{counts({1, 1}), counts({1, 0, 0})};
  auto s = multi_attribute_surprise(cands, refs);
  EXPECT_TRUE(s.divergent());
  EXPECT_EQ(s.unseen, 2u);
}

TEST(HansenHurwitz, ReweightsByInverseDegree) {
  std::vector<WeightedVisit> v{{1, 0}, {2, 1}, {2, 1}};
  auto d = hansen_hurwitz_estimate(v, 2);
  EXPECT_NEAR(d.probability(0), 1.0 / (1.0 + 0.5 + 0.5), kTol);
  EXPECT_NEAR(d.probability(1), 0.5, kTol);
}

TEST(HansenHurwitz, EqualDegreesGivePlainEmpirical) {
  std::vector<WeightedVisit> v{{3, 0}, {3, 1}, {3, 1}, {3, 2}};
  auto d = hansen_hurwitz_estimate(v, 3);
  EXPECT_NEAR(d.probability(0), 0.25, kTol);
  EXPECT_NEAR(d.probability(1), 0.5, kTol);
  EXPECT_NEAR(d.probability(2), 0.25, kTol);
}

TEST(HansenHurwitz, SingleVisitIsPointMass) {
  std::vector<WeightedVisit> v{{4, 2}};
  EXPECT_EQ(hansen_hurwitz_estimate(v, 3).probability(2), 1.0);
}

TEST(HansenHurwitz, EmptyAndZeroDegreeAreErrors) {
  std::vector<WeightedVisit> none;
  EXPECT_THROW(hansen_hurwitz_estimate(none, 2), DataError);
  std::vector<WeightedVisit> zero{{0, 1}};
  EXPECT_THROW(hansen_hurwitz_estimate(zero, 2), ContractError);
}

// Properties over random distributions and candidates.

TEST(SurpriseProperty, DivergesExactlyWhenAValueIsUnseen) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 2000; ++t) {
    const int k = std::uniform_int_distribution<int>(2, 6)(rng);
    EmpiricalDistribution d(static_cast<std::size_t>(k));
    std::vector<bool> seen(k, false);
    for (int i = 0; i < k; ++i)
      if (std::bernoulli_distribution(0.6)(rng)) {
        d.add(i, std::uniform_real_distribution<double>(0.5, 5.0)(rng));
        seen[i] = true;
      }
    if (std::none_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
      d.add(0, 1.0);
      seen[0] = true;
    }
    std::vector<int> cand(std::uniform_int_distribution<std::size_t>(1, 8)(rng));
    std::set<int> unseen;
    for (auto& c : cand) {
      c = std::uniform_int_distribution<int>(0, k - 1)(rng);
      if (!seen[c]) unseen.insert(c);
    }
    auto s = surprise(cand, d);
    ASSERT_EQ(s.divergent(), !unseen.empty());
    ASSERT_EQ(s.unseen, unseen.size());
    if (!s.divergent()) {
      ASSERT_GE(s.value, 0.0);
    }
  }
}

TEST(SurpriseProperty, BinaryScoreIsAffineInMinorityShare) {
  // I(x) = -ln(1-p) + x ln((1-p)/p) for a candidate with minority share x.
  std::mt19937_64 rng(42);
  for (int t = 0; t < 500; ++t) {
    const double p = std::uniform_real_distribution<double>(0.01, 0.99)(rng);
    auto d = counts({1.0 - p, p});
    const std::size_t len = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    const std::size_t minority = std::uniform_int_distribution<std::size_t>(0, len)(rng);
    std::vector<int> cand(len, 0);
    std::fill(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(minority), 1);
    const double x = static_cast<double>(minority) / static_cast<double>(len);
    ASSERT_NEAR(surprise(cand, d).value, -std::log(1.0 - p) + x * std::log((1.0 - p) / p), kTol);
  }
}

TEST(HansenHurwitzProperty, RegularGraphGivesPlainEmpirical) {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 20; ++t) {
    auto g = random_regular(60, 4, rng);
    std::vector<int> col(60);
    for (auto& c : col) c = std::uniform_int_distribution<int>(0, 2)(rng);
    set_discrete(g, {col}, 3);
    SymbolTable sym(g);
    std::vector<NodeId> visits(std::uniform_int_distribution<std::size_t>(1, 200)(rng));
    for (auto& v : visits) v = std::uniform_int_distribution<NodeId>(0, 59)(rng);
    auto est = hansen_hurwitz_estimate(g, sym, visits, 0);
    for (int c = 0; c < 3; ++c) {
      double hits = 0.0;
      for (NodeId v : visits) hits += col[v] == c;
      ASSERT_NEAR(est.probability(c), hits / static_cast<double>(visits.size()), kTol);
    }
  }
}
