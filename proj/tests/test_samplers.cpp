#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "test_util.hpp"

using namespace attrsample;
using namespace testutil;

namespace {

constexpr double kTol = 1e-9;

/// Connected random graph with one 3-valued discrete and two continuous
/// attributes, so that every sampler kind applies.
AttributedGraph mixed_graph(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto g = connected_random(n, 4.0 / static_cast<double>(n), rng);
  std::vector<int> d(n);
  std::vector<double> c0(n), c1(n);
  for (std::size_t v = 0; v < n; ++v) {
    d[v] = std::uniform_int_distribution<int>(0, 2)(rng);
    c0[v] = std::uniform_real_distribution<double>(0.0, 10.0)(rng);
    c1[v] = std::normal_distribution<double>(0.0, 1.0)(rng);
  }
  set_mixed(g, {d}, {c0, c1});
  return g;
}

SamplerSpec spec_of(SamplerKind k, std::uint64_t seed = 1) {
  SamplerSpec s;
  s.kind = k;
  s.rng_seed = seed;
  s.clusters = 2;
  return s;
}

std::vector<NodeId> run_nodes(const AttributedGraph& g, SamplerKind k, NodeId seed, std::size_t z,
                              std::uint64_t rng_seed = 1) {
  return run_sampler(g, spec_of(k, rng_seed), seed, z).nodes;
}

/// Grows S along `order` with link-trace extends.
SampleState grown(const AttributedGraph& g, const SymbolTable& sym, std::initializer_list<NodeId> order) {
  SampleState s(g, sym);
  for (NodeId v : order) s.extend(v);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Driver contracts.

TEST(RunSampler, SizeOneIsSeedForEveryKind) {
  auto g = mixed_graph(40, 3);
  for (SamplerKind k : kAllSamplerKinds) {
    auto nodes = run_nodes(g, k, 7, 1);
    EXPECT_EQ(nodes, (std::vector<NodeId>{7})) << to_string(k);
  }
}

TEST(RunSampler, FullSizeBfsCoversComponent) {
  auto g = mixed_graph(50, 4);
  auto nodes = run_nodes(g, SamplerKind::bfs, 0, 50);
  EXPECT_EQ(std::set<NodeId>(nodes.begin(), nodes.end()).size(), 50u);
}

TEST(RunSampler, EveryKindIsDeterministic) {
  auto g = mixed_graph(60, 5);
  for (SamplerKind k : kAllSamplerKinds) {
    auto a = run_nodes(g, k, 3, 20, 99);
    auto b = run_nodes(g, k, 3, 20, 99);
    EXPECT_EQ(a, b) << to_string(k);
  }
}

TEST(RunSampler, DistinctNodesExactSizeAndLinkTrace) {
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    auto g = mixed_graph(45, 100 + trial);
    for (SamplerKind k : kAllSamplerKinds) {
      auto nodes = run_nodes(g, k, static_cast<NodeId>(trial), 30, trial);
      ASSERT_EQ(nodes.size(), 30u) << to_string(k);
      ASSERT_EQ(std::set<NodeId>(nodes.begin(), nodes.end()).size(), 30u) << to_string(k);
      if (is_link_trace(k)) {
        ASSERT_TRUE(is_link_trace_sequence(g, nodes)) << to_string(k);
      }
    }
  }
}

TEST(RunSampler, SizeOutOfRangeIsContractError) {
  auto g = mixed_graph(10, 6);
  EXPECT_THROW(run_nodes(g, SamplerKind::bfs, 0, 0), ContractError);
  EXPECT_THROW(run_nodes(g, SamplerKind::bfs, 0, 11), ContractError);
}

TEST(RunSampler, ExhaustedFrontierIsRunError) {
  // Two components: BFS from node 0 cannot reach z = 4.
  auto g = from_edges(4, {{0, 1}, {2, 3}});
  EXPECT_THROW(run_nodes(g, SamplerKind::bfs, 0, 4), RunError);
  EXPECT_THROW(run_nodes(g, SamplerKind::xs, 0, 4), RunError);
}

TEST(RunSampler, WalkerStepCapIsRunError) {
  auto g = from_edges(4, {{0, 1}, {2, 3}});
  EXPECT_THROW(run_nodes(g, SamplerKind::rw, 0, 3), RunError);
  EXPECT_THROW(run_nodes(g, SamplerKind::mhrw, 0, 3), RunError);
}

TEST(RunSampler, AttributeScopeErrors) {
  auto disc = path(5);
  set_discrete(disc, {{0, 1, 0, 1, 0}});
  auto cont = path(5);
  set_mixed(cont, {}, {{1, 2, 3, 4, 5}});
  EXPECT_THROW(run_nodes(disc, SamplerKind::exp, 0, 2), ConfigError);
  EXPECT_THROW(run_nodes(disc, SamplerKind::cluster, 0, 2), ConfigError);
  EXPECT_THROW(run_nodes(cont, SamplerKind::ixs, 0, 2), ConfigError);
  EXPECT_THROW(run_nodes(cont, SamplerKind::bal, 0, 2), ConfigError);
  EXPECT_NO_THROW(run_nodes(cont, SamplerKind::hixs, 0, 2));
  EXPECT_NO_THROW(run_nodes(disc, SamplerKind::hixs, 0, 2));
}

// ---------------------------------------------------------------------------
// Spec parsing.

TEST(SamplerSpec, NamesParseLeniently) {
  EXPECT_EQ(parse_sampler_kind("ixs"), SamplerKind::ixs);
  EXPECT_EQ(parse_sampler_kind("I&M"), SamplerKind::ixm);
  EXPECT_EQ(parse_sampler_kind("h-ixs"), SamplerKind::hixs);
  EXPECT_EQ(parse_sampler_kind("ExP"), SamplerKind::exp);
  EXPECT_THROW(parse_sampler_kind("teleport"), ConfigError);
  for (SamplerKind k : kAllSamplerKinds) EXPECT_EQ(parse_sampler_kind(to_string(k)), k);
}

TEST(SamplerSpec, JsonRoundTripAndValidation) {
  SamplerSpec s;
  s.kind = SamplerKind::vns;
  s.burn_probability = 0.4;
  s.rng_seed = 17;
  s.prior["color"].by_label = {{"red", 0.25}, {"blue", 0.75}};
  nlohmann::json j = s;
  auto back = j.get<SamplerSpec>();
  EXPECT_EQ(back.kind, SamplerKind::vns);
  EXPECT_EQ(back.burn_probability, 0.4);
  EXPECT_EQ(back.rng_seed, 17u);
  EXPECT_EQ(back.prior.at("color").by_label.at("blue"), 0.75);

  EXPECT_THROW((nlohmann::json{{"kind", "FF"}, {"params", {{"burn_probability", 1.0}}}}.get<SamplerSpec>()), ConfigError);
  EXPECT_THROW((nlohmann::json{{"kind", "FF"}, {"params", {{"nonsense", 1}}}}.get<SamplerSpec>()), ConfigError);
  EXPECT_THROW((nlohmann::json{{"kind", "PRIOR"}, {"params", {{"prior", {{"c", {0.5, 0.4}}}}}}}.get<SamplerSpec>()),
               ConfigError);
  EXPECT_EQ(nlohmann::json("MHRW").get<SamplerSpec>().kind, SamplerKind::mhrw);
}

// ---------------------------------------------------------------------------
// UNI.

TEST(Uniform, LastRemainingNode) {
  auto g = path(3);
  SymbolTable sym(g);
  SampleState s(g, sym);
  s.extend_any(0);
  s.extend_any(2);
  Rng rng(1);
  EXPECT_EQ(uni_next(s, rng), 1u);
}

TEST(Uniform, FrequenciesAreFlat) {
  auto g = ring(10);
  SymbolTable sym(g);
  SampleState s(g, sym);
  Rng rng(2);
  std::vector<double> hits(10, 0.0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++hits[uni_next(s, rng)];
  for (double h : hits) EXPECT_NEAR(h / draws, 0.1, 0.01);
}

TEST(Uniform, NeverRepeats) {
  auto g = mixed_graph(30, 8);
  auto nodes = run_nodes(g, SamplerKind::uni, 0, 30);
  EXPECT_EQ(std::set<NodeId>(nodes.begin(), nodes.end()).size(), 30u);
}

// ---------------------------------------------------------------------------
// BFS and Forest Fire.

TEST(Bfs, StarFromCenterIsAscendingLeaves) {
  EXPECT_EQ(run_nodes(star(5), SamplerKind::bfs, 0, 6), (std::vector<NodeId>{0, 1, 2, 3, 4, 5}));
}

TEST(Bfs, PathFromEnd) { EXPECT_EQ(run_nodes(path(3), SamplerKind::bfs, 0, 3), (std::vector<NodeId>{0, 1, 2})); }

TEST(Bfs, RingOfFour) { EXPECT_EQ(run_nodes(ring(4), SamplerKind::bfs, 0, 4), (std::vector<NodeId>{0, 1, 3, 2})); }

TEST(ForestFire, NearCertainBurningMatchesBfsSets) {
  for (std::size_t n : {5u, 9u, 16u})
    for (NodeId seed : {NodeId{0}, NodeId{2}}) {
      auto g = path(n);
      for (std::size_t z = 1; z <= n; ++z) {
        SamplerSpec ff = spec_of(SamplerKind::ff, z);
        ff.burn_probability = 1.0 - 1e-12;
        auto a = run_sampler(g, ff, seed, z).nodes;
        auto b = run_nodes(g, SamplerKind::bfs, seed, z);
        EXPECT_EQ(std::set<NodeId>(a.begin(), a.end()), std::set<NodeId>(b.begin(), b.end())) << n << " " << z;
      }
    }
}

TEST(ForestFire, StarSampleContainsCenter) {
  auto g = star(12);
  for (std::uint64_t r = 0; r < 200; ++r) {
    SamplerSpec ff = spec_of(SamplerKind::ff, r);
    NodeId seed = static_cast<NodeId>(r % 13);
    auto nodes = run_sampler(g, ff, seed, 2 + r % 10).nodes;
    EXPECT_TRUE(std::find(nodes.begin(), nodes.end(), 0u) != nodes.end());
  }
}

TEST(ForestFire, DeadFireReignitesAndCoversPath) {
  auto g = path(25);
  for (std::uint64_t r = 0; r < 50; ++r) {
    SamplerSpec ff = spec_of(SamplerKind::ff, r);
    ff.burn_probability = 0.05;
    auto nodes = run_sampler(g, ff, 0, 25).nodes;
    EXPECT_EQ(nodes.size(), 25u);
    EXPECT_TRUE(is_link_trace_sequence(g, nodes));
  }
}

TEST(ForestFire, BurnCountMean) {
  Rng rng(4);
  const double p = 0.7;
  double sum = 0.0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) sum += static_cast<double>(burn_count(rng, p));
  EXPECT_NEAR(sum / draws, p / (1.0 - p), 0.03);
}

// ---------------------------------------------------------------------------
// Random walks.

TEST(RandomWalk, MiddleOfPathIsFairCoin) {
  auto g = path(3);
  Rng rng(5);
  WalkerState w;
  int left = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    w.reset(3, 1);
    left += rw_next(g, w, rng) == 0;
  }
  EXPECT_NEAR(static_cast<double>(left) / draws, 0.5, 0.01);
}

TEST(RandomWalk, DegreeOneMovesToUniqueNeighbor) {
  auto g = star(4);
  Rng rng(6);
  WalkerState w;
  for (NodeId leaf = 1; leaf <= 4; ++leaf) {
    w.reset(5, leaf);
    EXPECT_EQ(rw_next(g, w, rng), 0u);
  }
}

TEST(RandomWalk, StationaryFrequencyProportionalToDegree) {
  std::mt19937_64 grng(7);
  auto g = connected_random(20, 0.2, grng);
  // Odd cycle guard: the random extra edges make the graph non-bipartite
  // with overwhelming probability; check it.
  Rng rng(8);
  WalkerState w;
  w.reset(g.num_nodes(), 0);
  std::vector<double> freq(g.num_nodes(), 0.0);
  const int steps = 1000000;
  for (int i = 0; i < steps; ++i) ++freq[rw_next(g, w, rng)];
  double tv = 0.0;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    tv += std::abs(freq[v] / steps - static_cast<double>(g.degree(v)) / (2.0 * static_cast<double>(g.num_edges())));
  EXPECT_LE(tv / 2.0, 0.05);
}

TEST(Mhrw, AcceptanceProbabilities) {
  EXPECT_EQ(mhrw_acceptance(4, 2), 1.0);
  EXPECT_EQ(mhrw_acceptance(2, 4), 0.5);
}

TEST(Mhrw, StationaryFrequencyIsUniform) {
  std::mt19937_64 grng(9);
  auto g = connected_random(200, 0.03, grng);
  Rng rng(10);
  WalkerState w;
  w.reset(g.num_nodes(), 0);
  std::vector<double> freq(g.num_nodes(), 0.0);
  const int steps = 1000000;
  for (int i = 0; i < steps; ++i) ++freq[mhrw_next(g, w, rng)];
  double tv = 0.0;
  for (double f : freq) tv += std::abs(f / steps - 1.0 / static_cast<double>(g.num_nodes()));
  EXPECT_LE(tv / 2.0, 0.05);
}

TEST(Mhrw, WalkToNewHonoursStepCap) {
  auto g = ring(6);
  SymbolTable sym(g);
  SampleState s(g, sym);
  s.extend(0);
  WalkerState w;
  w.reset(6, 0);
  Rng rng(11);
  EXPECT_THROW(walk_to_new(s, w, rng, true, 0), RunError);
}

TEST(RandomWalk, VisitsKeepRevisits) {
  auto g = mixed_graph(30, 12);
  auto s = run_sampler(g, spec_of(SamplerKind::rw), 0, 15);
  EXPECT_GE(s.visits.size(), s.nodes.size());
  EXPECT_EQ(s.visits.front(), 0u);
  for (std::size_t i = 1; i < s.visits.size(); ++i) EXPECT_TRUE(g.has_edge(s.visits[i - 1], s.visits[i]));
}

// ---------------------------------------------------------------------------
// XS and BAL.

TEST(Expansion, LargerUnexploredCountWins) {
  // Seed 0 with frontier {1, 2}; node 2 has three private leaves, node 1 one.
  auto g = from_edges(7, {{0, 1}, {0, 2}, {2, 3}, {2, 4}, {2, 5}, {1, 6}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0});
  EXPECT_EQ(s.unexplored(2), 3u);
  EXPECT_EQ(s.unexplored(1), 1u);
  EXPECT_EQ(xs_next(s), 2u);
}

TEST(Expansion, CliqueTieGoesToSmallestId) {
  auto g = clique(6);
  SymbolTable sym(g);
  auto s = grown(g, sym, {3});
  EXPECT_EQ(xs_next(s), 0u);
}

TEST(Balanced, RarestSeenValueWins) {
  // S = path 0-1-2-3 colored red,red,red,blue; frontier 4 (red), 5 (blue).
  auto g = from_edges(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {3, 5}});
  set_discrete(g, {{0, 0, 0, 1, 0, 1}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0, 1, 2, 3});
  std::vector<std::size_t> attrs{0};
  EXPECT_NEAR(s.distribution(0).probability(0), 0.75, kTol);
  EXPECT_EQ(bal_next(s, attrs), 5u);
}

TEST(Balanced, UnseenValueBeatsAnySeenValue) {
  auto g = from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
  set_discrete(g, {{0, 1, 2, 1}});  // 2 plays "green", unseen in S = {0}
  SymbolTable sym(g);
  auto s = grown(g, sym, {0, 1});
  std::vector<std::size_t> attrs{0};
  EXPECT_EQ(bal_next(s, attrs), 2u);
}

TEST(Balanced, SingleFrontierNode) {
  auto g = path(3);
  set_discrete(g, {{0, 0, 0}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0, 1});
  std::vector<std::size_t> attrs{0};
  EXPECT_EQ(bal_next(s, attrs), 2u);
}

// ---------------------------------------------------------------------------
// IXS and H-IXS.

TEST(InformationExpansion, UnseenValueInDeltaSelectsItsCarrier) {
  // Path a(red)-b(red)-c(blue): from S={a}, b's candidate {b, c} diverges.
  auto g = path(3);
  set_discrete(g, {{0, 0, 1}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0});
  std::vector<std::size_t> attrs{0};
  auto score = candidate_surprise(s, 1, attrs);
  EXPECT_TRUE(score.divergent());
  EXPECT_EQ(ixs_next(s, attrs), 1u);

  // Adding a red leaf d with a smaller id than b does not change the choice.
  auto g2 = from_edges(4, {{0, 1}, {0, 2}, {2, 3}});
  set_discrete(g2, {{0, 0, 0, 1}});
  SymbolTable sym2(g2);
  auto s2 = grown(g2, sym2, {0});
  EXPECT_EQ(candidate_surprise(s2, 1, attrs).value, 0.0);
  EXPECT_EQ(ixs_next(s2, attrs), 2u);
}

TEST(InformationExpansion, AllSeenZeroScoresTieToSmallestId) {
  auto g = star(5);
  set_discrete(g, {{0, 0, 0, 0, 0, 0}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0});
  std::vector<std::size_t> attrs{0};
  EXPECT_EQ(ixs_next(s, attrs), 1u);
}

TEST(InformationExpansion, MoreUnseenValuesWin) {
  // Frontier 1 reaches one unseen value, frontier 2 reaches two.
  auto g = from_edges(6, {{0, 1}, {0, 2}, {1, 3}, {2, 4}, {2, 5}});
  set_discrete(g, {{0, 0, 0, 1, 2, 3}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0});
  std::vector<std::size_t> attrs{0};
  EXPECT_EQ(candidate_surprise(s, 1, attrs).unseen, 1u);
  EXPECT_EQ(candidate_surprise(s, 2, attrs).unseen, 2u);
  EXPECT_EQ(ixs_next(s, attrs), 2u);
}

TEST(InformationExpansion, CandidateSurpriseMatchesHandValue) {
  // S = {0 (red), 1 (blue)}; frontier node 2 (red) with delta {3 (blue)}.
  auto g = from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
  set_discrete(g, {{0, 1, 0, 1}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0, 1});
  std::vector<std::size_t> attrs{0};
  EXPECT_NEAR(candidate_surprise(s, 2, attrs).value, std::log(2.0), kTol);
}

TEST(HybridExpansion, DiscreteOnlyMatchesIxs) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = connected_random(30, 0.1, rng);
    std::vector<int> d(30), e(30);
    for (auto& x : d) x = std::uniform_int_distribution<int>(0, 3)(rng);
    for (auto& x : e) x = std::uniform_int_distribution<int>(0, 1)(rng);
    set_discrete(g, {d, e});
    auto a = run_nodes(g, SamplerKind::hixs, 0, 20);
    auto b = run_nodes(g, SamplerKind::ixs, 0, 20);
    EXPECT_EQ(a, b);
  }
}

TEST(HybridExpansion, UnseenBinDiverges) {
  // Continuous values 1, 2, 900 on [1, 900]: 900 lands in a bin S lacks.
  auto g = path(3);
  set_mixed(g, {}, {{1.0, 2.0, 900.0}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0});
  std::vector<std::size_t> attrs{0};
  EXPECT_TRUE(candidate_surprise(s, 1, attrs).divergent());
}

TEST(HybridExpansion, FiniteDiscretePlusDivergentContinuousDiverges) {
  auto g = path(3);
  set_mixed(g, {{0, 0, 0}}, {{1.0, 2.0, 900.0}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0});
  std::vector<std::size_t> disc{0}, both{0, 1};
  EXPECT_FALSE(candidate_surprise(s, 1, disc).divergent());
  EXPECT_TRUE(candidate_surprise(s, 1, both).divergent());
}

// ---------------------------------------------------------------------------
// ExP.

TEST(ExtremalPoint, FarthestMeanDistanceRaw) {
  // S = {(0,0), (1,0)}; frontier 2 = (0.5,1) and 3 = (5,0).
  auto g = from_edges(4, {{0, 1}, {1, 2}, {1, 3}});
  set_mixed(g, {}, {{0.0, 1.0, 0.5, 5.0}, {0.0, 0.0, 1.0, 0.0}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0, 1});
  std::vector<std::size_t> cont{0, 1};
  const double far_mean = (5.0 + 4.0) / 2.0;
  const double near_mean = std::sqrt(0.25 + 1.0);
  EXPECT_NEAR(far_mean, 4.5, kTol);
  EXPECT_NEAR(near_mean, 1.118, 1e-3);
  EXPECT_EQ(exp_next(s, cont, false), 3u);
}

TEST(ExtremalPoint, SingleFrontierNode) {
  auto g = path(3);
  set_mixed(g, {}, {{0.0, 1.0, 2.0}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0, 1});
  std::vector<std::size_t> cont{0};
  EXPECT_EQ(exp_next(s, cont), 2u);
}

TEST(ExtremalPoint, DistinctPointBeatsDuplicate) {
  auto g = from_edges(4, {{0, 1}, {1, 2}, {1, 3}});
  set_mixed(g, {}, {{0.0, 1.0, 1.0, 1.5}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0, 1});
  std::vector<std::size_t> cont{0};
  EXPECT_EQ(exp_next(s, cont, false), 3u);
  EXPECT_EQ(exp_next(s, cont, true), 3u);
}

// ---------------------------------------------------------------------------
// I&M.

TEST(Mixture, CoinDecidesBetweenRules) {
  auto g = mixed_graph(40, 14);
  SymbolTable sym(g);
  std::vector<std::size_t> attrs{0};
  int heads = 0, tails = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    SampleState s(g, sym);
    s.extend(0);
    s.extend(g.neighbors(0)[0]);
    WalkerState w;
    w.reset(g.num_nodes(), 0);
    Rng rng(r), peek(r);
    const bool heads_up = ixm_coin(peek);
    NodeId v = ixm_next(s, w, rng, attrs, 100000);
    if (heads_up) {
      ++heads;
      EXPECT_EQ(v, ixs_next(s, attrs));
      EXPECT_EQ(w.steps, 0u);
    } else {
      ++tails;
      EXPECT_FALSE(s.in_sample(v));
      EXPECT_EQ(w.current, v);
      // Every move of the walk follows an edge or stays put.
      for (std::size_t i = 1; i < w.visits.size(); ++i)
        EXPECT_TRUE(w.visits[i] == w.visits[i - 1] || g.has_edge(w.visits[i - 1], w.visits[i]));
    }
  }
  EXPECT_GT(heads, 0);
  EXPECT_GT(tails, 0);
}

TEST(Mixture, CoinIsFair) {
  Rng rng(15);
  int heads = 0;
  for (int i = 0; i < 10000; ++i) heads += ixm_coin(rng);
  EXPECT_NEAR(heads / 10000.0, 0.5, 0.02);
}

// ---------------------------------------------------------------------------
// Pareto rules.

TEST(Pareto, DominatingCandidateIsSelected) {
  std::vector<SurpriseScore> info{SurpriseScore::finite(0.5), SurpriseScore::finite(2.0), SurpriseScore::finite(1.0)};
  std::vector<double> structure{1.0, 4.0, 3.0};
  EXPECT_EQ(pareto_choice(info, structure), 1u);
}

TEST(Pareto, EqualWeightNormalizedSum) {
  // (I, |delta|) = (2,1), (1,3), (0,0). Normalized: I -> 1, 0.5, 0;
  // |delta| -> 1/3, 1, 0. Sums over the non-dominated pair: 4/3 and 3/2.
  std::vector<SurpriseScore> info{SurpriseScore::finite(2.0), SurpriseScore::finite(1.0), SurpriseScore::finite(0.0)};
  std::vector<double> structure{1.0, 3.0, 0.0};
  const double first = 1.0 + 1.0 / 3.0, second = 0.5 + 1.0;
  EXPECT_GT(second, first);
  EXPECT_EQ(pareto_choice(info, structure), 1u);
}

TEST(Pareto, ExactTieGoesToLowerIndex) {
  std::vector<SurpriseScore> info{SurpriseScore::finite(1.0), SurpriseScore::finite(0.0)};
  std::vector<double> structure{0.0, 1.0};
  EXPECT_EQ(pareto_choice(info, structure), 0u);
}

TEST(Pareto, DivergentSurpriseNormalizesAboveFinite) {
  std::vector<SurpriseScore> info{SurpriseScore::finite(1.0), SurpriseScore::diverged(1), SurpriseScore::finite(0.0)};
  std::vector<double> structure{2.0, 1.0, 0.0};
  // I' = 1, 2, 0 -> 0.5, 1, 0; structure -> 1, 0.5, 0. Sums 1.5 and 1.5: tie.
  EXPECT_EQ(pareto_choice(info, structure), 0u);
}

TEST(Pareto, TransitionScoresOnRegularGraphAreUniform) {
  std::mt19937_64 rng(16);
  auto g = random_regular(40, 4, rng);
  SymbolTable sym(g);
  SampleState s(g, sym);
  s.extend(0);
  s.extend(g.neighbors(0)[0]);
  auto p = pim_transition_scores(s);
  for (double x : p) EXPECT_NEAR(x, 1.0 / static_cast<double>(p.size()), kTol);
}

TEST(Pareto, PimOnRegularGraphMatchesIxs) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = random_regular(40, 4, rng);
    std::vector<int> d(40);
    for (auto& x : d) x = std::uniform_int_distribution<int>(0, 3)(rng);
    set_discrete(g, {d});
    EXPECT_EQ(run_nodes(g, SamplerKind::pim, 0, 25), run_nodes(g, SamplerKind::ixs, 0, 25));
  }
}

// ---------------------------------------------------------------------------
// Prior-driven rules.

TEST(PriorSurprise, EmpiricalPriorMatchesIxs) {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = connected_random(30, 0.1, rng);
    std::vector<int> d(30);
    for (auto& x : d) x = std::uniform_int_distribution<int>(0, 3)(rng);
    set_discrete(g, {d});
    SymbolTable sym(g);
    SampleState s(g, sym);
    s.extend(0);
    std::vector<std::size_t> attrs{0};
    for (int step = 0; step < 15 && !s.frontier().empty(); ++step) {
      std::vector<EmpiricalDistribution> prior{s.distribution(0)};
      NodeId a = prior_surprise_next(s, prior, attrs);
      ASSERT_EQ(a, ixs_next(s, attrs));
      s.extend(a);
    }
  }
}

TEST(PriorSurprise, FixedPriorScores) {
  // Prior red .9, blue .1. Frontier 1 is all red, frontier 2 all blue.
  auto g = from_edges(5, {{0, 1}, {0, 2}, {1, 3}, {2, 4}});
  set_discrete(g, {{0, 0, 1, 0, 1}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0});
  std::vector<EmpiricalDistribution> prior{EmpiricalDistribution::from_probabilities({0.9, 0.1})};
  std::vector<std::size_t> attrs{0};
  std::vector<int> scratch;
  auto prob = [&](std::size_t a, int c) { return prior[a].probability(c); };
  EXPECT_NEAR(candidate_surprise(s, 2, attrs, prob, scratch).value, std::log(10.0), kTol);
  EXPECT_NEAR(candidate_surprise(s, 1, attrs, prob, scratch).value, std::log(10.0 / 9.0), kTol);
  EXPECT_EQ(prior_surprise_next(s, prior, attrs), 2u);
}

TEST(PriorSurprise, ValueMissingFromPriorDiverges) {
  auto g = path(3);
  set_discrete(g, {{0, 1, 2}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0});
  std::vector<EmpiricalDistribution> prior{EmpiricalDistribution::from_probabilities({0.5, 0.5, 0.0})};
  std::vector<std::size_t> attrs{0};
  std::vector<int> scratch;
  auto prob = [&](std::size_t a, int c) { return prior[a].probability(c); };
  EXPECT_TRUE(candidate_surprise(s, 1, attrs, prob, scratch).divergent());
}

TEST(PriorSurprise, ConfiguredLabelsOverrideEstimate) {
  auto g = path(6);
  set_discrete(g, {{0, 1, 0, 1, 0, 1}});
  SymbolTable sym(g);
  SamplerSpec spec = spec_of(SamplerKind::prior);
  spec.prior["a0"].by_label = {{"0", 0.2}, {"1", 0.8}};
  Sampler sampler(g, sym, spec);
  sampler.start(0, 3);
  ASSERT_EQ(sampler.prior().size(), 1u);
  EXPECT_NEAR(sampler.prior()[0].probability(0), 0.2, kTol);
  EXPECT_NEAR(sampler.prior()[0].probability(1), 0.8, kTol);
  spec.prior["a0"].by_label = {{"purple", 1.0}};
  Sampler bad(g, sym, spec);
  EXPECT_THROW(bad.start(0, 3), ConfigError);
}

TEST(PriorSurprise, EstimatedPriorDiscardsBurnIn) {
  // A walk confined to a 2-node component sees only those values.
  auto g = from_edges(4, {{0, 1}, {2, 3}});
  set_discrete(g, {{0, 1, 2, 2}});
  SymbolTable sym(g);
  Rng rng(19);
  auto prior = estimate_prior_mhrw(g, sym, 0, 50, rng);
  EXPECT_NEAR(prior[0].total, 50.0, kTol);
  EXPECT_EQ(prior[0].probability(2), 0.0);
}

TEST(VariableNeighborhood, MinimisesKsToPrior) {
  // Prior red .5, blue .5; S = {red}; frontier 1 red, 2 blue.
  auto g = from_edges(3, {{0, 1}, {0, 2}});
  set_discrete(g, {{0, 0, 1}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0});
  std::vector<EmpiricalDistribution> prior{EmpiricalDistribution::from_probabilities({0.5, 0.5})};
  std::vector<std::size_t> attrs{0};
  std::vector<double> with_red{2.0, 0.0}, with_blue{1.0, 1.0}, p{0.5, 0.5};
  EXPECT_NEAR(ks_counts(with_red, 2.0, p, 1.0), 0.5, kTol);
  EXPECT_NEAR(ks_counts(with_blue, 2.0, p, 1.0), 0.0, kTol);
  EXPECT_EQ(vns_next(s, prior, attrs), 2u);
}

TEST(VariableNeighborhood, EqualPerturbationTiesToSmallestId) {
  // S = {red, blue} matches the prior; adding either value moves KS by 1/6.
  auto g = from_edges(4, {{0, 1}, {1, 2}, {1, 3}});
  set_discrete(g, {{0, 1, 1, 0}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0, 1});
  std::vector<EmpiricalDistribution> prior{EmpiricalDistribution::from_probabilities({0.5, 0.5})};
  std::vector<std::size_t> attrs{0};
  EXPECT_EQ(vns_next(s, prior, attrs), 2u);
}

TEST(VariableNeighborhood, SingleCandidate) {
  auto g = path(2);
  set_discrete(g, {{0, 0}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0});
  std::vector<EmpiricalDistribution> prior{EmpiricalDistribution::from_probabilities({0.0, 1.0})};
  std::vector<std::size_t> attrs{0};
  EXPECT_EQ(vns_next(s, prior, attrs), 1u);
}

// ---------------------------------------------------------------------------
// CLUSTER.

TEST(ClusterAware, SingleClusterReducesToIxs) {
  std::mt19937_64 rng(20);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = connected_random(30, 0.1, rng);
    std::vector<int> d(30);
    std::vector<double> c(30);
    for (auto& x : d) x = std::uniform_int_distribution<int>(0, 3)(rng);
    for (auto& x : c) x = std::normal_distribution<double>(0.0, 1.0)(rng);
    set_mixed(g, {d}, {c});
    SymbolTable sym(g);
    SampleState s(g, sym);
    s.extend(0);
    std::vector<std::size_t> disc{0}, cont{1};
    Rng krng(trial);
    for (int step = 0; step < 15 && !s.frontier().empty(); ++step) {
      NodeId a = cluster_aware_next(s, 1, disc, cont, krng);
      ASSERT_EQ(a, ixs_next(s, disc));
      s.extend(a);
    }
  }
}

TEST(ClusterAware, SeenClusterScoresFinite) {
  // S = {0 at 0.0, 1 at 10.0} with k = 2; frontier 2 at 10.1 joins the
  // cluster of node 1, which S already holds.
  auto g = from_edges(3, {{0, 1}, {1, 2}});
  set_mixed(g, {}, {{0.0, 10.0, 10.1}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0, 1});
  std::vector<std::size_t> disc{}, cont{0};
  Rng rng(21);
  EXPECT_EQ(cluster_aware_next(s, 2, disc, cont, rng), 2u);
}

TEST(ClusterAware, FarBlobCandidateDivergesAndIsSelected) {
  // Blob one around 0 holds S = {0,1,2}; frontier 3 and 4 sit in blob one,
  // frontier 5 sits in blob two around 100.
  auto g = from_edges(6, {{0, 1}, {1, 2}, {2, 3}, {2, 4}, {2, 5}});
  set_mixed(g, {}, {{0.0, 0.1, -0.1, 0.05, -0.05, 100.0}, {0.0, 0.1, 0.0, -0.1, 0.05, 100.0}});
  SymbolTable sym(g);
  auto s = grown(g, sym, {0, 1, 2});
  std::vector<std::size_t> disc{}, cont{0, 1};
  Rng rng(22);
  EXPECT_EQ(cluster_aware_next(s, 2, disc, cont, rng), 5u);
}
