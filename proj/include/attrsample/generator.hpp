#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "attrsample/error.hpp"
#include "attrsample/graph.hpp"
#include "attrsample/metrics.hpp"
#include "json.hpp"

namespace attrsample {

enum class StructureModel { lfr, ba, ws };
enum class AssignmentMode { swap, propagation };

struct LfrParams {
  double mu = 0.1;
  double degree_exponent = 2.0;
  double community_exponent = 1.0;
  double average_degree = 20.0;
  std::size_t max_degree = 50;
  std::size_t min_community = 20;
  std::size_t max_community = 100;
};

struct SyntheticSpec {
  StructureModel structure = StructureModel::lfr;
  std::size_t n = 1000;
  LfrParams lfr;
  std::size_t ba_m = 2;
  std::size_t ws_k = 4;
  double ws_p = 0.1;
  std::size_t clusters = 5;
  double skew = 0.0;
  double purity = 10.0;
  double assortativity = 0.0;
  AssignmentMode mode = AssignmentMode::swap;
  std::size_t continuous = 2;
  std::size_t discrete = 1;
  /// Flip each discrete value to another label with probability 1/(1+purity).
  bool flip_noise = true;
  /// Throw instead of reporting when the assortativity target is missed.
  bool strict = false;
  std::uint64_t seed = 1;

  void validate() const {
    if (n < 1) throw ConfigError("n must be >= 1");
    if (clusters < 1 || clusters > n) throw ConfigError("need n >= clusters >= 1");
    if (structure == StructureModel::lfr) {
      if (!(lfr.mu > 0.0 && lfr.mu < 1.0)) throw ConfigError("mixing coefficient must lie in (0,1)");
      if (!(lfr.average_degree >= 1.0) || static_cast<double>(lfr.max_degree) < lfr.average_degree)
        throw ConfigError("need 1 <= average degree <= max degree");
      if (lfr.min_community < 2 || lfr.min_community > lfr.max_community)
        throw ConfigError("need 2 <= min community <= max community");
    }
    if (structure == StructureModel::ba && (ba_m < 1 || ba_m >= n)) throw ConfigError("BA needs 1 <= m < n");
    if (structure == StructureModel::ws && (ws_k < 2 || ws_k % 2 || ws_k >= n))
      throw ConfigError("WS ring degree must be even, >= 2 and < n");
    if (structure == StructureModel::ws && !(ws_p >= 0.0 && ws_p <= 1.0)) throw ConfigError("WS rewiring p must lie in [0,1]");
    if (!(skew >= 0.0 && skew < 1.0)) throw ConfigError("skew target must lie in [0,1)");
    if (!(purity > 0.0)) throw ConfigError("purity must be > 0");
    if (!(assortativity >= 0.0 && assortativity <= 1.0)) throw ConfigError("assortativity target must lie in [0,1]");
  }
};

inline void to_json(nlohmann::json& j, const SyntheticSpec& s) {
  const char* st = s.structure == StructureModel::lfr ? "LFR" : s.structure == StructureModel::ba ? "BA" : "WS";
  j = {{"structure", st},
       {"n", s.n},
       {"lfr",
        {{"mu", s.lfr.mu},
         {"degree_exponent", s.lfr.degree_exponent},
         {"community_exponent", s.lfr.community_exponent},
         {"average_degree", s.lfr.average_degree},
         {"max_degree", s.lfr.max_degree},
         {"min_community", s.lfr.min_community},
         {"max_community", s.lfr.max_community}}},
       {"ba", {{"m", s.ba_m}}},
       {"ws", {{"k", s.ws_k}, {"p", s.ws_p}}},
       {"clusters", s.clusters},
       {"skew", s.skew},
       {"purity", s.purity},
       {"assortativity", s.assortativity},
       {"mode", s.mode == AssignmentMode::swap ? "swap" : "propagation"},
       {"layout", {{"continuous", s.continuous}, {"discrete", s.discrete}}},
       {"flip_noise", s.flip_noise},
       {"strict", s.strict},
       {"seed", s.seed}};
}

inline void from_json(const nlohmann::json& j, SyntheticSpec& s) {
  s = SyntheticSpec{};
  for (const auto& [key, val] : j.items()) {
    if (key == "structure") {
      std::string v = val.get<std::string>();
      std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::toupper(c); });
      if (v == "LFR") s.structure = StructureModel::lfr;
      else if (v == "BA") s.structure = StructureModel::ba;
      else if (v == "WS") s.structure = StructureModel::ws;
      else throw ConfigError("unknown structure model '" + v + "'");
    } else if (key == "n") s.n = val.get<std::size_t>();
    else if (key == "lfr") {
      s.lfr.mu = val.value("mu", s.lfr.mu);
      s.lfr.degree_exponent = val.value("degree_exponent", s.lfr.degree_exponent);
      s.lfr.community_exponent = val.value("community_exponent", s.lfr.community_exponent);
      s.lfr.average_degree = val.value("average_degree", s.lfr.average_degree);
      s.lfr.max_degree = val.value("max_degree", s.lfr.max_degree);
      s.lfr.min_community = val.value("min_community", s.lfr.min_community);
      s.lfr.max_community = val.value("max_community", s.lfr.max_community);
    } else if (key == "ba") s.ba_m = val.value("m", s.ba_m);
    else if (key == "ws") {
      s.ws_k = val.value("k", s.ws_k);
      s.ws_p = val.value("p", s.ws_p);
    } else if (key == "clusters" || key == "k") s.clusters = val.get<std::size_t>();
    else if (key == "skew") s.skew = val.get<double>();
    else if (key == "purity") s.purity = val.get<double>();
    else if (key == "assortativity") s.assortativity = val.get<double>();
    else if (key == "mode") {
      auto m = val.get<std::string>();
      if (m == "swap") s.mode = AssignmentMode::swap;
      else if (m == "propagation") s.mode = AssignmentMode::propagation;
      else throw ConfigError("unknown assignment mode '" + m + "'");
    } else if (key == "layout") {
      s.continuous = val.value("continuous", s.continuous);
      s.discrete = val.value("discrete", s.discrete);
    } else if (key == "flip_noise") s.flip_noise = val.get<bool>();
    else if (key == "strict") s.strict = val.get<bool>();
    else if (key == "seed") s.seed = val.get<std::uint64_t>();
    else throw ConfigError("unknown generator field '" + key + "'");
  }
  s.validate();
}

/// Graph structure plus the planted community of every node (LFR only;
/// empty for other models).
struct Structure {
  AttributedGraph graph;
  std::vector<int> communities;
};

namespace detail {

inline std::uint64_t edge_key(NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

/// Continuous power law on [lo, hi] with density ∝ x^-tau, inverse-CDF draw.
template <class Rng>
double power_law_draw(double lo, double hi, double tau, Rng& rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (std::abs(tau - 1.0) < 1e-12) return lo * std::pow(hi / lo, u);
  const double e = 1.0 - tau;
  return std::pow(std::pow(lo, e) + u * (std::pow(hi, e) - std::pow(lo, e)), 1.0 / e);
}

inline double power_law_mean(double lo, double hi, double tau) {
  if (hi <= lo) return lo;
  if (std::abs(tau - 1.0) < 1e-12) return (hi - lo) / std::log(hi / lo);
  if (std::abs(tau - 2.0) < 1e-12) return std::log(hi / lo) / (1.0 / lo - 1.0 / hi);
  return ((1.0 - tau) / (2.0 - tau)) * (std::pow(hi, 2.0 - tau) - std::pow(lo, 2.0 - tau)) /
         (std::pow(hi, 1.0 - tau) - std::pow(lo, 1.0 - tau));
}

/// Pairs stubs at random and adds the accepted pairs to `edges`. Rejected
/// pairs (self-loops, duplicates, or failing `ok`) are repaired by rewiring
/// against a random accepted pair; unrepairable stubs are dropped.
template <class Rng, class Ok>
void pair_stubs(std::vector<NodeId> stubs, Rng& rng, Ok&& ok, std::unordered_set<std::uint64_t>& present,
                std::vector<std::pair<NodeId, NodeId>>& edges) {
  std::shuffle(stubs.begin(), stubs.end(), rng);
  auto valid = [&](NodeId a, NodeId b) { return a != b && ok(a, b) && !present.count(edge_key(a, b)); };
  std::vector<std::size_t> mine;
  std::vector<std::pair<NodeId, NodeId>> bad;
  for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
    NodeId a = stubs[i], b = stubs[i + 1];
    if (valid(a, b)) {
      present.insert(edge_key(a, b));
      mine.push_back(edges.size());
      edges.emplace_back(a, b);
    } else {
      bad.emplace_back(a, b);
    }
  }
  for (auto [a, b] : bad) {
    for (int attempt = 0; attempt < 50 && !mine.empty(); ++attempt) {
      std::size_t pick = mine[std::uniform_int_distribution<std::size_t>(0, mine.size() - 1)(rng)];
      auto [c, d] = edges[pick];
      if (std::bernoulli_distribution(0.5)(rng)) std::swap(c, d);
      if (!valid(a, c) || !valid(b, d) || edge_key(a, c) == edge_key(b, d)) continue;
      present.erase(edge_key(c, d));
      present.insert(edge_key(a, c));
      present.insert(edge_key(b, d));
      edges[pick] = {a, c};
      mine.push_back(edges.size());
      edges.emplace_back(b, d);
      break;
    }
  }
}

/// Integer part plus a Bernoulli draw on the fractional part.
template <class Rng>
std::size_t stochastic_round(double x, Rng& rng) {
  double f = std::floor(x);
  return static_cast<std::size_t>(f) + (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < x - f ? 1 : 0);
}

}  // namespace detail

/// LFR-style benchmark: power-law degrees and community sizes, a fraction
/// ≈ mu of every node's edges leaving its community.
template <class Rng>
Structure generate_lfr(std::size_t n, const LfrParams& p, Rng& rng) {
  const double kmax = static_cast<double>(p.max_degree);
  double lo = 1.0, hi = kmax;
  if (detail::power_law_mean(lo, kmax, p.degree_exponent) > p.average_degree)
    throw ConfigError("average degree too small for the degree exponent");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (detail::power_law_mean(mid, kmax, p.degree_exponent) < p.average_degree ? lo : hi) = mid;
  }
  const double kmin = 0.5 * (lo + hi);
  std::vector<std::size_t> degree(n);
  for (auto& d : degree)
    d = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(detail::power_law_draw(kmin, kmax, p.degree_exponent, rng))),
                                1, std::min(p.max_degree, n - 1));

  std::vector<std::size_t> sizes;
  std::size_t total = 0;
  const std::size_t cmin = std::min(p.min_community, n), cmax = std::min(p.max_community, n);
  while (total < n) {
    auto s = static_cast<std::size_t>(std::lround(detail::power_law_draw(
        static_cast<double>(cmin), static_cast<double>(cmax) + 0.999, p.community_exponent, rng)));
    s = std::clamp(s, cmin, cmax);
    sizes.push_back(s);
    total += s;
  }
  if (total > n) {
    std::size_t excess = total - n;
    if (sizes.back() > excess && sizes.back() - excess >= cmin) {
      sizes.back() -= excess;
    } else {
      std::size_t deficit = n - (total - sizes.back());
      sizes.pop_back();
      for (std::size_t i = 0; deficit > 0; i = (i + 1) % sizes.size()) {
        if (sizes.empty()) {
          sizes.push_back(deficit);
          break;
        }
        ++sizes[i];
        --deficit;
      }
    }
  }

  // Internal degrees; high internal degree nodes are placed first so that
  // large communities remain available to them.
  std::vector<std::size_t> internal(n);
  for (std::size_t v = 0; v < n; ++v) internal[v] = detail::stochastic_round((1.0 - p.mu) * static_cast<double>(degree[v]), rng);
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return internal[a] > internal[b]; });
  std::vector<std::size_t> room = sizes;
  std::vector<int> community(n, -1);
  std::vector<std::vector<NodeId>> members(sizes.size());
  for (NodeId v : order) {
    std::vector<std::size_t> fit;
    double weight = 0.0;
    for (std::size_t c = 0; c < sizes.size(); ++c)
      if (room[c] > 0 && sizes[c] > internal[v]) fit.push_back(c);
    std::size_t chosen;
    if (fit.empty()) {
      chosen = sizes.size();
      for (std::size_t c = 0; c < sizes.size(); ++c)
        if (room[c] > 0 && (chosen == sizes.size() || sizes[c] > sizes[chosen])) chosen = c;
      internal[v] = std::min(internal[v], sizes[chosen] - 1);
    } else {
      for (auto c : fit) weight += static_cast<double>(room[c]);
      double r = std::uniform_real_distribution<double>(0.0, weight)(rng);
      chosen = fit.back();
      for (auto c : fit) {
        r -= static_cast<double>(room[c]);
        if (r < 0.0) {
          chosen = c;
          break;
        }
      }
    }
    --room[chosen];
    community[v] = static_cast<int>(chosen);
    members[chosen].push_back(v);
  }

  std::unordered_set<std::uint64_t> present;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (const auto& mem : members) {
    std::vector<NodeId> stubs;
    for (NodeId v : mem)
      for (std::size_t i = 0; i < internal[v]; ++i) stubs.push_back(v);
    if (stubs.size() % 2) {
      NodeId v = mem[std::uniform_int_distribution<std::size_t>(0, mem.size() - 1)(rng)];
      if (internal[v] > 0) {
        --internal[v];
        stubs.erase(std::find(stubs.begin(), stubs.end(), v));
      } else {
        ++internal[v];
        stubs.push_back(v);
      }
    }
    detail::pair_stubs(std::move(stubs), rng, [](NodeId, NodeId) { return true; }, present, edges);
  }
  std::vector<NodeId> ext;
  for (NodeId v = 0; v < n; ++v)
    for (std::size_t i = internal[v]; i < degree[v]; ++i) ext.push_back(v);
  if (ext.size() % 2) ext.pop_back();
  detail::pair_stubs(std::move(ext), rng, [&](NodeId a, NodeId b) { return community[a] != community[b]; }, present,
                     edges);

  AttributedGraph g = AttributedGraph::from_edges(n, edges);
  std::vector<int> truth(community.begin(), community.end());
  g.set_ground_truth(truth);
  g = largest_connected_component(g);
  Structure s;
  s.communities = *g.ground_truth();
  s.graph = std::move(g);
  return s;
}

/// Preferential attachment from an m-node seed clique; each new node
/// attaches to m distinct existing nodes.
template <class Rng>
AttributedGraph generate_ba(std::size_t n, std::size_t m, Rng& rng) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<NodeId> ends;
  for (NodeId u = 0; u < m; ++u)
    for (NodeId v = u + 1; v < m; ++v) {
      edges.emplace_back(u, v);
      ends.push_back(u);
      ends.push_back(v);
    }
  if (ends.empty())
    for (NodeId u = 0; u < m; ++u) ends.push_back(u);
  for (NodeId v = static_cast<NodeId>(m); v < n; ++v) {
    std::vector<NodeId> targets;
    while (targets.size() < std::min<std::size_t>(m, v)) {
      NodeId t = ends[std::uniform_int_distribution<std::size_t>(0, ends.size() - 1)(rng)];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (NodeId t : targets) {
      edges.emplace_back(v, t);
      ends.push_back(v);
      ends.push_back(t);
    }
  }
  return AttributedGraph::from_edges(n, edges);
}

/// Ring lattice with k neighbours per node; each edge is rewired at its far
/// end with probability p to a uniformly chosen node, avoiding duplicates.
template <class Rng>
AttributedGraph generate_ws(std::size_t n, std::size_t k, double p, Rng& rng) {
  std::unordered_set<std::uint64_t> present;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < n; ++u)
    for (std::size_t j = 1; j <= k / 2; ++j) {
      NodeId v = static_cast<NodeId>((u + j) % n);
      edges.emplace_back(u, v);
      present.insert(detail::edge_key(u, v));
    }
  if (p > 0.0)
    for (auto& e : edges) {
      if (!std::bernoulli_distribution(p)(rng)) continue;
      for (int attempt = 0; attempt < 20; ++attempt) {
        NodeId w = std::uniform_int_distribution<NodeId>(0, static_cast<NodeId>(n - 1))(rng);
        if (w == e.first || present.count(detail::edge_key(e.first, w))) continue;
        present.erase(detail::edge_key(e.first, e.second));
        present.insert(detail::edge_key(e.first, w));
        e.second = w;
        break;
      }
    }
  return AttributedGraph::from_edges(n, edges);
}

template <class Rng>
Structure generate_structure(const SyntheticSpec& spec, Rng& rng) {
  spec.validate();
  switch (spec.structure) {
    case StructureModel::lfr: return generate_lfr(spec.n, spec.lfr, rng);
    case StructureModel::ba: return {largest_connected_component(generate_ba(spec.n, spec.ba_m, rng)), {}};
    case StructureModel::ws: return {largest_connected_component(generate_ws(spec.n, spec.ws_k, spec.ws_p, rng)), {}};
  }
  throw ContractError("unknown structure model");
}

/// Asynchronous label propagation; communities numbered by first appearance
/// in node order.
template <class Rng>
std::vector<int> label_propagation(const AttributedGraph& g, Rng& rng, std::size_t max_sweeps = 100) {
  const std::size_t n = g.num_nodes();
  std::vector<int> label(n);
  std::iota(label.begin(), label.end(), 0);
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::vector<int> count(n, 0);
  std::vector<int> best;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    std::shuffle(order.begin(), order.end(), rng);
    bool changed = false;
    for (NodeId v : order) {
      auto nb = g.neighbors(v);
      if (nb.empty()) continue;
      int top = 0;
      for (NodeId w : nb) top = std::max(top, ++count[label[w]]);
      best.clear();
      for (NodeId w : nb)
        if (count[label[w]] == top && std::find(best.begin(), best.end(), label[w]) == best.end()) best.push_back(label[w]);
      for (NodeId w : nb) count[label[w]] = 0;
      if (std::find(best.begin(), best.end(), label[v]) != best.end()) continue;
      label[v] = best[std::uniform_int_distribution<std::size_t>(0, best.size() - 1)(rng)];
      changed = true;
    }
    if (!changed) break;
  }
  std::vector<int> remap(n, -1);
  int next = 0;
  for (NodeId v = 0; v < n; ++v) {
    if (remap[label[v]] < 0) remap[label[v]] = next++;
    label[v] = remap[label[v]];
  }
  return label;
}

/// Integer cluster sizes summing to n from a geometric profile r^i, with r
/// found by bisection so that the skew lands within ±0.01 of the target.
inline std::vector<std::size_t> cluster_sizes(std::size_t n, std::size_t k, double target) {
  if (k < 1 || n < k) throw ConfigError("cluster sizes need n >= k >= 1");
  if (!(target >= 0.0 && target < 1.0)) throw ConfigError("skew target must lie in [0,1)");
  if (k == 1) {
    if (target > 0.01) throw ConfigError("a single cluster has skew 0");
    return {n};
  }
  auto sizes_for = [&](double r) {
    std::vector<double> w(k);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += (w[i] = std::pow(r, static_cast<double>(i)));
    const std::size_t spare = n - k;
    std::vector<std::size_t> s(k, 1);
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t used = 0;
    for (std::size_t i = 0; i < k; ++i) {
      double exact = static_cast<double>(spare) * w[i] / total;
      auto f = static_cast<std::size_t>(std::floor(exact));
      s[i] += f;
      used += f;
      rem.emplace_back(exact - static_cast<double>(f), i);
    }
    std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (std::size_t j = 0; used < spare; ++j, ++used) ++s[rem[j].second];
    return s;
  };
  double lo = 1e-9, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (skew(sizes_for(mid)) > target ? lo : hi) = mid;
  }
  auto a = sizes_for(lo), b = sizes_for(hi);
  auto best = std::abs(skew(a) - target) <= std::abs(skew(b) - target) ? a : b;
  if (std::abs(skew(best) - target) > 0.01)
    throw ConfigError("skew target " + std::to_string(target) + " is unreachable with n=" + std::to_string(n) +
                      ", k=" + std::to_string(k));
  return best;
}

/// Incrementally maintained categorical assortativity of a labelling.
class AssortativityTracker {
 public:
  AssortativityTracker(const AttributedGraph& g, std::vector<int> labels, std::size_t k)
      : g_(&g), labels_(std::move(labels)), degree_sum_(k, 0.0) {
    g.for_each_edge([&](NodeId u, NodeId v) {
      m_ += 1.0;
      same_ += labels_[u] == labels_[v];
    });
    for (NodeId v = 0; v < g.num_nodes(); ++v) degree_sum_[labels_[v]] += static_cast<double>(g.degree(v));
  }

  double value() const {
    if (m_ == 0.0) return 0.0;
    double ab = 0.0;
    for (double d : degree_sum_) ab += (d / (2.0 * m_)) * (d / (2.0 * m_));
    if (!(1.0 - ab > 1e-15)) return 0.0;
    return (same_ / m_ - ab) / (1.0 - ab);
  }

  const std::vector<int>& labels() const noexcept { return labels_; }

  /// Exchanges the labels of u and v.
  void swap(NodeId u, NodeId v) {
    const int a = labels_[u], b = labels_[v];
    if (a == b) return;
    same_ += gain(u, a, b, v) + gain(v, b, a, u);
    const double du = static_cast<double>(g_->degree(u)), dv = static_cast<double>(g_->degree(v));
    degree_sum_[a] += dv - du;
    degree_sum_[b] += du - dv;
    labels_[u] = b;
    labels_[v] = a;
  }

 private:
  // Change in same-label edges at x when its label moves from `from` to `to`,
  // ignoring the edge to `other`.
  double gain(NodeId x, int from, int to, NodeId other) const {
    double d = 0.0;
    for (NodeId w : g_->neighbors(x)) {
      if (w == other) continue;
      d += (labels_[w] == to) - (labels_[w] == from);
    }
    return d;
  }

  const AttributedGraph* g_;
  std::vector<int> labels_;
  std::vector<double> degree_sum_;
  double m_ = 0.0;
  double same_ = 0.0;
};

struct AssignmentResult {
  std::vector<int> labels;
  double achieved = 0.0;
  bool converged = false;
};

namespace detail {

/// Community-aligned labelling: nodes ordered by (community, id) are cut
/// into consecutive label blocks of the requested sizes.
inline std::vector<int> block_labels(std::span<const int> community, std::span<const std::size_t> sizes) {
  std::vector<NodeId> order(community.size());
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return community[a] < community[b]; });
  std::vector<int> labels(community.size());
  std::size_t pos = 0;
  for (std::size_t c = 0; c < sizes.size(); ++c)
    for (std::size_t i = 0; i < sizes[c]; ++i) labels[order[pos++]] = static_cast<int>(c);
  return labels;
}

/// Greedy capacity-respecting colouring: high-degree nodes first, each takes
/// the label with spare capacity shared by the fewest coloured neighbours.
inline std::vector<int> coloring_labels(const AttributedGraph& g, std::span<const std::size_t> sizes) {
  const std::size_t n = g.num_nodes(), k = sizes.size();
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return g.degree(a) > g.degree(b); });
  std::vector<std::size_t> room(sizes.begin(), sizes.end());
  std::vector<int> labels(n, -1);
  std::vector<std::size_t> clash(k);
  for (NodeId v : order) {
    std::fill(clash.begin(), clash.end(), 0);
    for (NodeId w : g.neighbors(v))
      if (labels[w] >= 0) ++clash[labels[w]];
    int best = -1;
    for (std::size_t c = 0; c < k; ++c) {
      if (room[c] == 0) continue;
      if (best < 0 || clash[c] < clash[best] || (clash[c] == clash[best] && room[c] > room[best])) best = static_cast<int>(c);
    }
    labels[v] = best;
    --room[best];
  }
  return labels;
}

}  // namespace detail

/// Assigns cluster labels of the given sizes so that categorical
/// assortativity approaches `target`.
///
/// Swap mode starts from a community-aligned labelling (target >= 0.5) or a
/// greedy colouring (target < 0.5); random label swaps then lower the
/// assortativity, and improving swaps along mixed edges raise it, until it
/// is within `tolerance` of the target or 50·|E| swaps were tried. The best
/// labelling seen is returned together with its assortativity.
template <class Rng>
AssignmentResult assign_with_assortativity(const AttributedGraph& g, std::span<const std::size_t> sizes, double target,
                                           Rng& rng, AssignmentMode mode = AssignmentMode::swap,
                                           std::span<const int> communities = {}, double tolerance = 0.02) {
  const std::size_t n = g.num_nodes(), k = sizes.size();
  if (std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) != n) throw ContractError("cluster sizes must sum to n");
  if (!(target >= 0.0 && target <= 1.0)) throw ConfigError("assortativity target must lie in [0,1]");
  const std::size_t budget = std::max<std::size_t>(50 * g.num_edges(), 1000);

  if (mode == AssignmentMode::propagation) {
    // Shuffled size-respecting start; with probability `target` a node takes
    // a random neighbour's label by swapping with a holder of that label.
    std::vector<int> init(n);
    std::size_t pos = 0;
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t i = 0; i < sizes[c]; ++i) init[pos++] = static_cast<int>(c);
    std::shuffle(init.begin(), init.end(), rng);
    AssortativityTracker t(g, init, k);
    for (std::size_t it = 0; it < budget && t.value() < target - tolerance; ++it) {
      NodeId v = std::uniform_int_distribution<NodeId>(0, static_cast<NodeId>(n - 1))(rng);
      if (g.degree(v) == 0 || !std::bernoulli_distribution(target)(rng)) continue;
      auto nb = g.neighbors(v);
      int want = t.labels()[nb[std::uniform_int_distribution<std::size_t>(0, nb.size() - 1)(rng)]];
      if (want == t.labels()[v]) continue;
      for (int attempt = 0; attempt < 8; ++attempt) {
        NodeId u = std::uniform_int_distribution<NodeId>(0, static_cast<NodeId>(n - 1))(rng);
        if (t.labels()[u] != want) continue;
        double before = t.value();
        t.swap(u, v);
        if (t.value() < before) t.swap(u, v);
        break;
      }
    }
    AssignmentResult r{t.labels(), categorical_assortativity(g, t.labels()), false};
    r.converged = std::abs(r.achieved - target) <= 0.05;
    return r;
  }

  std::vector<int> init;
  if (target >= 0.5) {
    std::vector<int> comm;
    if (communities.size() == n)
      comm.assign(communities.begin(), communities.end());
    else
      comm = label_propagation(g, rng);
    init = detail::block_labels(comm, sizes);
  } else {
    init = detail::coloring_labels(g, sizes);
  }
  AssortativityTracker t(g, std::move(init), k);
  std::vector<int> best = t.labels();
  double best_gap = std::abs(t.value() - target);
  auto random_node = [&] { return std::uniform_int_distribution<NodeId>(0, static_cast<NodeId>(n - 1))(rng); };
  for (std::size_t it = 0; it < budget && best_gap > tolerance; ++it) {
    const double r = t.value();
    if (r > target) {
      NodeId u = random_node(), v = random_node();
      t.swap(u, v);
    } else {
      // Exchange two boundary nodes: x (label a) next to label b, and y
      // (label b) next to label a.
      NodeId x = random_node();
      auto nx = g.neighbors(x);
      if (nx.empty()) continue;
      const int a = t.labels()[x];
      const int b = t.labels()[nx[std::uniform_int_distribution<std::size_t>(0, nx.size() - 1)(rng)]];
      if (a == b) continue;
      for (int attempt = 0; attempt < 64; ++attempt) {
        NodeId y = random_node();
        if (t.labels()[y] != b) continue;
        auto ny = g.neighbors(y);
        if (ny.empty() || t.labels()[ny[std::uniform_int_distribution<std::size_t>(0, ny.size() - 1)(rng)]] != a) continue;
        t.swap(x, y);
        if (t.value() < r) t.swap(x, y);
        break;
      }
    }
    const double gap = std::abs(t.value() - target);
    if (gap < best_gap) {
      best_gap = gap;
      best = t.labels();
    }
  }
  AssignmentResult res{best, categorical_assortativity(g, best), false};
  res.converged = std::abs(res.achieved - target) <= 0.05;
  return res;
}

struct AttributeLayout {
  std::size_t continuous = 2;
  std::size_t discrete = 1;
};

/// Unit-spaced lattice coordinates of cluster `c` in `dims` dimensions.
inline std::vector<double> lattice_center(std::size_t c, std::size_t k, std::size_t dims) {
  std::vector<double> x(dims, 0.0);
  if (dims == 0) return x;
  auto side = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(k), 1.0 / static_cast<double>(dims)) - 1e-9));
  side = std::max<std::size_t>(side, 1);
  for (std::size_t d = 0; d < dims; ++d) {
    x[d] = static_cast<double>(c % side);
    c /= side;
  }
  return x;
}

/// Continuous attributes f0.. ~ Gaussian(lattice centre, 1/purity) and
/// discrete attributes label0.. = cluster id, redrawn uniformly over all k
/// labels with probability 1/(1+purity) when `flip_noise` is set. Redrawing
/// (rather than forcing a different label) keeps the label at least as
/// informative as chance for every purity.
template <class Rng>
void synthesize_attributes(AttributedGraph& g, std::span<const int> clusters, std::size_t k, double purity,
                           AttributeLayout layout, bool flip_noise, Rng& rng) {
  const std::size_t n = g.num_nodes();
  if (clusters.size() != n) throw ContractError("one cluster id per node required");
  const double sigma = std::isinf(purity) ? 0.0 : 1.0 / purity;
  AttributeSchema schema;
  std::vector<std::vector<double>> cols;
  std::vector<std::vector<double>> centers(k);
  for (std::size_t c = 0; c < k; ++c) centers[c] = lattice_center(c, k, layout.continuous);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t d = 0; d < layout.continuous; ++d) {
    schema.add({"f" + std::to_string(d), AttributeKind::continuous, {}, 0.0, 0.0});
    std::vector<double> col(n);
    for (NodeId v = 0; v < n; ++v) col[v] = centers[clusters[v]][d] + sigma * noise(rng);
    cols.push_back(std::move(col));
  }
  const double flip = flip_noise && k > 1 ? 1.0 / (1.0 + purity) : 0.0;
  std::vector<std::string> cats;
  for (std::size_t c = 0; c < k; ++c) cats.push_back(std::to_string(c));
  for (std::size_t d = 0; d < layout.discrete; ++d) {
    schema.add({layout.discrete == 1 ? "label" : "label" + std::to_string(d), AttributeKind::discrete, cats, 0.0, 0.0});
    std::vector<double> col(n);
    for (NodeId v = 0; v < n; ++v) {
      int c = clusters[v];
      if (flip > 0.0 && std::bernoulli_distribution(flip)(rng))
        c = std::uniform_int_distribution<int>(0, static_cast<int>(k) - 1)(rng);
      col[v] = c;
    }
    cols.push_back(std::move(col));
  }
  AttributedGraph::refresh_continuous_ranges(schema, cols);
  g.set_attributes(std::move(schema), std::move(cols));
  g.set_ground_truth(std::vector<int>(clusters.begin(), clusters.end()));
}

struct GeneratorTargets {
  double skew = 0.0;
  double assortativity = 0.0;
  /// Cross-community edge fraction; NaN for models without planted communities.
  double mixing = std::numeric_limits<double>::quiet_NaN();
  bool assortativity_converged = false;
};

inline void to_json(nlohmann::json& j, const GeneratorTargets& t) {
  j = {{"skew", t.skew},
       {"assortativity", t.assortativity},
       {"mixing", std::isnan(t.mixing) ? nlohmann::json(nullptr) : nlohmann::json(t.mixing)},
       {"assortativity_converged", t.assortativity_converged}};
}

struct GeneratedNetwork {
  AttributedGraph graph;
  std::vector<int> communities;
  std::vector<std::size_t> sizes;
  GeneratorTargets achieved;
};

/// Structure, cluster sizes, label assignment and attributes; deterministic
/// given `spec.seed`.
inline GeneratedNetwork generate(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  Structure st = generate_structure(spec, rng);
  GeneratedNetwork out;
  out.graph = std::move(st.graph);
  out.communities = std::move(st.communities);
  const std::size_t n = out.graph.num_nodes();
  if (n < spec.clusters) throw RunError("generated component is smaller than the cluster count");
  out.sizes = cluster_sizes(n, spec.clusters, spec.skew);
  auto assign = assign_with_assortativity(out.graph, out.sizes, spec.assortativity, rng, spec.mode, out.communities);
  if (spec.strict && !assign.converged)
    throw RunError("assortativity target " + std::to_string(spec.assortativity) + " not reached; achieved " +
                   std::to_string(assign.achieved));
  synthesize_attributes(out.graph, assign.labels, spec.clusters, spec.purity, {spec.continuous, spec.discrete},
                        spec.flip_noise, rng);
  out.achieved.skew = skew(out.sizes);
  out.achieved.assortativity = assign.achieved;
  out.achieved.assortativity_converged = assign.converged;
  if (!out.communities.empty()) out.achieved.mixing = mixing_fraction(out.graph, out.communities);
  return out;
}

}  // namespace attrsample
