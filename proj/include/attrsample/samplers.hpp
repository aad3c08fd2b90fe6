#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attrsample/error.hpp"
#include "attrsample/graph.hpp"
#include "attrsample/kmeans.hpp"
#include "attrsample/sample_state.hpp"
#include "attrsample/surprise.hpp"
#include "json.hpp"

namespace attrsample {

using Rng = std::mt19937_64;

enum class SamplerKind { uni, bfs, ff, rw, mhrw, xs, bal, ixs, exp, hixs, ixm, pix, pim, prior, vns, cluster };

inline constexpr SamplerKind kAllSamplerKinds[] = {
    SamplerKind::uni,  SamplerKind::bfs, SamplerKind::ff,  SamplerKind::rw,    SamplerKind::mhrw, SamplerKind::xs,
    SamplerKind::bal,  SamplerKind::ixs, SamplerKind::exp, SamplerKind::hixs,  SamplerKind::ixm,  SamplerKind::pix,
    SamplerKind::pim,  SamplerKind::prior, SamplerKind::vns, SamplerKind::cluster};

inline std::string_view to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::uni: return "UNI";
    case SamplerKind::bfs: return "BFS";
    case SamplerKind::ff: return "FF";
    case SamplerKind::rw: return "RW";
    case SamplerKind::mhrw: return "MHRW";
    case SamplerKind::xs: return "XS";
    case SamplerKind::bal: return "BAL";
    case SamplerKind::ixs: return "IXS";
    case SamplerKind::exp: return "ExP";
    case SamplerKind::hixs: return "H-IXS";
    case SamplerKind::ixm: return "I&M";
    case SamplerKind::pix: return "pIX";
    case SamplerKind::pim: return "pIM";
    case SamplerKind::prior: return "PRIOR";
    case SamplerKind::vns: return "VNS";
    case SamplerKind::cluster: return "CLUSTER";
  }
  return "?";
}

/// Case-insensitive; punctuation is ignored ("h-ixs", "HIXS", "i&m", "ixm").
inline SamplerKind parse_sampler_kind(std::string_view name) {
  auto canon = [](std::string_view s) {
    std::string out;
    for (char c : s)
      if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    return out;
  };
  const std::string key = canon(name);
  for (SamplerKind k : kAllSamplerKinds)
    if (canon(to_string(k)) == key) return k;
  if (key == "IXM" || key == "IM") return SamplerKind::ixm;
  if (key == "SNOWBALL") return SamplerKind::bfs;
  if (key == "FORESTFIRE") return SamplerKind::ff;
  throw ConfigError("unknown sampler kind '" + std::string(name) + "'");
}

inline bool is_link_trace(SamplerKind k) noexcept { return k != SamplerKind::uni; }

/// Fixed attribute distribution supplied for PRIOR / VNS. Each entry is
/// either a probability vector indexed by symbol (category id or bin) or a
/// map from category label to probability.
struct PriorEntry {
  std::vector<double> by_symbol;
  std::map<std::string, double> by_label;
};

struct SamplerSpec {
  SamplerKind kind = SamplerKind::uni;
  /// Forest Fire burning probability.
  double burn_probability = 0.7;
  /// Content cluster count for CLUSTER.
  std::size_t clusters = 5;
  DeltaRule delta_rule = DeltaRule::excl_sample;
  std::uint64_t rng_seed = 0;
  /// MHRW burn-in used to estimate a prior when none is given; 0 means 10*z.
  std::size_t burn_in = 0;
  /// ExP: z-score continuous attributes with running sample statistics.
  bool standardize = true;
  /// MHRW: experimental surprise-weighted transition probabilities.
  bool surprise_weighted = false;
  BinningKind binning = BinningKind::log;
  std::size_t bins = 10;
  std::map<std::string, PriorEntry> prior;

  void validate() const {
    if (!(burn_probability > 0.0 && burn_probability < 1.0)) throw ConfigError("burn probability must lie in (0,1)");
    if (clusters < 1) throw ConfigError("cluster count must be >= 1");
    if (bins < 1) throw ConfigError("bin count must be >= 1");
    for (const auto& [name, e] : prior) {
      double s = 0.0;
      for (double p : e.by_symbol) {
        if (p < 0.0) throw ConfigError("negative prior probability for '" + name + "'");
        s += p;
      }
      for (const auto& [l, p] : e.by_label) {
        if (p < 0.0) throw ConfigError("negative prior probability for '" + name + "'");
        s += p;
      }
      if (std::abs(s - 1.0) > 1e-6) throw ConfigError("prior for '" + name + "' must sum to 1");
    }
  }
};

inline std::string to_string(DeltaRule r) {
  return r == DeltaRule::excl_sample ? "excl_sample" : "excl_sample_and_frontier";
}

inline void to_json(nlohmann::json& j, const SamplerSpec& s) {
  nlohmann::json params = {{"burn_probability", s.burn_probability},
                           {"clusters", s.clusters},
                           {"delta_rule", to_string(s.delta_rule)},
                           {"burn_in", s.burn_in},
                           {"standardize", s.standardize},
                           {"surprise_weighted", s.surprise_weighted},
                           {"binning", s.binning == BinningKind::log ? "log" : "linear"},
                           {"bins", s.bins}};
  if (!s.prior.empty()) {
    nlohmann::json pj = nlohmann::json::object();
    for (const auto& [name, e] : s.prior) {
      if (!e.by_label.empty())
        pj[name] = e.by_label;
      else
        pj[name] = e.by_symbol;
    }
    params["prior"] = pj;
  }
  j = {{"kind", std::string(to_string(s.kind))}, {"params", params}, {"rng_seed", s.rng_seed}};
}

inline void from_json(const nlohmann::json& j, SamplerSpec& s) {
  s = SamplerSpec{};
  if (j.is_string()) {
    s.kind = parse_sampler_kind(j.get<std::string>());
    return;
  }
  s.kind = parse_sampler_kind(j.at("kind").get<std::string>());
  if (j.contains("rng_seed")) s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  if (!j.contains("params")) return;
  const auto& p = j.at("params");
  for (const auto& [key, val] : p.items()) {
    if (key == "burn_probability" || key == "p_f") s.burn_probability = val.get<double>();
    else if (key == "clusters" || key == "k") s.clusters = val.get<std::size_t>();
    else if (key == "burn_in") s.burn_in = val.get<std::size_t>();
    else if (key == "standardize") s.standardize = val.get<bool>();
    else if (key == "surprise_weighted") s.surprise_weighted = val.get<bool>();
    else if (key == "bins") s.bins = val.get<std::size_t>();
    else if (key == "binning") {
      auto b = val.get<std::string>();
      if (b == "log") s.binning = BinningKind::log;
      else if (b == "linear") s.binning = BinningKind::linear;
      else throw ConfigError("binning must be 'log' or 'linear'");
    } else if (key == "delta_rule") {
      auto r = val.get<std::string>();
      if (r == "excl_sample") s.delta_rule = DeltaRule::excl_sample;
      else if (r == "excl_sample_and_frontier") s.delta_rule = DeltaRule::excl_sample_and_frontier;
      else throw ConfigError("unknown delta_rule '" + r + "'");
    } else if (key == "prior") {
      for (const auto& [name, e] : val.items()) {
        PriorEntry entry;
        if (e.is_array())
          entry.by_symbol = e.get<std::vector<double>>();
        else
          entry.by_label = e.get<std::map<std::string, double>>();
        s.prior.emplace(name, std::move(entry));
      }
    } else {
      throw ConfigError("unknown sampler parameter '" + key + "'");
    }
  }
  s.validate();
}

/// Walk position, BFS / Forest Fire queues and the visit multiset.
struct WalkerState {
  NodeId current = 0;
  std::deque<NodeId> queue;
  /// Discovered (BFS) or burned (FF) flags.
  std::vector<std::uint8_t> marked;
  /// Every walk position in order, including revisits; starts with the seed.
  std::vector<NodeId> visits;
  std::size_t steps = 0;

  void reset(std::size_t n, NodeId seed) {
    current = seed;
    queue.clear();
    marked.assign(n, 0);
    marked[seed] = 1;
    visits.assign(1, seed);
    steps = 0;
  }
};

/// Outcome of one sampling run.
struct Sample {
  std::vector<NodeId> nodes;
  SamplerSpec spec;
  NodeId seed = 0;
  std::uint64_t rng_seed = 0;
  /// Walk multiset for RW-type samplers; equals `nodes` for the others.
  std::vector<NodeId> visits;

  AttributedGraph induced_subgraph(const AttributedGraph& g) const { return g.induced(nodes); }
};

/// True when every node after the first has a neighbour earlier in the list.
inline bool is_link_trace_sequence(const AttributedGraph& g, std::span<const NodeId> nodes) {
  std::vector<std::uint8_t> in(g.num_nodes(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i > 0) {
      bool linked = false;
      for (NodeId w : g.neighbors(nodes[i]))
        if (in[w]) {
          linked = true;
          break;
        }
      if (!linked) return false;
    }
    in[nodes[i]] = 1;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Step rules. Each returns the node to add next; deterministic rules break
// ties by the smallest node id.

inline NodeId uni_next(const SampleState& state, Rng& rng) {
  const std::size_t n = state.graph().num_nodes();
  if (state.size() >= n) throw RunError("no unsampled nodes left");
  if (state.size() * 2 < n) {
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
    for (;;) {
      NodeId v = pick(rng);
      if (!state.in_sample(v)) return v;
    }
  }
  std::vector<NodeId> rest;
  rest.reserve(n - state.size());
  for (NodeId v = 0; v < n; ++v)
    if (!state.in_sample(v)) rest.push_back(v);
  return rest[std::uniform_int_distribution<std::size_t>(0, rest.size() - 1)(rng)];
}

/// Enqueues undiscovered neighbours of a freshly sampled node, ascending.
inline void bfs_discover(WalkerState& w, const SampleState& state, NodeId added) {
  for (NodeId x : state.graph().neighbors(added))
    if (!w.marked[x] && !state.in_sample(x)) {
      w.marked[x] = 1;
      w.queue.push_back(x);
    }
}

inline NodeId bfs_next(WalkerState& w, const SampleState& state) {
  while (!w.queue.empty() && state.in_sample(w.queue.front())) w.queue.pop_front();
  if (w.queue.empty()) {
    for (NodeId v : state.frontier()) {
      w.marked[v] = 1;
      w.queue.push_back(v);
    }
    if (w.queue.empty()) throw RunError("frontier exhausted");
  }
  NodeId v = w.queue.front();
  w.queue.pop_front();
  return v;
}

/// Number of neighbours to burn: geometric with mean p_f / (1 - p_f).
inline std::size_t burn_count(Rng& rng, double p_f) {
  return std::geometric_distribution<std::size_t>(1.0 - p_f)(rng);
}

/// Burns up to `count` unburned neighbours of `from`, chosen uniformly, and
/// enqueues them in ascending id order.
inline std::size_t forest_fire_burn(WalkerState& w, const SampleState& state, NodeId from, std::size_t count, Rng& rng) {
  std::vector<NodeId> cand;
  for (NodeId x : state.graph().neighbors(from))
    if (!w.marked[x] && !state.in_sample(x)) cand.push_back(x);
  count = std::min(count, cand.size());
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t j = std::uniform_int_distribution<std::size_t>(i, cand.size() - 1)(rng);
    std::swap(cand[i], cand[j]);
  }
  cand.resize(count);
  std::sort(cand.begin(), cand.end());
  for (NodeId x : cand) {
    w.marked[x] = 1;
    w.queue.push_back(x);
  }
  return count;
}

inline void forest_fire_spread(WalkerState& w, const SampleState& state, NodeId added, Rng& rng, double p_f) {
  forest_fire_burn(w, state, added, burn_count(rng, p_f), rng);
}

/// Next burned node. When the fire has died out it is re-ignited at a
/// uniformly chosen sampled node that still has unburned neighbours; the
/// re-ignition burns at least one of them.
inline NodeId forest_fire_next(WalkerState& w, const SampleState& state, Rng& rng, double p_f) {
  while (w.queue.empty()) {
    std::vector<NodeId> live;
    for (NodeId u : state.sample())
      for (NodeId x : state.graph().neighbors(u))
        if (!w.marked[x] && !state.in_sample(x)) {
          live.push_back(u);
          break;
        }
    if (live.empty()) throw RunError("frontier exhausted");
    NodeId from = live[std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng)];
    forest_fire_burn(w, state, from, std::max<std::size_t>(1, burn_count(rng, p_f)), rng);
  }
  NodeId v = w.queue.front();
  w.queue.pop_front();
  return v;
}

inline NodeId uniform_neighbor(const AttributedGraph& g, NodeId v, Rng& rng) {
  auto nb = g.neighbors(v);
  if (nb.empty()) throw RunError("walker stuck on isolated node " + std::to_string(v));
  return nb[std::uniform_int_distribution<std::size_t>(0, nb.size() - 1)(rng)];
}

/// One simple random-walk step; returns the new position.
inline NodeId rw_next(const AttributedGraph& g, WalkerState& w, Rng& rng) {
  w.current = uniform_neighbor(g, w.current, rng);
  w.visits.push_back(w.current);
  ++w.steps;
  return w.current;
}

/// Metropolis-Hastings acceptance probability for a move v -> w.
inline double mhrw_acceptance(std::size_t degree_from, std::size_t degree_to) {
  return std::min(1.0, static_cast<double>(degree_from) / static_cast<double>(degree_to));
}

/// One Metropolis-Hastings step; returns the (possibly unchanged) position.
inline NodeId mhrw_next(const AttributedGraph& g, WalkerState& w, Rng& rng) {
  NodeId prop = uniform_neighbor(g, w.current, rng);
  double acc = mhrw_acceptance(g.degree(w.current), g.degree(prop));
  if (acc >= 1.0 || std::uniform_real_distribution<double>(0.0, 1.0)(rng) < acc) w.current = prop;
  w.visits.push_back(w.current);
  ++w.steps;
  return w.current;
}

inline NodeId xs_next(const SampleState& state) {
  if (state.frontier().empty()) throw RunError("frontier exhausted");
  NodeId best = *state.frontier().begin();
  std::size_t best_val = state.unexplored(best);
  for (NodeId v : state.frontier())
    if (state.unexplored(v) > best_val) {
      best = v;
      best_val = state.unexplored(v);
    }
  return best;
}

/// Scores equal up to rounding are ties, which the smaller id keeps.
inline constexpr double kScoreTieTolerance = 1e-12;

/// a beats b: more unseen values first, then surprise beyond rounding.
inline bool score_greater(const SurpriseScore& a, const SurpriseScore& b) {
  if (a.divergent() || b.divergent()) return a > b;
  return a.value > b.value + kScoreTieTolerance;
}

inline NodeId bal_next(const SampleState& state, std::span<const std::size_t> attrs) {
  if (state.frontier().empty()) throw RunError("frontier exhausted");
  NodeId best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (NodeId v : state.frontier()) {
    double s = 0.0;
    for (std::size_t a : attrs) s += state.distribution(a).probability(state.symbols().symbol(v, a));
    if (s < best_val - kScoreTieTolerance) {
      best_val = s;
      best = v;
    }
  }
  return best;
}

/// Surprise of v ∪ Δv summed over `attrs`, against per-attribute
/// probabilities given by prob(attr, symbol).
template <class ProbFn>
SurpriseScore candidate_surprise(const SampleState& state, NodeId v, std::span<const std::size_t> attrs, ProbFn&& prob,
                                 std::vector<int>& scratch) {
  SurpriseScore total;
  for (std::size_t a : attrs) {
    state.candidate_symbols(v, a, scratch);
    total += surprise_with(scratch, [&](int s) { return prob(a, s); });
  }
  return total;
}

inline SurpriseScore candidate_surprise(const SampleState& state, NodeId v, std::span<const std::size_t> attrs) {
  std::vector<int> scratch;
  return candidate_surprise(
      state, v, attrs, [&](std::size_t a, int s) { return state.distribution(a).probability(s); }, scratch);
}

namespace detail {

template <class ScoreFn>
NodeId argmax_surprise(const SampleState& state, ScoreFn&& score) {
  if (state.frontier().empty()) throw RunError("frontier exhausted");
  NodeId best = *state.frontier().begin();
  SurpriseScore best_score = score(best);
  for (NodeId v : state.frontier()) {
    SurpriseScore s = score(v);
    if (score_greater(s, best_score)) {
      best_score = s;
      best = v;
    }
  }
  return best;
}

}  // namespace detail

inline NodeId ixs_next(const SampleState& state, std::span<const std::size_t> attrs) {
  std::vector<int> scratch;
  auto prob = [&](std::size_t a, int s) { return state.distribution(a).probability(s); };
  return detail::argmax_surprise(state, [&](NodeId v) { return candidate_surprise(state, v, attrs, prob, scratch); });
}

/// H-IXS: surprise over discrete and binned continuous attributes together.
inline NodeId hixs_next(const SampleState& state) {
  auto attrs = state.graph().schema().all();
  return ixs_next(state, attrs);
}

/// Surprise against a fixed prior instead of the running sample distribution.
/// `prior` is indexed by attribute id.
inline NodeId prior_surprise_next(const SampleState& state, std::span<const EmpiricalDistribution> prior,
                                  std::span<const std::size_t> attrs) {
  std::vector<int> scratch;
  auto prob = [&](std::size_t a, int s) { return prior[a].probability(s); };
  return detail::argmax_surprise(state, [&](NodeId v) { return candidate_surprise(state, v, attrs, prob, scratch); });
}

/// Kolmogorov-Smirnov distance between two distributions over the same
/// ordered integer alphabet, given as (unnormalized) counts.
inline double ks_counts(std::span<const double> a, double total_a, std::span<const double> b, double total_b) {
  double ca = 0.0, cb = 0.0, best = 0.0;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    ca += i < a.size() ? a[i] : 0.0;
    cb += i < b.size() ? b[i] : 0.0;
    best = std::max(best, std::abs(ca / total_a - cb / total_b));
  }
  return best;
}

/// Variable-neighbourhood rule: the frontier node whose addition minimises
/// the attribute-averaged KS distance between the sample and the prior.
inline NodeId vns_next(const SampleState& state, std::span<const EmpiricalDistribution> prior,
                       std::span<const std::size_t> attrs) {
  if (state.frontier().empty()) throw RunError("frontier exhausted");
  NodeId best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<double> counts;
  for (NodeId v : state.frontier()) {
    double total_ks = 0.0;
    for (std::size_t a : attrs) {
      const auto& d = state.distribution(a);
      counts = d.counts;
      double total = d.total;
      int s = state.symbols().symbol(v, a);
      if (s >= 0) {
        if (static_cast<std::size_t>(s) >= counts.size()) counts.resize(s + 1, 0.0);
        counts[s] += 1.0;
        total += 1.0;
      }
      total_ks += total > 0.0 ? ks_counts(counts, total, prior[a].counts, prior[a].total) : 1.0;
    }
    double val = attrs.empty() ? 0.0 : total_ks / static_cast<double>(attrs.size());
    if (val < best_val - kScoreTieTolerance) {
      best_val = val;
      best = v;
    }
  }
  return best;
}

namespace detail {

inline std::vector<Point> continuous_points(const SampleState& state, std::span<const NodeId> nodes,
                                            std::span<const std::size_t> cont) {
  std::vector<Point> pts;
  pts.reserve(nodes.size());
  for (NodeId v : nodes) {
    Point p;
    p.reserve(cont.size());
    for (std::size_t a : cont) p.push_back(state.graph().value(v, a));
    pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace detail

/// Extremal-point rule: the frontier node with the largest mean Euclidean
/// distance to the sample over continuous attributes (optionally z-scored
/// with the sample's statistics).
inline NodeId exp_next(const SampleState& state, std::span<const std::size_t> cont, bool standardize = true) {
  if (state.frontier().empty()) throw RunError("frontier exhausted");
  if (cont.empty()) throw ConfigError("ExP needs at least one continuous attribute");
  auto sample_pts = detail::continuous_points(state, state.sample(), cont);
  Standardizer z;
  if (standardize) {
    z = Standardizer::fit(sample_pts);
    sample_pts = z.apply(sample_pts);
  }
  NodeId best = 0;
  double best_val = -1.0;
  for (NodeId v : state.frontier()) {
    NodeId one[1] = {v};
    Point p = detail::continuous_points(state, one, cont).front();
    if (standardize) p = z.apply(p);
    double s = 0.0;
    for (const auto& q : sample_pts) s += std::sqrt(squared_distance(p, q));
    double mean = sample_pts.empty() ? 0.0 : s / static_cast<double>(sample_pts.size());
    if (mean > best_val) {
      best_val = mean;
      best = v;
    }
  }
  return best;
}


enum class ParetoMode { ixs_xs, ixs_mhrw };

/// Min-max normalisation to [0,1]; a constant series maps to all zeros.
inline std::vector<double> minmax_normalize(std::vector<double> x) {
  if (x.empty()) return x;
  auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double a = *lo, b = *hi;
  for (double& v : x) v = b > a ? (v - a) / (b - a) : 0.0;
  return x;
}

/// Index chosen by the Pareto rule over parallel objective arrays (both
/// maximised). Among non-dominated entries, the largest equally weighted sum
/// of min-max normalised objectives wins; divergent surprise counts as the
/// largest finite surprise + 1 for the normalisation. Ties go to the lower index.
inline std::size_t pareto_choice(std::span<const SurpriseScore> info, std::span<const double> structure) {
  const std::size_t n = info.size();
  if (n == 0 || structure.size() != n) throw ContractError("pareto_choice needs equally sized, non-empty objectives");
  double max_finite = 0.0;
  bool any_finite = false;
  for (const auto& s : info)
    if (!s.divergent()) {
      max_finite = any_finite ? std::max(max_finite, s.value) : s.value;
      any_finite = true;
    }
  std::vector<double> ival(n);
  for (std::size_t i = 0; i < n; ++i) ival[i] = info[i].divergent() ? max_finite + 1.0 : info[i].value;
  auto ni = minmax_normalize(ival);
  auto ns = minmax_normalize(std::vector<double>(structure.begin(), structure.end()));

  std::size_t best = n;
  double best_val = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < n && !dominated; ++j) {
      if (j == i) continue;
      const bool ge = !score_greater(info[i], info[j]) && structure[i] <= structure[j] + kScoreTieTolerance;
      const bool gt = score_greater(info[j], info[i]) || structure[j] > structure[i] + kScoreTieTolerance;
      dominated = ge && gt;
    }
    if (dominated) continue;
    const double v = ni[i] + ns[i];
    if (v > best_val + kScoreTieTolerance) {
      best_val = v;
      best = i;
    }
  }
  return best;
}

/// Structural transition score of each frontier node (frontier order) for
/// pIM: sum_{u in S} min(1/d_v, 1/d_u), normalised to sum 1 over the frontier.
inline std::vector<double> pim_transition_scores(const SampleState& state) {
  const auto& g = state.graph();
  std::vector<double> raw;
  raw.reserve(state.frontier().size());
  double total = 0.0;
  for (NodeId v : state.frontier()) {
    double s = 0.0;
    const double dv = static_cast<double>(g.degree(v));
    for (NodeId u : state.sample()) s += std::min(1.0 / dv, 1.0 / static_cast<double>(g.degree(u)));
    raw.push_back(s);
    total += s;
  }
  if (total > 0.0)
    for (double& x : raw) x /= total;
  return raw;
}

/// pIX uses (surprise, |Δv|); pIM uses (surprise, transition score).
inline NodeId pareto_next(const SampleState& state, ParetoMode mode, std::span<const std::size_t> attrs) {
  if (state.frontier().empty()) throw RunError("frontier exhausted");
  std::vector<NodeId> nodes(state.frontier().begin(), state.frontier().end());
  std::vector<SurpriseScore> info;
  info.reserve(nodes.size());
  std::vector<int> scratch;
  auto prob = [&](std::size_t a, int s) { return state.distribution(a).probability(s); };
  for (NodeId v : nodes) info.push_back(candidate_surprise(state, v, attrs, prob, scratch));
  std::vector<double> structure;
  if (mode == ParetoMode::ixs_xs) {
    structure.reserve(nodes.size());
    for (NodeId v : nodes) structure.push_back(static_cast<double>(state.delta_size(v)));
  } else {
    structure = pim_transition_scores(state);
  }
  return nodes[pareto_choice(info, structure)];
}

/// Content-cluster rule: k-means on the z-scored continuous attributes of
/// S ∪ N(S) defines a derived cluster-id attribute whose distribution is
/// counted over S, so a cluster reached only by the frontier is unseen.
/// Candidates are scored by cluster-id surprise plus discrete-attribute
/// surprise. Falls back to the plain discrete surprise rule while |S| < k.
inline NodeId cluster_aware_next(const SampleState& state, std::size_t k, std::span<const std::size_t> discrete,
                                 std::span<const std::size_t> cont, Rng& rng) {
  if (state.frontier().empty()) throw RunError("frontier exhausted");
  if (k < 1) throw ConfigError("cluster count must be >= 1");
  if (state.size() < k) return ixs_next(state, discrete);
  std::vector<NodeId> fit_nodes = state.sample();
  fit_nodes.insert(fit_nodes.end(), state.frontier().begin(), state.frontier().end());
  auto pts = detail::continuous_points(state, fit_nodes, cont);
  Standardizer z = Standardizer::fit(pts);
  auto km = kmeans(z.apply(pts), k, rng);
  EmpiricalDistribution clusters(k);
  for (std::size_t i = 0; i < state.size(); ++i) clusters.add(km.labels[i]);

  std::vector<int> scratch;
  std::vector<int> ids;
  auto prob = [&](std::size_t a, int s) { return state.distribution(a).probability(s); };
  auto cluster_of = [&](NodeId w) {
    NodeId one[1] = {w};
    return nearest_center(z.apply(detail::continuous_points(state, one, cont).front()), km.centers);
  };
  return detail::argmax_surprise(state, [&](NodeId v) {
    ids.clear();
    ids.push_back(cluster_of(v));
    state.for_each_delta(v, [&](NodeId w) { ids.push_back(cluster_of(w)); });
    SurpriseScore s = surprise_with(ids, [&](int c) { return clusters.probability(c); });
    s += candidate_surprise(state, v, discrete, prob, scratch);
    return s;
  });
}

/// Experimental surprise-weighted Metropolis-Hastings step: moves to a
/// neighbour v of the current node with probability proportional to
/// min(1, d_i/d_v)/d_i times the surprise of v ∪ Δv (divergent scores capped
/// at the largest finite score + 1). Falls back to the plain weights when
/// every surprise is zero.
inline NodeId surprise_mhrw_next(const SampleState& state, WalkerState& w, std::span<const std::size_t> attrs,
                                 Rng& rng) {
  const auto& g = state.graph();
  auto nb = g.neighbors(w.current);
  if (nb.empty()) throw RunError("walker stuck on isolated node " + std::to_string(w.current));
  const double di = static_cast<double>(nb.size());
  std::vector<double> base(nb.size());
  std::vector<SurpriseScore> info(nb.size());
  double max_finite = 0.0;
  for (std::size_t j = 0; j < nb.size(); ++j) {
    base[j] = mhrw_acceptance(nb.size(), g.degree(nb[j])) / di;
    info[j] = candidate_surprise(state, nb[j], attrs);
    if (!info[j].divergent()) max_finite = std::max(max_finite, info[j].value);
  }
  std::vector<double> weight(nb.size());
  double total = 0.0;
  for (std::size_t j = 0; j < nb.size(); ++j) {
    weight[j] = base[j] * (info[j].divergent() ? max_finite + 1.0 : info[j].value);
    total += weight[j];
  }
  if (!(total > 0.0)) weight = base;
  w.current = nb[std::discrete_distribution<std::size_t>(weight.begin(), weight.end())(rng)];
  w.visits.push_back(w.current);
  ++w.steps;
  return w.current;
}

/// Walks (simple or Metropolis-Hastings) until an unsampled node is reached.
inline NodeId walk_to_new(const SampleState& state, WalkerState& w, Rng& rng, bool metropolis, std::size_t max_steps) {
  for (;;) {
    if (w.steps >= max_steps)
      throw RunError("walker exceeded step cap of " + std::to_string(max_steps) + " steps with " +
                     std::to_string(state.size()) + " distinct nodes sampled");
    NodeId v = metropolis ? mhrw_next(state.graph(), w, rng) : rw_next(state.graph(), w, rng);
    if (!state.in_sample(v)) return v;
  }
}

/// Fair coin for the I&M mixture: true selects the surprise rule.
inline bool ixm_coin(Rng& rng) { return std::bernoulli_distribution(0.5)(rng); }

inline NodeId ixm_next(const SampleState& state, WalkerState& w, Rng& rng, std::span<const std::size_t> attrs,
                       std::size_t max_steps) {
  if (ixm_coin(rng)) return ixs_next(state, attrs);
  return walk_to_new(state, w, rng, true, max_steps);
}

/// Attribute distribution observed along a Metropolis-Hastings walk: the
/// first `steps` positions are discarded as burn-in, the next `steps` are
/// counted.
inline std::vector<EmpiricalDistribution> estimate_prior_mhrw(const AttributedGraph& g, const SymbolTable& sym,
                                                              NodeId start, std::size_t steps, Rng& rng) {
  std::vector<EmpiricalDistribution> out;
  for (std::size_t a = 0; a < sym.num_attributes(); ++a) out.emplace_back(sym.alphabet(a));
  WalkerState w;
  w.reset(g.num_nodes(), start);
  if (g.degree(start) == 0) {
    for (std::size_t a = 0; a < out.size(); ++a) out[a].add(sym.symbol(start, a));
    return out;
  }
  for (std::size_t i = 0; i < steps; ++i) mhrw_next(g, w, rng);
  for (std::size_t i = 0; i < std::max<std::size_t>(steps, 1); ++i) {
    NodeId v = mhrw_next(g, w, rng);
    for (std::size_t a = 0; a < out.size(); ++a) out[a].add(sym.symbol(v, a));
  }
  return out;
}

/// Turns a configured prior entry into a distribution over the symbols of one
/// attribute.
inline EmpiricalDistribution resolve_prior_entry(const AttributedGraph& g, const SymbolTable& sym, std::size_t attr,
                                                 const PriorEntry& e) {
  const auto& info = g.schema()[attr];
  std::vector<double> p(sym.alphabet(attr), 0.0);
  if (!e.by_label.empty()) {
    if (!info.is_discrete()) throw ConfigError("labelled prior given for continuous attribute '" + info.name + "'");
    for (const auto& [label, prob] : e.by_label) {
      auto it = std::find(info.categories.begin(), info.categories.end(), label);
      if (it == info.categories.end()) {
        if (prob > 0.0) throw ConfigError("prior label '" + label + "' is not a value of '" + info.name + "'");
        continue;
      }
      p[static_cast<std::size_t>(it - info.categories.begin())] = prob;
    }
  } else {
    if (e.by_symbol.size() > p.size())
      throw ConfigError("prior for '" + info.name + "' has more entries than the attribute has values");
    std::copy(e.by_symbol.begin(), e.by_symbol.end(), p.begin());
  }
  return EmpiricalDistribution::from_probabilities(std::move(p));
}

/// Drives one sampling run step by step.
class Sampler {
 public:
  Sampler(const AttributedGraph& g, const SymbolTable& sym, SamplerSpec spec)
      : graph_(&g), symbols_(&sym), spec_(std::move(spec)), state_(g, sym, spec_.delta_rule), rng_(spec_.rng_seed) {
    spec_.validate();
    const auto& schema = g.schema();
    discrete_ = schema.of_kind(AttributeKind::discrete);
    continuous_ = schema.of_kind(AttributeKind::continuous);
    switch (spec_.kind) {
      case SamplerKind::bal:
      case SamplerKind::ixs:
      case SamplerKind::ixm:
      case SamplerKind::pix:
      case SamplerKind::pim:
        if (discrete_.empty()) throw ConfigError(std::string(to_string(spec_.kind)) + " needs a discrete attribute");
        attrs_ = discrete_;
        break;
      case SamplerKind::hixs:
        attrs_ = schema.all();
        if (attrs_.empty()) throw ConfigError("H-IXS needs at least one attribute");
        break;
      case SamplerKind::exp:
        if (continuous_.empty()) throw ConfigError("ExP needs a continuous attribute");
        attrs_ = continuous_;
        break;
      case SamplerKind::cluster:
        if (continuous_.empty()) throw ConfigError("CLUSTER needs a continuous attribute");
        attrs_ = discrete_;
        break;
      case SamplerKind::prior:
      case SamplerKind::vns:
        if (!spec_.prior.empty()) {
          for (const auto& [name, e] : spec_.prior) attrs_.push_back(schema.index(name));
          std::sort(attrs_.begin(), attrs_.end());
        } else {
          attrs_ = discrete_.empty() ? schema.all() : discrete_;
        }
        if (attrs_.empty()) throw ConfigError(std::string(to_string(spec_.kind)) + " needs at least one attribute");
        break;
      case SamplerKind::mhrw:
        if (spec_.surprise_weighted) attrs_ = discrete_.empty() ? schema.all() : discrete_;
        break;
      default:
        break;
    }
  }

  const SampleState& state() const noexcept { return state_; }
  const WalkerState& walker() const noexcept { return walker_; }
  const SamplerSpec& spec() const noexcept { return spec_; }
  std::span<const std::size_t> attributes() const noexcept { return attrs_; }
  const std::vector<EmpiricalDistribution>& prior() const noexcept { return prior_; }

  /// Adds the seed; `target` sizes the step cap and the prior burn-in.
  void start(NodeId seed, std::size_t target) {
    if (seed >= graph_->num_nodes()) throw ContractError("seed node out of range");
    target_ = std::max<std::size_t>(target, 1);
    max_steps_ = 1000 * target_;
    walker_.reset(graph_->num_nodes(), seed);
    if (spec_.kind == SamplerKind::prior || spec_.kind == SamplerKind::vns) init_prior(seed);
    state_.extend(seed);
    after_add(seed);
  }

  /// Selects and adds one node; returns it.
  NodeId step() {
    NodeId v = choose();
    if (spec_.kind == SamplerKind::uni)
      state_.extend_any(v);
    else
      state_.extend(v);
    after_add(v);
    return v;
  }

  Sample run(NodeId seed, std::size_t z) {
    if (z < 1 || z > graph_->num_nodes()) throw ContractError("sample size must lie in [1, |V|]");
    start(seed, z);
    while (state_.size() < z) step();
    Sample s;
    s.nodes = state_.sample();
    s.spec = spec_;
    s.seed = seed;
    s.rng_seed = spec_.rng_seed;
    s.visits = uses_walker() ? walker_.visits : s.nodes;
    return s;
  }

 private:
  bool uses_walker() const {
    return spec_.kind == SamplerKind::rw || spec_.kind == SamplerKind::mhrw || spec_.kind == SamplerKind::ixm;
  }

  void init_prior(NodeId seed) {
    const std::size_t steps = spec_.burn_in ? spec_.burn_in : 10 * target_;
    Rng prior_rng(spec_.rng_seed ^ 0x9e3779b97f4a7c15ULL);
    prior_ = estimate_prior_mhrw(*graph_, *symbols_, seed, steps, prior_rng);
    for (const auto& [name, e] : spec_.prior) {
      std::size_t a = graph_->schema().index(name);
      prior_[a] = resolve_prior_entry(*graph_, *symbols_, a, e);
    }
  }

  NodeId choose() {
    switch (spec_.kind) {
      case SamplerKind::uni: return uni_next(state_, rng_);
      case SamplerKind::bfs: return bfs_next(walker_, state_);
      case SamplerKind::ff: return forest_fire_next(walker_, state_, rng_, spec_.burn_probability);
      case SamplerKind::rw: return walk_to_new(state_, walker_, rng_, false, max_steps_);
      case SamplerKind::mhrw:
        if (!spec_.surprise_weighted) return walk_to_new(state_, walker_, rng_, true, max_steps_);
        for (;;) {
          if (walker_.steps >= max_steps_) throw RunError("walker exceeded step cap of " + std::to_string(max_steps_));
          NodeId v = surprise_mhrw_next(state_, walker_, attrs_, rng_);
          if (!state_.in_sample(v)) return v;
        }
      case SamplerKind::xs: return xs_next(state_);
      case SamplerKind::bal: return bal_next(state_, attrs_);
      case SamplerKind::ixs: return ixs_next(state_, attrs_);
      case SamplerKind::exp: return exp_next(state_, attrs_, spec_.standardize);
      case SamplerKind::hixs: return ixs_next(state_, attrs_);
      case SamplerKind::ixm: return ixm_next(state_, walker_, rng_, attrs_, max_steps_);
      case SamplerKind::pix: return pareto_next(state_, ParetoMode::ixs_xs, attrs_);
      case SamplerKind::pim: return pareto_next(state_, ParetoMode::ixs_mhrw, attrs_);
      case SamplerKind::prior: return prior_surprise_next(state_, prior_, attrs_);
      case SamplerKind::vns: return vns_next(state_, prior_, attrs_);
      case SamplerKind::cluster: return cluster_aware_next(state_, spec_.clusters, discrete_, continuous_, rng_);
    }
    throw ContractError("unhandled sampler kind");
  }

  void after_add(NodeId v) {
    switch (spec_.kind) {
      case SamplerKind::bfs: bfs_discover(walker_, state_, v); break;
      case SamplerKind::ff: forest_fire_spread(walker_, state_, v, rng_, spec_.burn_probability); break;
      case SamplerKind::ixm:
        // The walk continues from wherever the sample last grew.
        walker_.current = v;
        break;
      default: break;
    }
  }

  const AttributedGraph* graph_;
  const SymbolTable* symbols_;
  SamplerSpec spec_;
  SampleState state_;
  WalkerState walker_;
  Rng rng_;
  std::vector<std::size_t> discrete_, continuous_, attrs_;
  std::vector<EmpiricalDistribution> prior_;
  std::size_t target_ = 1;
  std::size_t max_steps_ = 1000;
};

inline Sample run_sampler(const AttributedGraph& g, const SymbolTable& sym, const SamplerSpec& spec, NodeId seed,
                          std::size_t z) {
  return Sampler(g, sym, spec).run(seed, z);
}

inline Sample run_sampler(const AttributedGraph& g, const SamplerSpec& spec, NodeId seed, std::size_t z) {
  SymbolTable sym(g, spec.binning, spec.bins);
  return run_sampler(g, sym, spec, seed, z);
}

}  // namespace attrsample
