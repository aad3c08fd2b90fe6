#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "attrsample/error.hpp"
#include "attrsample/graph.hpp"
#include "attrsample/kmeans.hpp"
#include "attrsample/surprise.hpp"

namespace attrsample {

enum class Direction { lower_better, higher_better };

struct MetricValue {
  std::string name;
  double value = 0.0;
  Direction direction = Direction::lower_better;
};

/// Maximum absolute CDF gap between two distributions given as (possibly
/// unnormalised) weights over the same ordered support.
inline double ks_statistic(std::span<const double> p, std::span<const double> q) {
  const double tp = std::accumulate(p.begin(), p.end(), 0.0);
  const double tq = std::accumulate(q.begin(), q.end(), 0.0);
  if (!(tp > 0.0) || !(tq > 0.0)) throw DataError("KS statistic of an empty distribution");
  double cp = 0.0, cq = 0.0, best = 0.0;
  const std::size_t n = std::max(p.size(), q.size());
  for (std::size_t i = 0; i < n; ++i) {
    cp += i < p.size() ? p[i] : 0.0;
    cq += i < q.size() ? q[i] : 0.0;
    best = std::max(best, std::abs(cp / tp - cq / tq));
  }
  return std::min(best, 1.0);
}

inline double ks_statistic(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  return ks_statistic(a.counts, b.counts);
}

/// Weighted two-sample KS statistic over real values.
inline double ks_two_sample(std::span<const double> xa, std::span<const double> wa, std::span<const double> xb,
                            std::span<const double> wb) {
  if (xa.size() != wa.size() || xb.size() != wb.size()) throw ContractError("value/weight length mismatch");
  // (value, weight, side); side 0 is sample a.
  std::vector<std::tuple<double, double, int>> ev;
  ev.reserve(xa.size() + xb.size());
  const double ta = std::accumulate(wa.begin(), wa.end(), 0.0);
  const double tb = std::accumulate(wb.begin(), wb.end(), 0.0);
  if (!(ta > 0.0) || !(tb > 0.0)) throw DataError("KS statistic of an empty distribution");
  for (std::size_t i = 0; i < xa.size(); ++i) ev.emplace_back(xa[i], wa[i], 0);
  for (std::size_t i = 0; i < xb.size(); ++i) ev.emplace_back(xb[i], wb[i], 1);
  std::sort(ev.begin(), ev.end(), [](const auto& l, const auto& r) { return std::get<0>(l) < std::get<0>(r); });
  double ca = 0.0, cb = 0.0, best = 0.0;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    (std::get<2>(ev[i]) == 0 ? ca : cb) += std::get<1>(ev[i]);
    if (i + 1 == ev.size() || std::get<0>(ev[i + 1]) != std::get<0>(ev[i]))
      best = std::max(best, std::abs(ca / ta - cb / tb));
  }
  return std::min(best, 1.0);
}

inline double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  std::vector<double> wa(a.size(), 1.0), wb(b.size(), 1.0);
  return ks_two_sample(a, wa, b, wb);
}

/// Distinct symbols hit by the sample over the number of available symbols.
inline double coverage(std::span<const int> sample_symbols, std::size_t cardinality) {
  if (cardinality == 0) throw DataError("coverage over an empty domain");
  std::set<int> seen;
  for (int s : sample_symbols)
    if (s >= 0) seen.insert(s);
  return static_cast<double>(seen.size()) / static_cast<double>(cardinality);
}

/// Coverage of one attribute; the denominator is the number of distinct
/// symbols present in the whole graph.
inline double coverage(const SymbolTable& sym, std::size_t attr, std::span<const NodeId> sample) {
  auto col = sym.column(attr);
  std::set<int> present(col.begin(), col.end());
  present.erase(-1);
  std::vector<int> s;
  s.reserve(sample.size());
  for (NodeId v : sample) s.push_back(col[v]);
  return coverage(s, present.size());
}

/// Newman's categorical assortativity coefficient; 0 when undefined (no
/// edges, or a single label on every edge end).
inline double categorical_assortativity(const AttributedGraph& g, std::span<const int> labels) {
  std::map<int, double> a;
  double same = 0.0, m = 0.0;
  g.for_each_edge([&](NodeId u, NodeId v) {
    int lu = labels[u], lv = labels[v];
    if (lu < 0 || lv < 0) return;
    m += 1.0;
    if (lu == lv) same += 1.0;
    a[lu] += 1.0;
    a[lv] += 1.0;
  });
  if (m == 0.0) return 0.0;
  double ab = 0.0;
  for (const auto& [l, c] : a) ab += (c / (2.0 * m)) * (c / (2.0 * m));
  if (!(1.0 - ab > 1e-15)) return 0.0;
  return (same / m - ab) / (1.0 - ab);
}

/// Pearson correlation of endpoint values over both edge orientations;
/// 0 when undefined.
inline double numeric_assortativity(const AttributedGraph& g, std::span<const double> values) {
  double n = 0.0, sx = 0.0, sxx = 0.0, sxy = 0.0;
  g.for_each_edge([&](NodeId u, NodeId v) {
    double x = values[u], y = values[v];
    if (is_missing(x) || is_missing(y)) return;
    n += 2.0;
    sx += x + y;
    sxx += x * x + y * y;
    sxy += 2.0 * x * y;
  });
  if (n == 0.0) return 0.0;
  const double mean = sx / n;
  const double var = sxx / n - mean * mean;
  if (!(var > 1e-15)) return 0.0;
  return (sxy / n - mean * mean) / var;
}

inline double assortativity(const AttributedGraph& g, std::size_t attr) {
  if (g.schema()[attr].is_discrete()) {
    std::vector<int> labels(g.num_nodes());
    for (NodeId v = 0; v < g.num_nodes(); ++v) labels[v] = g.category(v, attr);
    return categorical_assortativity(g, labels);
  }
  return numeric_assortativity(g, g.column(attr));
}

/// Fraction of v's neighbours sharing v's label; 0 for isolated nodes.
inline double star_relation(const AttributedGraph& g, NodeId v, std::span<const int> labels) {
  auto nb = g.neighbors(v);
  if (nb.empty()) return 0.0;
  std::size_t same = 0;
  for (NodeId w : nb) same += labels[w] == labels[v];
  return static_cast<double>(same) / static_cast<double>(nb.size());
}

/// Fraction of unordered pairs in N(v) ∪ {v} sharing a label, over
/// C(d_v + 1, 2) pairs; 0 for isolated nodes.
inline double ego_relation(const AttributedGraph& g, NodeId v, std::span<const int> labels) {
  auto nb = g.neighbors(v);
  if (nb.empty()) return 0.0;
  std::map<int, std::size_t> count;
  ++count[labels[v]];
  for (NodeId w : nb) ++count[labels[w]];
  double same = 0.0;
  for (const auto& [l, c] : count) same += static_cast<double>(c) * static_cast<double>(c - 1) / 2.0;
  const double d = static_cast<double>(nb.size());
  return same / (d * (d + 1.0) / 2.0);
}

inline std::vector<double> degree_sequence(const AttributedGraph& g) {
  std::vector<double> d(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) d[v] = static_cast<double>(g.degree(v));
  return d;
}

/// Probability of each degree 0..max.
inline std::vector<double> degree_distribution(const AttributedGraph& g) {
  std::vector<double> p;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    std::size_t d = g.degree(v);
    if (d >= p.size()) p.resize(d + 1, 0.0);
    p[d] += 1.0;
  }
  for (double& x : p) x /= static_cast<double>(g.num_nodes());
  return p;
}

inline double clustering_coefficient(const AttributedGraph& g, NodeId v) {
  auto nb = g.neighbors(v);
  if (nb.size() <= 1) return 0.0;
  std::size_t links = 0;
  for (std::size_t i = 0; i < nb.size(); ++i)
    for (std::size_t j = i + 1; j < nb.size(); ++j) links += g.has_edge(nb[i], nb[j]);
  const double d = static_cast<double>(nb.size());
  return 2.0 * static_cast<double>(links) / (d * (d - 1.0));
}

inline std::vector<double> clustering_coefficients(const AttributedGraph& g) {
  std::vector<double> c(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) c[v] = clustering_coefficient(g, v);
  return c;
}

/// BFS hop distances from `source` to every reachable node other than itself.
inline void bfs_distances(const AttributedGraph& g, NodeId source, std::vector<double>& out) {
  std::vector<int> dist(g.num_nodes(), -1);
  std::deque<NodeId> q{source};
  dist[source] = 0;
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop_front();
    for (NodeId w : g.neighbors(u))
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        out.push_back(dist[w]);
        q.push_back(w);
      }
  }
}

/// Pooled shortest-path lengths from min(max_sources, n) uniformly chosen
/// distinct sources; every node is a source when n <= max_sources.
template <class Rng>
std::vector<double> path_lengths(const AttributedGraph& g, Rng& rng, std::size_t max_sources = 1000) {
  std::vector<NodeId> sources(g.num_nodes());
  std::iota(sources.begin(), sources.end(), NodeId{0});
  if (sources.size() > max_sources) {
    for (std::size_t i = 0; i < max_sources; ++i) {
      std::size_t j = std::uniform_int_distribution<std::size_t>(i, sources.size() - 1)(rng);
      std::swap(sources[i], sources[j]);
    }
    sources.resize(max_sources);
    std::sort(sources.begin(), sources.end());
  }
  std::vector<double> out;
  for (NodeId s : sources) bfs_distances(g, s, out);
  return out;
}

namespace detail {

inline double entropy_of_counts(const std::map<int, double>& c, double n) {
  double h = 0.0;
  for (const auto& [k, x] : c)
    if (x > 0.0) h -= (x / n) * std::log(x / n);
  return h;
}

}  // namespace detail

/// Normalised mutual information 2 I(a;b) / (H(a) + H(b)); 1 when both
/// partitions are trivial.
inline double nmi(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ContractError("nmi needs equally long label vectors");
  if (a.empty()) throw DataError("nmi of empty partitions");
  const double n = static_cast<double>(a.size());
  std::map<int, double> ca, cb;
  std::map<std::pair<int, int>, double> cab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
    cab[{a[i], b[i]}] += 1.0;
  }
  const double ha = detail::entropy_of_counts(ca, n);
  const double hb = detail::entropy_of_counts(cb, n);
  if (ha + hb <= 0.0) return 1.0;
  double mi = 0.0;
  for (const auto& [k, x] : cab) mi += (x / n) * std::log(x * n / (ca[k.first] * cb[k.second]));
  return std::clamp(2.0 * mi / (ha + hb), 0.0, 1.0);
}

/// Mean silhouette coefficient. Members of singleton clusters and points
/// with a = b score 0.
inline double silhouette(const std::vector<Point>& pts, std::span<const int> labels) {
  if (pts.size() != labels.size()) throw ContractError("silhouette needs one label per point");
  std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw DataError("silhouette is undefined for fewer than two clusters");
  std::map<int, std::size_t> size;
  for (int l : labels) ++size[l];
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (size[labels[i]] <= 1) continue;
    std::map<int, double> sum;
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) sum[labels[j]] += std::sqrt(squared_distance(pts[i], pts[j]));
    const double a = sum[labels[i]] / static_cast<double>(size[labels[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [l, s] : sum)
      if (l != labels[i]) b = std::min(b, s / static_cast<double>(size[l]));
    const double m = std::max(a, b);
    total += m > 0.0 ? (b - a) / m : 0.0;
  }
  return total / static_cast<double>(pts.size());
}

/// Support-weighted mean of per-class F1 over the classes present in y_true.
inline double weighted_f1(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) throw ContractError("weighted_f1 needs equally long label vectors");
  if (y_true.empty()) throw DataError("weighted_f1 of an empty evaluation set");
  std::map<int, double> tp, fp, fn, support;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    support[y_true[i]] += 1.0;
    if (y_true[i] == y_pred[i]) {
      tp[y_true[i]] += 1.0;
    } else {
      fp[y_pred[i]] += 1.0;
      fn[y_true[i]] += 1.0;
    }
  }
  double total = 0.0;
  for (const auto& [c, s] : support) {
    const double denom = 2.0 * tp[c] + fp[c] + fn[c];
    const double f1 = denom > 0.0 ? 2.0 * tp[c] / denom : 0.0;
    total += s * f1;
  }
  return total / static_cast<double>(y_true.size());
}

/// Coefficient of determination; 0 when the truth has no variance.
inline double r_squared(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) throw ContractError("r_squared needs equally long vectors");
  if (y_true.empty()) throw DataError("r_squared of an empty evaluation set");
  const double mean = std::accumulate(y_true.begin(), y_true.end(), 0.0) / static_cast<double>(y_true.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
  }
  if (!(ss_tot > 0.0)) return 0.0;
  return 1.0 - ss_res / ss_tot;
}

/// Mean of per-size expected values (area-under-curve style headline score).
inline double mean_performance(std::span<const double> per_size) {
  if (per_size.empty()) throw DataError("mean_performance of an empty series");
  return std::accumulate(per_size.begin(), per_size.end(), 0.0) / static_cast<double>(per_size.size());
}

/// Skew of a size profile: 1 - H/ln k.
inline double skew(std::span<const std::size_t> sizes) {
  if (sizes.size() < 2) return 0.0;
  double n = 0.0;
  for (auto s : sizes) n += static_cast<double>(s);
  double h = 0.0;
  for (auto s : sizes)
    if (s > 0) h -= (static_cast<double>(s) / n) * std::log(static_cast<double>(s) / n);
  return 1.0 - h / std::log(static_cast<double>(sizes.size()));
}

/// Fraction of edges whose endpoints carry different community labels.
inline double mixing_fraction(const AttributedGraph& g, std::span<const int> community) {
  double cross = 0.0, m = 0.0;
  g.for_each_edge([&](NodeId u, NodeId v) {
    m += 1.0;
    cross += community[u] != community[v];
  });
  return m > 0.0 ? cross / m : 0.0;
}

}  // namespace attrsample
