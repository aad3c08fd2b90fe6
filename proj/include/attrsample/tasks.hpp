#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "attrsample/error.hpp"
#include "attrsample/graph.hpp"
#include "attrsample/kmeans.hpp"
#include "attrsample/metrics.hpp"
#include "attrsample/samplers.hpp"
#include "attrsample/surprise.hpp"
#include "json.hpp"

namespace attrsample {

enum class TaskKind { characterize, cluster, classify };

inline std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::characterize: return "characterize";
    case TaskKind::cluster: return "cluster";
    case TaskKind::classify: return "classify";
  }
  return "?";
}

struct TaskSpec {
  TaskKind kind = TaskKind::characterize;
  /// Classification target attribute; empty selects the ground-truth
  /// cluster id when present, else the first discrete attribute.
  std::string target;
  /// Feature attributes; empty selects every attribute except the target.
  std::vector<std::string> features;
  /// Cluster count; 0 selects the number of ground-truth clusters (or 5).
  std::size_t clusters = 0;
  std::size_t neighbors = 5;
  bool standardize = true;
  bool one_hot = true;

  void validate() const {
    if (neighbors < 1) throw ConfigError("kNN needs k >= 1");
    if (!target.empty() && std::find(features.begin(), features.end(), target) != features.end())
      throw ConfigError("classification target must not be a feature");
  }
};

inline void to_json(nlohmann::json& j, const TaskSpec& t) {
  j = {{"task", to_string(t.kind)}, {"clusters", t.clusters}, {"neighbors", t.neighbors},
       {"standardize", t.standardize}, {"one_hot", t.one_hot}};
  if (!t.target.empty()) j["target"] = t.target;
  if (!t.features.empty()) j["features"] = t.features;
}

inline void from_json(const nlohmann::json& j, TaskSpec& t) {
  t = TaskSpec{};
  std::string kind = j.is_string() ? j.get<std::string>() : j.at("task").get<std::string>();
  if (kind == "characterize") t.kind = TaskKind::characterize;
  else if (kind == "cluster") t.kind = TaskKind::cluster;
  else if (kind == "classify") t.kind = TaskKind::classify;
  else throw ConfigError("unknown task '" + kind + "'");
  if (j.is_object())
    for (const auto& [key, val] : j.items()) {
      if (key == "task") continue;
      if (key == "target") t.target = val.get<std::string>();
      else if (key == "features") t.features = val.get<std::vector<std::string>>();
      else if (key == "clusters" || key == "k") t.clusters = val.get<std::size_t>();
      else if (key == "neighbors") t.neighbors = val.get<std::size_t>();
      else if (key == "standardize") t.standardize = val.get<bool>();
      else if (key == "one_hot") t.one_hot = val.get<bool>();
      else throw ConfigError("unknown task parameter '" + key + "'");
    }
  t.validate();
}

/// Metric values keyed by name. A metric that does not apply to the graph's
/// attribute kinds is absent.
struct TaskResult {
  std::map<std::string, double> metrics;
  std::vector<std::string> warnings;
};

/// Full-graph statistics that characterisation compares samples against.
struct GraphReference {
  std::vector<double> degrees;
  std::vector<double> clustering;
  std::vector<double> paths;
  std::vector<double> assortativity;

  template <class Rng>
  static GraphReference compute(const AttributedGraph& g, Rng& rng) {
    GraphReference r;
    r.degrees = degree_sequence(g);
    r.clustering = clustering_coefficients(g);
    r.paths = path_lengths(g, rng);
    for (std::size_t a = 0; a < g.num_attributes(); ++a) r.assortativity.push_back(attrsample::assortativity(g, a));
    return r;
  }
};

namespace detail {

inline double ks_or_one(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return 1.0;
  return ks_two_sample(a, b);
}

}  // namespace detail

/// Attribute KS, coverage, degree / clustering / path-length KS and the
/// assortativity gap between a sample and the whole graph. RW samples are
/// compared through their degree-reweighted visit distribution.
template <class Rng>
TaskResult characterize(const AttributedGraph& g, const SymbolTable& sym, const GraphReference& ref,
                        const Sample& sample, Rng& rng) {
  TaskResult res;
  const auto& schema = g.schema();
  const bool reweight = sample.spec.kind == SamplerKind::rw;
  std::span<const NodeId> pop = reweight ? std::span<const NodeId>(sample.visits) : std::span<const NodeId>(sample.nodes);
  if (schema.size() > 0) {
    double ks = 0.0, cov = 0.0;
    for (std::size_t a = 0; a < schema.size(); ++a) {
      if (schema[a].is_discrete()) {
        EmpiricalDistribution full(sym.alphabet(a)), part(sym.alphabet(a));
        for (NodeId v = 0; v < g.num_nodes(); ++v) full.add(sym.symbol(v, a));
        for (NodeId v : pop) part.add(sym.symbol(v, a), reweight ? 1.0 / static_cast<double>(g.degree(v)) : 1.0);
        ks += ks_statistic(part, full);
      } else {
        std::vector<double> xs, ws;
        for (NodeId v : pop) {
          xs.push_back(g.value(v, a));
          ws.push_back(reweight ? 1.0 / static_cast<double>(g.degree(v)) : 1.0);
        }
        std::vector<double> all(g.column(a).begin(), g.column(a).end());
        std::vector<double> ones(all.size(), 1.0);
        ks += ks_two_sample(xs, ws, all, ones);
      }
      cov += coverage(sym, a, sample.nodes);
    }
    res.metrics["attr_ks"] = ks / static_cast<double>(schema.size());
    res.metrics["coverage"] = cov / static_cast<double>(schema.size());
  }
  AttributedGraph sub = sample.induced_subgraph(g);
  res.metrics["degree_ks"] = detail::ks_or_one(degree_sequence(sub), ref.degrees);
  res.metrics["cc_ks"] = detail::ks_or_one(clustering_coefficients(sub), ref.clustering);
  res.metrics["path_ks"] = detail::ks_or_one(path_lengths(sub, rng), ref.paths);
  if (schema.size() > 0) {
    double diff = 0.0;
    for (std::size_t a = 0; a < schema.size(); ++a) diff += std::abs(assortativity(sub, a) - ref.assortativity[a]);
    res.metrics["assortativity_diff"] = diff / static_cast<double>(schema.size());
  }
  return res;
}

/// Distinct discrete-attribute tuples in the sample over those in the graph.
inline double cluster_coverage(const AttributedGraph& g, std::span<const NodeId> sample) {
  auto disc = g.schema().of_kind(AttributeKind::discrete);
  if (disc.empty()) throw ConfigError("cluster coverage needs discrete attributes");
  auto tuple = [&](NodeId v) {
    std::vector<int> t;
    for (auto a : disc) t.push_back(g.category(v, a));
    return t;
  };
  std::set<std::vector<int>> all, hit;
  for (NodeId v = 0; v < g.num_nodes(); ++v) all.insert(tuple(v));
  for (NodeId v : sample) hit.insert(tuple(v));
  return static_cast<double>(hit.size()) / static_cast<double>(all.size());
}

namespace detail {

inline std::vector<Point> continuous_matrix(const AttributedGraph& g, std::span<const NodeId> nodes,
                                            std::span<const std::size_t> attrs) {
  std::vector<Point> pts;
  pts.reserve(nodes.size());
  for (NodeId v : nodes) {
    Point p;
    for (auto a : attrs) p.push_back(g.value(v, a));
    pts.push_back(std::move(p));
  }
  return pts;
}

inline std::size_t distinct_points(const std::vector<Point>& pts) {
  std::set<Point> s(pts.begin(), pts.end());
  return s.size();
}

}  // namespace detail

/// Clustering evaluation. With ground truth: k-means (true k) on the sample's
/// z-scored continuous attributes, NMI against the truth. Without: cluster
/// coverage for discrete attributes and k-means silhouette for continuous ones.
template <class Rng>
TaskResult cluster_task(const AttributedGraph& g, const Sample& sample, const TaskSpec& spec, Rng& rng) {
  TaskResult res;
  auto cont = g.schema().of_kind(AttributeKind::continuous);
  const auto& truth = g.ground_truth();
  if (truth) {
    if (cont.empty()) throw ConfigError("clustering against ground truth needs continuous attributes");
    std::size_t k = spec.clusters;
    if (k == 0) k = std::set<int>(truth->begin(), truth->end()).size();
    auto pts = detail::continuous_matrix(g, sample.nodes, cont);
    if (spec.standardize) pts = Standardizer::fit(pts).apply(pts);
    k = std::min(k, detail::distinct_points(pts));
    auto km = kmeans(pts, std::max<std::size_t>(k, 1), rng);
    std::vector<int> t;
    for (NodeId v : sample.nodes) t.push_back((*truth)[v]);
    res.metrics["nmi"] = nmi(km.labels, t);
    return res;
  }
  if (!g.schema().of_kind(AttributeKind::discrete).empty()) res.metrics["cluster_coverage"] = cluster_coverage(g, sample.nodes);
  if (!cont.empty()) {
    std::size_t k = spec.clusters ? spec.clusters : 5;
    auto pts = detail::continuous_matrix(g, sample.nodes, cont);
    if (spec.standardize) pts = Standardizer::fit(pts).apply(pts);
    k = std::min(k, detail::distinct_points(pts));
    if (k >= 2) {
      auto km = kmeans(pts, k, rng);
      res.metrics["silhouette"] = silhouette(pts, km.labels);
    } else {
      res.warnings.push_back("fewer than two distinct sample points; silhouette not reported");
    }
  }
  return res;
}

/// k-nearest-neighbour model over one-hot discrete and z-scored continuous
/// features. All preprocessing statistics come from the training nodes.
class KnnModel {
 public:
  struct Feature {
    std::size_t attr;
    bool discrete;
    double mean = 0.0;
    double scale = 1.0;
    /// Category ids seen in training, in one-hot column order.
    std::vector<int> vocabulary;
  };

  KnnModel(const AttributedGraph& g, std::vector<std::size_t> features, std::size_t k, bool standardize = true,
           bool one_hot = true)
      : g_(&g), k_(k), standardize_(standardize), one_hot_(one_hot) {
    if (k < 1) throw ConfigError("kNN needs k >= 1");
    for (auto a : features) features_.push_back({a, g.schema()[a].is_discrete(), 0.0, 1.0, {}});
  }

  /// Fits preprocessing and stores the training set.
  void fit(std::span<const NodeId> train, std::span<const double> targets) {
    if (train.size() != targets.size()) throw ContractError("one target per training node required");
    if (train.empty()) throw DataError("kNN needs at least one training node");
    for (auto& f : features_) {
      if (f.discrete) {
        std::set<int> vocab;
        for (NodeId v : train) vocab.insert(g_->category(v, f.attr));
        vocab.erase(-1);
        f.vocabulary.assign(vocab.begin(), vocab.end());
      } else {
        double s = 0.0, ss = 0.0;
        for (NodeId v : train) s += g_->value(v, f.attr);
        f.mean = s / static_cast<double>(train.size());
        for (NodeId v : train) ss += (g_->value(v, f.attr) - f.mean) * (g_->value(v, f.attr) - f.mean);
        f.scale = std::sqrt(ss / static_cast<double>(train.size()));
        if (!(f.scale > 0.0)) f.scale = 1.0;
      }
    }
    x_.clear();
    for (NodeId v : train) x_.push_back(encode(v));
    y_.assign(targets.begin(), targets.end());
  }

  const std::vector<Feature>& features() const noexcept { return features_; }
  const std::vector<Point>& training_points() const noexcept { return x_; }

  Point encode(NodeId v) const {
    Point p;
    for (const auto& f : features_) {
      if (f.discrete) {
        int c = g_->category(v, f.attr);
        if (one_hot_) {
          for (int w : f.vocabulary) p.push_back(c == w ? 1.0 : 0.0);
        } else {
          p.push_back(static_cast<double>(c));
        }
      } else {
        double x = g_->value(v, f.attr);
        p.push_back(standardize_ ? (x - f.mean) / f.scale : x);
      }
    }
    return p;
  }

  /// Indices of the k nearest training points (distance, then index).
  std::vector<std::size_t> nearest(const Point& p) const {
    std::vector<std::pair<double, std::size_t>> d;
    d.reserve(x_.size());
    for (std::size_t i = 0; i < x_.size(); ++i) d.emplace_back(squared_distance(p, x_[i]), i);
    const std::size_t k = std::min(k_, d.size());
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(d[i].second);
    return out;
  }

  /// Majority vote; ties go to the smallest class id.
  int classify(NodeId v) const {
    std::map<int, std::size_t> votes;
    for (auto i : nearest(encode(v))) ++votes[static_cast<int>(y_[i])];
    int best = votes.begin()->first;
    for (const auto& [c, n] : votes)
      if (n > votes[best]) best = c;
    return best;
  }

  double regress(NodeId v) const {
    auto nb = nearest(encode(v));
    double s = 0.0;
    for (auto i : nb) s += y_[i];
    return s / static_cast<double>(nb.size());
  }

 private:
  const AttributedGraph* g_;
  std::size_t k_;
  bool standardize_;
  bool one_hot_;
  std::vector<Feature> features_;
  std::vector<Point> x_;
  std::vector<double> y_;
};

/// Trains kNN on the sampled nodes and evaluates on every other node:
/// weighted F1 for a discrete target, R² for a continuous one.
inline TaskResult classify_task(const AttributedGraph& g, const Sample& sample, const TaskSpec& spec) {
  TaskResult res;
  const auto& schema = g.schema();
  std::optional<std::size_t> target;
  bool use_truth = false;
  if (!spec.target.empty()) {
    target = schema.index(spec.target);
  } else if (g.ground_truth()) {
    use_truth = true;
  } else {
    auto disc = schema.of_kind(AttributeKind::discrete);
    if (disc.empty()) throw ConfigError("classification needs a target attribute");
    target = disc.front();
  }
  std::vector<std::size_t> features;
  if (spec.features.empty()) {
    for (std::size_t a = 0; a < schema.size(); ++a)
      if (!target || a != *target) features.push_back(a);
  } else {
    for (const auto& f : spec.features) features.push_back(schema.index(f));
  }
  if (features.empty()) throw ConfigError("classification needs at least one feature");

  const bool discrete_target = use_truth || schema[*target].is_discrete();
  auto y_of = [&](NodeId v) -> double {
    if (use_truth) return (*g.ground_truth())[v];
    return discrete_target ? g.category(v, *target) : g.value(v, *target);
  };
  std::vector<double> y;
  for (NodeId v : sample.nodes) y.push_back(y_of(v));
  std::vector<std::uint8_t> in(g.num_nodes(), 0);
  for (NodeId v : sample.nodes) in[v] = 1;
  std::vector<NodeId> test;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (!in[v]) test.push_back(v);
  if (test.empty()) throw DataError("no non-sampled nodes left to evaluate on");

  KnnModel model(g, features, spec.neighbors, spec.standardize, spec.one_hot);
  model.fit(sample.nodes, y);
  if (discrete_target) {
    if (std::set<double>(y.begin(), y.end()).size() < 2)
      res.warnings.push_back("training sample holds a single class; the model is degenerate");
    std::vector<int> truth, pred;
    for (NodeId v : test) {
      truth.push_back(static_cast<int>(y_of(v)));
      pred.push_back(model.classify(v));
    }
    res.metrics["f1"] = weighted_f1(truth, pred);
  } else {
    if (y.size() < 5) res.warnings.push_back("fewer than five training points for regression");
    std::vector<double> truth, pred;
    for (NodeId v : test) {
      truth.push_back(y_of(v));
      pred.push_back(model.regress(v));
    }
    res.metrics["r2"] = r_squared(truth, pred);
  }
  return res;
}

}  // namespace attrsample
