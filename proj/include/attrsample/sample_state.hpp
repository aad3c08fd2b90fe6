#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "attrsample/error.hpp"
#include "attrsample/graph.hpp"
#include "attrsample/surprise.hpp"

namespace attrsample {

/// Which neighbours of a frontier node v form its candidate extension Δv.
enum class DeltaRule {
  /// Δv = N(v) \ S
  excl_sample,
  /// Δv = N(v) \ (S ∪ N(S))
  excl_sample_and_frontier,
};

/// The growing sample S, its frontier N(S) and per-attribute symbol counts
/// over S. Updated incrementally by `extend`. Holds non-owning references
/// to the graph and symbol table, which must outlive it.
class SampleState {
 public:
  SampleState(const AttributedGraph& graph, const SymbolTable& symbols, DeltaRule rule = DeltaRule::excl_sample)
      : graph_(&graph),
        symbols_(&symbols),
        rule_(rule),
        status_(graph.num_nodes(), kOutside),
        sampled_neighbors_(graph.num_nodes(), 0),
        unexplored_(graph.num_nodes(), 0) {
    for (NodeId v = 0; v < graph.num_nodes(); ++v) unexplored_[v] = static_cast<std::uint32_t>(graph.degree(v));
    dists_.reserve(symbols.num_attributes());
    for (std::size_t a = 0; a < symbols.num_attributes(); ++a) dists_.emplace_back(symbols.alphabet(a));
  }

  const AttributedGraph& graph() const noexcept { return *graph_; }
  const SymbolTable& symbols() const noexcept { return *symbols_; }
  DeltaRule delta_rule() const noexcept { return rule_; }

  std::size_t size() const noexcept { return sample_.size(); }
  bool empty() const noexcept { return sample_.empty(); }
  std::size_t step() const noexcept { return sample_.size(); }

  const std::vector<NodeId>& sample() const noexcept { return sample_; }
  const std::set<NodeId>& frontier() const noexcept { return frontier_; }

  bool in_sample(NodeId v) const { return status_[v] == kSampled; }
  bool in_frontier(NodeId v) const { return status_[v] == kFrontier; }

  /// Number of sampled neighbours of v.
  std::size_t sampled_neighbors(NodeId v) const { return sampled_neighbors_[v]; }

  /// |N(v) \ (S ∪ N(S))|, the expansion count used by XS.
  std::size_t unexplored(NodeId v) const { return unexplored_[v]; }

  /// Δv under the configured rule, ascending ids.
  std::vector<NodeId> delta(NodeId v) const {
    std::vector<NodeId> out;
    for_each_delta(v, [&](NodeId w) { out.push_back(w); });
    return out;
  }

  std::size_t delta_size(NodeId v) const {
    if (rule_ == DeltaRule::excl_sample) return graph_->degree(v) - sampled_neighbors_[v];
    return unexplored_[v];
  }

  template <class F>
  void for_each_delta(NodeId v, F&& f) const {
    for (NodeId w : graph_->neighbors(v)) {
      if (status_[w] == kSampled) continue;
      if (rule_ == DeltaRule::excl_sample_and_frontier && status_[w] == kFrontier) continue;
      f(w);
    }
  }

  /// Symbols of the candidate set v ∪ Δv for one attribute, v first.
  void candidate_symbols(NodeId v, std::size_t attr, std::vector<int>& out) const {
    out.clear();
    auto col = symbols_->column(attr);
    out.push_back(col[v]);
    for_each_delta(v, [&](NodeId w) { out.push_back(col[w]); });
  }

  /// Empirical symbol distribution of one attribute over S.
  const EmpiricalDistribution& distribution(std::size_t attr) const { return dists_.at(attr); }

  /// Same as `distribution`, but rejects an empty sample.
  const EmpiricalDistribution& empirical_distribution(std::size_t attr) const {
    if (sample_.empty()) throw ContractError("empirical distribution of an empty sample");
    return dists_.at(attr);
  }

  /// Adds `v` to S. Requires v ∈ N(S), or S empty (seed).
  void extend(NodeId v) {
    if (v >= graph_->num_nodes()) throw ContractError("node id out of range");
    if (status_[v] == kSampled) throw ContractError("node " + std::to_string(v) + " is already sampled");
    if (!sample_.empty() && status_[v] != kFrontier)
      throw ContractError("node " + std::to_string(v) + " is not on the frontier");
    extend_unchecked(v);
  }

  /// Adds `v` to S without the link-trace precondition (uniform sampling).
  void extend_any(NodeId v) {
    if (v >= graph_->num_nodes()) throw ContractError("node id out of range");
    if (status_[v] == kSampled) throw ContractError("node " + std::to_string(v) + " is already sampled");
    extend_unchecked(v);
  }

 private:
  static constexpr std::uint8_t kOutside = 0;
  static constexpr std::uint8_t kFrontier = 1;
  static constexpr std::uint8_t kSampled = 2;

  // Marks w as explored (moved into S ∪ N(S)); its neighbours lose one
  // unexplored neighbour each.
  void mark_explored(NodeId w) {
    for (NodeId x : graph_->neighbors(w)) --unexplored_[x];
  }

  void extend_unchecked(NodeId v) {
    if (status_[v] == kOutside)
      mark_explored(v);
    else
      frontier_.erase(v);
    status_[v] = kSampled;
    sample_.push_back(v);
    for (NodeId w : graph_->neighbors(v)) {
      ++sampled_neighbors_[w];
      if (status_[w] == kOutside) {
        status_[w] = kFrontier;
        frontier_.insert(w);
        mark_explored(w);
      }
    }
    for (std::size_t a = 0; a < dists_.size(); ++a) dists_[a].add(symbols_->symbol(v, a));
  }

  const AttributedGraph* graph_;
  const SymbolTable* symbols_;
  DeltaRule rule_;
  std::vector<NodeId> sample_;
  std::set<NodeId> frontier_;
  std::vector<std::uint8_t> status_;
  std::vector<std::uint32_t> sampled_neighbors_;
  std::vector<std::uint32_t> unexplored_;
  std::vector<EmpiricalDistribution> dists_;
};

}  // namespace attrsample
