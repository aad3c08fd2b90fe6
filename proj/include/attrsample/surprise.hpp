#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "attrsample/error.hpp"
#include "attrsample/graph.hpp"

namespace attrsample {

enum class BinningKind { log, linear };

/// Maps a continuous value onto one of `bins` equal-width bins over
/// [min, max], either in linear or logarithmic space. For log binning a
/// non-positive minimum is shifted so that it maps to 1 before taking logs.
struct BinningRule {
  BinningKind kind = BinningKind::log;
  std::size_t bins = 10;
  double min = 0.0;
  double max = 0.0;

  double shift() const noexcept { return (kind == BinningKind::log && min <= 0.0) ? 1.0 - min : 0.0; }

  double transform(double x) const {
    return kind == BinningKind::log ? std::log(std::max(x + shift(), min + shift())) : x;
  }

  int bin(double x) const {
    if (bins == 0) throw ConfigError("bin count must be at least 1");
    if (is_missing(x)) return -1;
    const double lo = transform(min);
    const double hi = transform(max);
    if (!(hi > lo)) return 0;
    double t = (transform(std::clamp(x, min, max)) - lo) / (hi - lo);
    auto b = static_cast<long>(std::floor(t * static_cast<double>(bins)));
    return static_cast<int>(std::clamp<long>(b, 0, static_cast<long>(bins) - 1));
  }
};

/// Per-attribute integer symbols for every node: category ids for discrete
/// attributes, bin ids for continuous ones. -1 marks a missing value.
class SymbolTable {
 public:
  SymbolTable() = default;

  SymbolTable(const AttributedGraph& g, BinningKind kind = BinningKind::log, std::size_t bins = 10) {
    const auto& schema = g.schema();
    symbols_.resize(schema.size());
    alphabet_.resize(schema.size());
    for (std::size_t a = 0; a < schema.size(); ++a) {
      auto& col = symbols_[a];
      col.resize(g.num_nodes());
      if (schema[a].is_discrete()) {
        alphabet_[a] = std::max<std::size_t>(schema[a].cardinality(), 1);
        for (NodeId v = 0; v < g.num_nodes(); ++v) col[v] = g.category(v, a);
      } else {
        BinningRule rule{kind, bins, schema[a].min, schema[a].max};
        alphabet_[a] = bins;
        for (NodeId v = 0; v < g.num_nodes(); ++v) col[v] = rule.bin(g.value(v, a));
      }
    }
  }

  std::size_t num_attributes() const noexcept { return symbols_.size(); }
  std::size_t alphabet(std::size_t attr) const { return alphabet_.at(attr); }
  int symbol(NodeId v, std::size_t attr) const { return symbols_[attr][v]; }
  std::span<const int> column(std::size_t attr) const { return symbols_.at(attr); }

  /// Appends a derived attribute column (used for cluster ids).
  std::size_t add_column(std::vector<int> col, std::size_t alphabet) {
    symbols_.push_back(std::move(col));
    alphabet_.push_back(alphabet);
    return symbols_.size() - 1;
  }

 private:
  std::vector<std::vector<int>> symbols_;
  std::vector<std::size_t> alphabet_;
};

/// Weighted counts over an integer alphabet; p(i) = count(i) / total.
struct EmpiricalDistribution {
  std::vector<double> counts;
  double total = 0.0;

  EmpiricalDistribution() = default;
  explicit EmpiricalDistribution(std::size_t alphabet) : counts(alphabet, 0.0) {}

  static EmpiricalDistribution from_probabilities(std::vector<double> p) {
    EmpiricalDistribution d;
    for (double x : p)
      if (x < 0.0 || !std::isfinite(x)) throw ConfigError("probabilities must be finite and non-negative");
    d.total = 0.0;
    for (double x : p) d.total += x;
    d.counts = std::move(p);
    return d;
  }

  void add(int symbol, double weight = 1.0) {
    if (symbol < 0) return;
    if (static_cast<std::size_t>(symbol) >= counts.size()) counts.resize(symbol + 1, 0.0);
    counts[symbol] += weight;
    total += weight;
  }

  double probability(int symbol) const {
    if (symbol < 0 || static_cast<std::size_t>(symbol) >= counts.size() || total <= 0.0) return 0.0;
    return counts[symbol] / total;
  }

  std::vector<double> probabilities() const {
    std::vector<double> p(counts.size(), 0.0);
    if (total > 0.0)
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = counts[i] / total;
    return p;
  }

  std::size_t support_size() const {
    return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }));
  }
};

/// Surprise of a candidate set. Divergent scores (an attribute value unseen
/// in the reference) carry the number of distinct unseen values. The total
/// order ranks finite scores below divergent ones, and divergent ones by
/// their unseen count.
struct SurpriseScore {
  double value = 0.0;
  std::size_t unseen = 0;

  bool divergent() const noexcept { return unseen > 0; }

  static SurpriseScore finite(double v) { return {v, 0}; }
  static SurpriseScore diverged(std::size_t unseen_count) {
    return {std::numeric_limits<double>::infinity(), unseen_count};
  }

  SurpriseScore& operator+=(const SurpriseScore& o) {
    if (o.divergent() || divergent()) {
      unseen += o.unseen;
      value = std::numeric_limits<double>::infinity();
    } else {
      value += o.value;
    }
    return *this;
  }
  friend SurpriseScore operator+(SurpriseScore a, const SurpriseScore& b) { return a += b; }

  friend std::partial_ordering operator<=>(const SurpriseScore& a, const SurpriseScore& b) {
    if (a.divergent() != b.divergent()) return a.divergent() ? std::partial_ordering::greater : std::partial_ordering::less;
    if (a.divergent()) return a.unseen <=> b.unseen;
    return a.value <=> b.value;
  }
  friend bool operator==(const SurpriseScore& a, const SurpriseScore& b) { return (a <=> b) == 0; }
};

/// Mean negative log-likelihood of the candidate's symbols under `reference`:
///   I = -sum_i p_candidate(i) ln p_ref(i).
/// Missing symbols (-1) are skipped. Any symbol with p_ref = 0 diverges.
template <class ProbFn>
SurpriseScore surprise_with(std::span<const int> candidate, ProbFn&& prob) {
  double acc = 0.0;
  std::size_t m = 0;
  std::vector<int> unseen;
  for (int s : candidate) {
    if (s < 0) continue;
    double p = prob(s);
    if (p <= 0.0) {
      if (std::find(unseen.begin(), unseen.end(), s) == unseen.end()) unseen.push_back(s);
      continue;
    }
    acc -= std::log(p);
    ++m;
  }
  if (!unseen.empty()) return SurpriseScore::diverged(unseen.size());
  return SurpriseScore::finite(m ? acc / static_cast<double>(m) : 0.0);
}

inline SurpriseScore surprise(std::span<const int> candidate, const EmpiricalDistribution& reference) {
  if (reference.total <= 0.0) throw ContractError("surprise requires a non-empty reference distribution");
  return surprise_with(candidate, [&](int s) { return reference.probability(s); });
}

/// Sum of per-attribute scores; divergence is absorbing and unseen counts add.
inline SurpriseScore multi_attribute_surprise(std::span<const std::vector<int>> per_attribute_candidates,
                                              std::span<const EmpiricalDistribution> references) {
  if (per_attribute_candidates.size() != references.size())
    throw ContractError("candidate/reference attribute count mismatch");
  SurpriseScore total;
  for (std::size_t a = 0; a < references.size(); ++a) total += surprise(per_attribute_candidates[a], references[a]);
  return total;
}

/// Degree-reweighted (Hansen-Hurwitz) distribution estimate from a random
/// walk visit sequence: each visit contributes weight 1/degree.
struct WeightedVisit {
  std::size_t degree;
  int symbol;
};

inline EmpiricalDistribution hansen_hurwitz_estimate(std::span<const WeightedVisit> visits, std::size_t alphabet) {
  if (visits.empty()) throw DataError("Hansen-Hurwitz estimate needs at least one visit");
  EmpiricalDistribution d(alphabet);
  for (const auto& v : visits) {
    if (v.degree == 0) throw ContractError("Hansen-Hurwitz estimate requires degrees >= 1");
    d.add(v.symbol, 1.0 / static_cast<double>(v.degree));
  }
  return d;
}

/// Convenience overload over a visit sequence on `g` for one attribute.
inline EmpiricalDistribution hansen_hurwitz_estimate(const AttributedGraph& g, const SymbolTable& symbols,
                                                     std::span<const NodeId> visits, std::size_t attr) {
  std::vector<WeightedVisit> w;
  w.reserve(visits.size());
  for (NodeId v : visits) w.push_back({g.degree(v), symbols.symbol(v, attr)});
  return hansen_hurwitz_estimate(w, symbols.alphabet(attr));
}

}  // namespace attrsample
