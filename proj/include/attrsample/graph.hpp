#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "attrsample/error.hpp"

namespace attrsample {

using NodeId = std::uint32_t;

enum class AttributeKind { discrete, continuous };

/// Marker for an absent attribute value.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double x) noexcept { return std::isnan(x); }

struct AttributeInfo {
  std::string name;
  AttributeKind kind = AttributeKind::discrete;
  /// Category labels, indexed by category id (discrete only).
  std::vector<std::string> categories;
  /// Observed range (continuous only).
  double min = 0.0;
  double max = 0.0;

  bool is_discrete() const noexcept { return kind == AttributeKind::discrete; }
  std::size_t cardinality() const noexcept { return categories.size(); }
};

class AttributeSchema {
 public:
  std::size_t size() const noexcept { return attrs_.size(); }
  bool empty() const noexcept { return attrs_.empty(); }
  const AttributeInfo& operator[](std::size_t i) const { return attrs_.at(i); }
  AttributeInfo& operator[](std::size_t i) { return attrs_.at(i); }
  auto begin() const { return attrs_.begin(); }
  auto end() const { return attrs_.end(); }

  std::size_t add(AttributeInfo info) {
    if (find(info.name)) throw DataError("duplicate attribute name '" + info.name + "'");
    attrs_.push_back(std::move(info));
    return attrs_.size() - 1;
  }

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < attrs_.size(); ++i)
      if (attrs_[i].name == name) return i;
    return std::nullopt;
  }

  std::size_t index(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw ConfigError("unknown attribute '" + std::string(name) + "'");
  }

  std::vector<std::size_t> of_kind(AttributeKind kind) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < attrs_.size(); ++i)
      if (attrs_[i].kind == kind) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> all() const {
    std::vector<std::size_t> out(attrs_.size());
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }

 private:
  std::vector<AttributeInfo> attrs_;
};

/// Undirected simple graph in CSR form with per-node attribute columns.
/// Node ids are dense in [0, n); the external id of each node is retained.
class AttributedGraph {
 public:
  AttributedGraph() = default;

  /// Builds a simple undirected graph. Self-loops are dropped and parallel
  /// edges collapsed. `ids` may be empty, in which case ids are "0".."n-1".
  static AttributedGraph from_edges(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edges,
                                    std::vector<std::string> ids = {}) {
    AttributedGraph g;
    std::vector<std::pair<NodeId, NodeId>> arcs;
    arcs.reserve(edges.size() * 2);
    for (auto [u, v] : edges) {
      if (u >= n || v >= n) throw ContractError("edge endpoint out of range");
      if (u == v) continue;
      arcs.emplace_back(u, v);
      arcs.emplace_back(v, u);
    }
    std::sort(arcs.begin(), arcs.end());
    arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
    g.offsets_.assign(n + 1, 0);
    for (auto [u, v] : arcs) ++g.offsets_[u + 1];
    std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
    g.targets_.reserve(arcs.size());
    for (auto [u, v] : arcs) g.targets_.push_back(v);
    if (ids.empty()) {
      ids.reserve(n);
      for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
    }
    if (ids.size() != n) throw ContractError("external id table size mismatch");
    g.ids_ = std::move(ids);
    g.id_index_.reserve(n);
    for (NodeId v = 0; v < n; ++v) g.id_index_.emplace(g.ids_[v], v);
    return g;
  }

  std::size_t num_nodes() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const noexcept { return targets_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

  bool has_edge(NodeId u, NodeId v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  template <class F>
  void for_each_edge(F&& f) const {
    for (NodeId u = 0; u < num_nodes(); ++u)
      for (NodeId v : neighbors(u))
        if (u < v) f(u, v);
  }

  const std::vector<std::string>& external_ids() const noexcept { return ids_; }
  const std::string& external_id(NodeId v) const { return ids_.at(v); }

  std::optional<NodeId> find_node(std::string_view id) const {
    auto it = id_index_.find(std::string(id));
    if (it == id_index_.end()) return std::nullopt;
    return it->second;
  }

  const AttributeSchema& schema() const noexcept { return schema_; }
  std::size_t num_attributes() const noexcept { return schema_.size(); }

  /// Raw value of an attribute. Discrete values are category ids stored as
  /// doubles; `kMissing` marks an absent value.
  double value(NodeId v, std::size_t attr) const { return columns_.at(attr)[v]; }
  std::span<const double> column(std::size_t attr) const { return columns_.at(attr); }

  /// Category id of a discrete attribute, -1 when missing.
  int category(NodeId v, std::size_t attr) const {
    double x = value(v, attr);
    return is_missing(x) ? -1 : static_cast<int>(x);
  }

  bool has_missing(NodeId v) const {
    for (const auto& col : columns_)
      if (is_missing(col[v])) return true;
    return false;
  }

  /// Replaces schema and columns. Columns must have one entry per node.
  void set_attributes(AttributeSchema schema, std::vector<std::vector<double>> columns) {
    if (columns.size() != schema.size()) throw ContractError("column count does not match schema");
    for (const auto& c : columns)
      if (c.size() != num_nodes()) throw ContractError("attribute column length mismatch");
    schema_ = std::move(schema);
    columns_ = std::move(columns);
  }

  /// Ground-truth cluster ids, present for generated graphs.
  const std::optional<std::vector<int>>& ground_truth() const noexcept { return truth_; }
  void set_ground_truth(std::vector<int> labels) {
    if (labels.size() != num_nodes()) throw ContractError("ground truth length mismatch");
    truth_ = std::move(labels);
  }

  /// Subgraph induced on `nodes`; new id i corresponds to nodes[i].
  /// Attributes, external ids and ground truth are carried over. Continuous
  /// ranges are recomputed only when `refresh_ranges` is set.
  AttributedGraph induced(std::span<const NodeId> nodes, bool refresh_ranges = false) const {
    std::vector<NodeId> remap(num_nodes(), kNone);
    for (NodeId i = 0; i < nodes.size(); ++i) {
      if (remap[nodes[i]] != kNone) throw ContractError("duplicate node in induced subgraph");
      remap[nodes[i]] = i;
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId i = 0; i < nodes.size(); ++i)
      for (NodeId w : neighbors(nodes[i]))
        if (remap[w] != kNone && i < remap[w]) edges.emplace_back(i, remap[w]);
    std::vector<std::string> ids;
    ids.reserve(nodes.size());
    for (NodeId v : nodes) ids.push_back(ids_[v]);
    AttributedGraph g = from_edges(nodes.size(), edges, std::move(ids));
    std::vector<std::vector<double>> cols(columns_.size());
    for (std::size_t a = 0; a < columns_.size(); ++a) {
      cols[a].reserve(nodes.size());
      for (NodeId v : nodes) cols[a].push_back(columns_[a][v]);
    }
    AttributeSchema schema = schema_;
    if (refresh_ranges) refresh_continuous_ranges(schema, cols);
    g.schema_ = std::move(schema);
    g.columns_ = std::move(cols);
    if (truth_) {
      std::vector<int> t;
      t.reserve(nodes.size());
      for (NodeId v : nodes) t.push_back((*truth_)[v]);
      g.truth_ = std::move(t);
    }
    return g;
  }

  static void refresh_continuous_ranges(AttributeSchema& schema,
                                        const std::vector<std::vector<double>>& cols) {
    for (std::size_t a = 0; a < schema.size(); ++a) {
      if (schema[a].is_discrete()) continue;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (double x : cols[a]) {
        if (is_missing(x)) continue;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
      if (lo > hi) lo = hi = 0.0;
      schema[a].min = lo;
      schema[a].max = hi;
    }
  }

  static constexpr NodeId kNone = std::numeric_limits<NodeId>::max();

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> targets_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, NodeId> id_index_;
  AttributeSchema schema_;
  std::vector<std::vector<double>> columns_;
  std::optional<std::vector<int>> truth_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

/// Splits one CSV record. Double-quoted fields may contain commas and "".
inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::string(trim(cur)));
      cur.clear();
    } else if (c != '\r' && c != '\n') {
      cur.push_back(c);
    }
  }
  out.push_back(std::string(trim(cur)));
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  // std::from_chars for double is incomplete on older toolchains.
  std::string tmp(s);
  char* end = nullptr;
  double x = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size() || std::isnan(x)) return std::nullopt;
  return x;
}

}  // namespace detail

/// Reads an edge list: one edge per line, two tokens separated by
/// whitespace and/or a comma, `#` starts a comment. Node ids are assigned
/// densely in first-seen order.
inline AttributedGraph read_edge_list(std::istream& in, const std::string& source = "<edges>") {
  std::unordered_map<std::string, NodeId> index;
  std::vector<std::string> ids;
  std::vector<std::pair<NodeId, NodeId>> edges;
  auto intern = [&](std::string tok) {
    auto [it, inserted] = index.emplace(tok, static_cast<NodeId>(ids.size()));
    if (inserted) ids.push_back(std::move(tok));
    return it->second;
  };
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line)
      if (c == ',' || c == '\t' || c == '\r') c = ' ';
    std::istringstream ss(line);
    std::vector<std::string> toks;
    for (std::string t; ss >> t;) toks.push_back(std::move(t));
    if (toks.empty()) continue;
    if (toks.size() != 2)
      throw ParseError(source, lineno, "expected two node tokens, found " + std::to_string(toks.size()));
    NodeId u = intern(std::move(toks[0]));
    NodeId v = intern(std::move(toks[1]));
    edges.emplace_back(u, v);
  }
  if (ids.empty()) throw DataError(source + ": empty graph");
  const std::size_t n = ids.size();
  return AttributedGraph::from_edges(n, edges, std::move(ids));
}

inline AttributedGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list '" + path + "'");
  return read_edge_list(in, path);
}

/// Reads an attribute table and joins it onto `graph`.
///
/// Header: first column is the node id; remaining columns are prefixed
/// `d:` (discrete), `c:` (continuous) or `g:` (ground-truth cluster id, at
/// most one). Empty fields are recorded as missing. Nodes without a row get
/// all-missing values. Category ids are assigned in numeric order when all
/// labels are numbers, otherwise in lexicographic order.
inline AttributedGraph read_attributes(std::istream& in, AttributedGraph graph,
                                       const std::string& source = "<attributes>") {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::trim(line).empty()) {
      header = detail::split_csv(line);
      break;
    }
  }
  if (header.size() < 2) throw ParseError(source, lineno, "header needs an id column and at least one attribute");

  struct Column {
    AttributeKind kind;
    bool truth = false;
    std::string name;
    std::vector<std::string> raw;
  };
  const std::size_t n = graph.num_nodes();
  std::vector<Column> cols;
  for (std::size_t i = 1; i < header.size(); ++i) {
    const std::string& h = header[i];
    if (h.size() < 3 || h[1] != ':' || (h[0] != 'd' && h[0] != 'c' && h[0] != 'g'))
      throw ParseError(source, lineno, "column '" + h + "' must be prefixed d:, c: or g:");
    Column c;
    c.kind = h[0] == 'c' ? AttributeKind::continuous : AttributeKind::discrete;
    c.truth = h[0] == 'g';
    c.name = h.substr(2);
    c.raw.assign(n, std::string());
    cols.push_back(std::move(c));
  }
  if (std::count_if(cols.begin(), cols.end(), [](const Column& c) { return c.truth; }) > 1)
    throw ParseError(source, lineno, "at most one g: column is allowed");

  std::vector<bool> seen(n, false);
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv(line);
    if (fields.size() != header.size())
      throw ParseError(source, lineno,
                       "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    auto v = graph.find_node(fields[0]);
    if (!v) throw DataError(source + ":" + std::to_string(lineno) + ": unknown node id '" + fields[0] + "'");
    if (seen[*v]) throw DataError(source + ":" + std::to_string(lineno) + ": duplicate row for node '" + fields[0] + "'");
    seen[*v] = true;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const std::string& f = fields[i + 1];
      if (!f.empty() && cols[i].kind == AttributeKind::continuous && !detail::parse_double(f))
        throw ParseError(source, lineno, "non-numeric value '" + f + "' in column c:" + cols[i].name);
      cols[i].raw[*v] = f;
    }
  }

  AttributeSchema schema;
  std::vector<std::vector<double>> values;
  std::optional<std::vector<int>> truth;
  for (auto& c : cols) {
    std::vector<double> col(n, kMissing);
    AttributeInfo info;
    info.name = c.name;
    info.kind = c.kind;
    if (c.kind == AttributeKind::continuous) {
      for (std::size_t v = 0; v < n; ++v)
        if (!c.raw[v].empty()) col[v] = *detail::parse_double(c.raw[v]);
    } else {
      std::vector<std::string> labels;
      for (const auto& r : c.raw)
        if (!r.empty()) labels.push_back(r);
      std::sort(labels.begin(), labels.end());
      labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
      bool numeric = std::all_of(labels.begin(), labels.end(),
                                 [](const std::string& s) { return detail::parse_double(s).has_value(); });
      if (numeric)
        std::stable_sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
          return *detail::parse_double(a) < *detail::parse_double(b);
        });
      std::unordered_map<std::string, int> code;
      for (std::size_t i = 0; i < labels.size(); ++i) code.emplace(labels[i], static_cast<int>(i));
      for (std::size_t v = 0; v < n; ++v)
        if (!c.raw[v].empty()) col[v] = code.at(c.raw[v]);
      info.categories = std::move(labels);
    }
    if (c.truth) {
      std::vector<int> t(n, -1);
      for (std::size_t v = 0; v < n; ++v)
        if (!is_missing(col[v])) t[v] = static_cast<int>(col[v]);
      truth = std::move(t);
      continue;
    }
    schema.add(std::move(info));
    values.push_back(std::move(col));
  }
  AttributedGraph::refresh_continuous_ranges(schema, values);
  graph.set_attributes(std::move(schema), std::move(values));
  if (truth) graph.set_ground_truth(std::move(*truth));
  return graph;
}

inline AttributedGraph load_attributes(const std::string& path, AttributedGraph graph) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open attribute table '" + path + "'");
  return read_attributes(in, std::move(graph), path);
}

/// Connected-component id per node, components numbered by smallest member.
inline std::vector<std::size_t> connected_components(const AttributedGraph& g, std::size_t* count = nullptr) {
  const std::size_t n = g.num_nodes();
  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> comp(n, kUnset);
  std::vector<NodeId> stack;
  std::size_t next = 0;
  for (NodeId s = 0; s < n; ++s) {
    if (comp[s] != kUnset) continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (NodeId w : g.neighbors(u))
        if (comp[w] == kUnset) {
          comp[w] = next;
          stack.push_back(w);
        }
    }
    ++next;
  }
  if (count) *count = next;
  return comp;
}

/// Induced subgraph on the largest connected component. Among equally large
/// components the one containing the smallest node id wins.
inline AttributedGraph largest_connected_component(const AttributedGraph& g) {
  if (g.num_nodes() == 0) return g;
  std::size_t count = 0;
  auto comp = connected_components(g, &count);
  std::vector<std::size_t> sizes(count, 0);
  for (auto c : comp) ++sizes[c];
  std::size_t best = static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  if (count == 1) return g;
  std::vector<NodeId> keep;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (comp[v] == best) keep.push_back(v);
  return g.induced(keep, true);
}

/// Removes every node with at least one missing attribute value.
inline AttributedGraph drop_missing(const AttributedGraph& g) {
  std::vector<NodeId> keep;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (!g.has_missing(v)) keep.push_back(v);
  if (keep.size() == g.num_nodes()) return g;
  return g.induced(keep, true);
}

/// Sampling-ready preprocessing: optional missing-value removal, then the
/// largest connected component.
inline AttributedGraph prepare_for_sampling(const AttributedGraph& g, bool remove_missing = true) {
  AttributedGraph out = remove_missing ? drop_missing(g) : g;
  if (out.num_nodes() == 0) throw DataError("no nodes left after removing missing values");
  return largest_connected_component(out);
}

/// Shortest decimal form that round-trips a double exactly.
inline std::string format_real(double x) {
  if (is_missing(x)) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace detail

/// One "u v" line per edge, using external ids.
inline void write_edge_list(const AttributedGraph& g, std::ostream& out) {
  g.for_each_edge([&](NodeId u, NodeId v) { out << g.external_id(u) << ' ' << g.external_id(v) << '\n'; });
}

/// Attribute table in the format accepted by `read_attributes`; ground truth
/// becomes a trailing `g:cluster` column.
inline void write_attributes(const AttributedGraph& g, std::ostream& out) {
  const auto& schema = g.schema();
  out << "id";
  for (const auto& a : schema) out << ',' << (a.is_discrete() ? "d:" : "c:") << detail::csv_field(a.name);
  if (g.ground_truth()) out << ",g:cluster";
  out << '\n';
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    out << detail::csv_field(g.external_id(v));
    for (std::size_t a = 0; a < schema.size(); ++a) {
      out << ',';
      if (schema[a].is_discrete()) {
        int c = g.category(v, a);
        if (c >= 0) out << detail::csv_field(schema[a].categories.at(c));
      } else {
        out << format_real(g.value(v, a));
      }
    }
    if (g.ground_truth()) out << ',' << (*g.ground_truth())[v];
    out << '\n';
  }
}

}  // namespace attrsample
