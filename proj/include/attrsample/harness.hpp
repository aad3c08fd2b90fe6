#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "attrsample/error.hpp"
#include "attrsample/generator.hpp"
#include "attrsample/graph.hpp"
#include "attrsample/metrics.hpp"
#include "attrsample/samplers.hpp"
#include "attrsample/tasks.hpp"
#include "json.hpp"

namespace attrsample {

struct SamplerEntry {
  std::string label;
  SamplerSpec spec;
};

struct GraphSource {
  std::string edges;
  std::string attributes;
  bool drop_missing = true;
  std::optional<SyntheticSpec> synthetic;
};

struct ExperimentConfig {
  GraphSource graph;
  std::vector<SamplerEntry> samplers;
  std::vector<double> fractions = {0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10};
  std::size_t repetitions = 100;
  std::vector<TaskSpec> tasks;
  std::string output;
  std::uint64_t master_seed = 1;
  std::size_t threads = 1;
  /// Sampler label every other sampler is compared against; empty picks UNI
  /// when present, else the first sampler.
  std::string baseline;
  std::size_t permutations = 10000;

  void validate() const {
    if (samplers.empty()) throw ConfigError("experiment needs at least one sampler");
    if (tasks.empty()) throw ConfigError("experiment needs at least one task");
    if (fractions.empty()) throw ConfigError("experiment needs at least one sample fraction");
    for (double f : fractions)
      if (!(f > 0.0 && f <= 1.0)) throw ConfigError("sample fractions must lie in (0,1]");
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (permutations < 1) throw ConfigError("permutations must be >= 1");
    std::set<std::string> labels;
    for (const auto& s : samplers)
      if (!labels.insert(s.label).second) throw ConfigError("duplicate sampler label '" + s.label + "'");
    if (!baseline.empty() && !labels.count(baseline)) throw ConfigError("baseline '" + baseline + "' is not a sampler");
    if (!graph.synthetic && graph.edges.empty()) throw ConfigError("experiment needs an edge list or a synthetic spec");
  }

  std::string baseline_label() const {
    if (!baseline.empty()) return baseline;
    for (const auto& s : samplers)
      if (s.spec.kind == SamplerKind::uni) return s.label;
    return samplers.front().label;
  }
};

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  nlohmann::json graph;
  if (c.graph.synthetic) {
    graph["synthetic"] = *c.graph.synthetic;
  } else {
    graph["edges"] = c.graph.edges;
    if (!c.graph.attributes.empty()) graph["attributes"] = c.graph.attributes;
    graph["drop_missing"] = c.graph.drop_missing;
  }
  nlohmann::json samplers = nlohmann::json::array();
  for (const auto& s : c.samplers) {
    nlohmann::json e = s.spec;
    e["label"] = s.label;
    samplers.push_back(e);
  }
  j = {{"graph", graph},           {"samplers", samplers},   {"fractions", c.fractions},
       {"repetitions", c.repetitions}, {"tasks", c.tasks},   {"master_seed", c.master_seed},
       {"threads", c.threads},     {"baseline", c.baseline_label()}, {"permutations", c.permutations}};
  if (!c.output.empty()) j["output"] = c.output;
}

inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  c = ExperimentConfig{};
  for (const auto& [key, val] : j.items()) {
    if (key == "graph") {
      if (val.contains("synthetic")) {
        c.graph.synthetic = val.at("synthetic").get<SyntheticSpec>();
      } else {
        c.graph.edges = val.at("edges").get<std::string>();
        c.graph.attributes = val.value("attributes", std::string());
        c.graph.drop_missing = val.value("drop_missing", true);
      }
    } else if (key == "samplers") {
      for (const auto& e : val) {
        SamplerEntry s;
        s.spec = e.get<SamplerSpec>();
        s.label = e.is_object() && e.contains("label") ? e.at("label").get<std::string>() : std::string(to_string(s.spec.kind));
        c.samplers.push_back(std::move(s));
      }
    } else if (key == "fractions") c.fractions = val.get<std::vector<double>>();
    else if (key == "repetitions") c.repetitions = val.get<std::size_t>();
    else if (key == "tasks") c.tasks = val.get<std::vector<TaskSpec>>();
    else if (key == "output") c.output = val.get<std::string>();
    else if (key == "master_seed") c.master_seed = val.get<std::uint64_t>();
    else if (key == "threads") c.threads = val.get<std::size_t>();
    else if (key == "baseline") c.baseline = val.get<std::string>();
    else if (key == "permutations") c.permutations = val.get<std::size_t>();
    else throw ConfigError("unknown experiment field '" + key + "'");
  }
  c.validate();
}

/// Reads a config file; relative graph paths resolve against its directory.
inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  ExperimentConfig c;
  try {
    c = j.get<ExperimentConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  resolve(c.graph.edges);
  resolve(c.graph.attributes);
  return c;
}

struct Record {
  std::string sampler;
  std::string seed_node;
  std::uint64_t rng_seed = 0;
  double fraction = 0.0;
  std::string metric;
  double value = 0.0;

  friend bool operator==(const Record&, const Record&) = default;
};

struct Aggregate {
  std::string sampler;
  std::string metric;
  double fraction = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t count = 0;
};

/// Mean over fractions of the per-fraction means.
struct Headline {
  std::string sampler;
  std::string metric;
  double value = 0.0;
  std::size_t fractions = 0;
};

struct Comparison {
  std::string metric;
  std::string a;
  std::string b;
  std::size_t pairs = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double gap = 0.0;
  /// (a - b) / b; NaN when b's mean is zero.
  double relative_gap = 0.0;
  double p_value = 1.0;
};

struct CellCounts {
  std::size_t total = 0;
  std::size_t failed = 0;
  std::size_t not_applicable = 0;
};

struct ExperimentReport {
  std::vector<Record> records;
  std::vector<Aggregate> aggregates;
  std::vector<Headline> headline;
  std::vector<Comparison> comparisons;
  nlohmann::json config = nlohmann::json::object();
  std::optional<GeneratorTargets> generator;
  CellCounts cells;
  std::vector<std::string> failures;

  /// More than 10% of the applicable cells failed.
  bool failed() const {
    const std::size_t applicable = cells.total - cells.not_applicable;
    return applicable > 0 && static_cast<double>(cells.failed) > 0.1 * static_cast<double>(applicable);
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-cell rng seed, independent of execution order.
inline std::uint64_t cell_seed(std::uint64_t master, std::size_t sampler, std::size_t rep, std::size_t fraction) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ sampler);
  h = splitmix64(h ^ rep);
  return splitmix64(h ^ fraction);
}

/// R seed nodes drawn uniformly, without replacement while R <= n.
inline std::vector<NodeId> draw_seed_nodes(std::size_t n, std::size_t r, std::uint64_t master) {
  if (n == 0) throw DataError("cannot draw seeds from an empty graph");
  Rng rng(splitmix64(master ^ 0x5eedULL));
  std::vector<NodeId> out;
  if (r <= n) {
    std::vector<NodeId> all(n);
    std::iota(all.begin(), all.end(), NodeId{0});
    for (std::size_t i = 0; i < r; ++i) {
      std::size_t j = std::uniform_int_distribution<std::size_t>(i, n - 1)(rng);
      std::swap(all[i], all[j]);
      out.push_back(all[i]);
    }
  } else {
    for (std::size_t i = 0; i < r; ++i)
      out.push_back(std::uniform_int_distribution<NodeId>(0, static_cast<NodeId>(n - 1))(rng));
  }
  return out;
}

inline std::size_t sample_size(double fraction, std::size_t n) {
  auto z = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(z, 1, n);
}

/// Two-sided paired permutation test on differences (sign flips). Exact
/// enumeration when 2^n <= resamples, otherwise Monte Carlo with
/// p = (1 + hits) / (1 + resamples). Fewer than two pairs give p = 1.
inline double paired_permutation_test(std::span<const double> diffs, std::size_t resamples = 10000,
                                      std::uint64_t seed = 0) {
  const std::size_t n = diffs.size();
  if (n < 2) return 1.0;
  double obs = 0.0, scale = 0.0;
  for (double d : diffs) {
    obs += d;
    scale += std::abs(d);
  }
  obs = std::abs(obs);
  const double eps = 1e-12 * std::max(scale, 1.0);
  if (n < 63 && (std::uint64_t{1} << n) <= resamples) {
    const std::uint64_t total = std::uint64_t{1} << n;
    std::uint64_t hits = 0;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += (mask >> i & 1) ? -diffs[i] : diffs[i];
      hits += std::abs(s) >= obs - eps;
    }
    return static_cast<double>(hits) / static_cast<double>(total);
  }
  Rng rng(splitmix64(seed ^ 0x7e57ULL));
  std::uint64_t hits = 0;
  for (std::size_t b = 0; b < resamples; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (rng() & 1) ? -diffs[i] : diffs[i];
    hits += std::abs(s) >= obs - eps;
  }
  return (1.0 + static_cast<double>(hits)) / (1.0 + static_cast<double>(resamples));
}

namespace detail {

/// Pairing key of a record: seed node, fraction and the occurrence index of
/// that (seed, fraction) pair within its sampler/metric series.
using PairKey = std::tuple<std::string, double, std::size_t>;

inline std::map<PairKey, double> keyed_series(std::span<const Record> records, const std::string& sampler,
                                              const std::string& metric) {
  std::map<PairKey, double> out;
  std::map<std::pair<std::string, double>, std::size_t> seen;
  for (const auto& r : records) {
    if (r.sampler != sampler || r.metric != metric) continue;
    std::size_t k = seen[{r.seed_node, r.fraction}]++;
    out[{r.seed_node, r.fraction, k}] = r.value;
  }
  return out;
}

}  // namespace detail

/// Paired comparison of two samplers on one metric over matched cells.
inline Comparison compare(std::span<const Record> records, const std::string& metric, const std::string& a,
                          const std::string& b, std::size_t resamples = 10000) {
  auto sa = detail::keyed_series(records, a, metric);
  auto sb = detail::keyed_series(records, b, metric);
  Comparison c{metric, a, b};
  std::vector<double> diffs;
  double ta = 0.0, tb = 0.0;
  for (const auto& [k, va] : sa) {
    auto it = sb.find(k);
    if (it == sb.end()) continue;
    diffs.push_back(va - it->second);
    ta += va;
    tb += it->second;
  }
  c.pairs = diffs.size();
  if (c.pairs == 0) {
    c.mean_a = c.mean_b = c.gap = std::numeric_limits<double>::quiet_NaN();
    c.relative_gap = std::numeric_limits<double>::quiet_NaN();
    return c;
  }
  c.mean_a = ta / static_cast<double>(c.pairs);
  c.mean_b = tb / static_cast<double>(c.pairs);
  c.gap = c.mean_a - c.mean_b;
  c.relative_gap = c.mean_b != 0.0 ? c.gap / c.mean_b : std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = std::hash<std::string>{}(metric + "|" + a + "|" + b);
  c.p_value = paired_permutation_test(diffs, resamples, seed);
  return c;
}

inline Comparison compare(const ExperimentReport& report, const std::string& metric, const std::string& a,
                          const std::string& b, std::size_t resamples = 10000) {
  return compare(report.records, metric, a, b, resamples);
}

/// Per-(sampler, metric, fraction) means with standard errors, plus the
/// mean-over-fractions headline. Samplers and metrics keep first-seen order.
inline void aggregate(ExperimentReport& report) {
  std::vector<std::string> samplers, metrics;
  auto remember = [](std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
  };
  std::map<std::tuple<std::string, std::string, double>, std::vector<double>> cells;
  for (const auto& r : report.records) {
    remember(samplers, r.sampler);
    remember(metrics, r.metric);
    cells[{r.sampler, r.metric, r.fraction}].push_back(r.value);
  }
  report.aggregates.clear();
  report.headline.clear();
  for (const auto& s : samplers)
    for (const auto& m : metrics) {
      std::vector<double> means;
      for (auto it = cells.lower_bound({s, m, -std::numeric_limits<double>::infinity()});
           it != cells.end() && std::get<0>(it->first) == s && std::get<1>(it->first) == m; ++it) {
        const auto& v = it->second;
        const double n = static_cast<double>(v.size());
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        const double se = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
        report.aggregates.push_back({s, m, std::get<2>(it->first), mean, se, v.size()});
        means.push_back(mean);
      }
      if (!means.empty()) report.headline.push_back({s, m, mean_performance(means), means.size()});
    }
}

/// Compares every sampler against the baseline on every metric.
inline void compare_all(ExperimentReport& report, const std::string& baseline, std::size_t resamples) {
  report.comparisons.clear();
  std::vector<std::string> samplers, metrics;
  for (const auto& h : report.headline) {
    if (std::find(samplers.begin(), samplers.end(), h.sampler) == samplers.end()) samplers.push_back(h.sampler);
    if (std::find(metrics.begin(), metrics.end(), h.metric) == metrics.end()) metrics.push_back(h.metric);
  }
  for (const auto& m : metrics)
    for (const auto& s : samplers)
      if (s != baseline) {
        auto c = compare(report.records, m, s, baseline, resamples);
        if (c.pairs > 0) report.comparisons.push_back(c);
      }
}

/// Loads the graph named by the config: files (with missing-value removal
/// and largest component) or a synthetic network.
inline AttributedGraph load_experiment_graph(const GraphSource& src, std::optional<GeneratorTargets>* targets = nullptr) {
  if (src.synthetic) {
    auto net = generate(*src.synthetic);
    if (targets) *targets = net.achieved;
    return std::move(net.graph);
  }
  AttributedGraph g = load_edge_list(src.edges);
  if (!src.attributes.empty()) g = load_attributes(src.attributes, std::move(g));
  return prepare_for_sampling(g, src.drop_missing);
}

/// Runs the (sampler × repetition × fraction) grid on `g`. Seed nodes are
/// shared across samplers per repetition; cell rng seeds derive from the
/// master seed, so results do not depend on thread scheduling.
inline ExperimentReport run_experiment(const AttributedGraph& g, const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport report;
  report.config = cfg;
  const std::size_t n = g.num_nodes();
  const auto seeds = draw_seed_nodes(n, cfg.repetitions, cfg.master_seed);
  Rng ref_rng(splitmix64(cfg.master_seed ^ 0x4ef5ULL));
  const SymbolTable metric_symbols(g);
  const bool wants_characterize =
      std::any_of(cfg.tasks.begin(), cfg.tasks.end(), [](const TaskSpec& t) { return t.kind == TaskKind::characterize; });
  GraphReference ref;
  if (wants_characterize) ref = GraphReference::compute(g, ref_rng);

  std::map<std::pair<int, std::size_t>, SymbolTable> tables;
  for (const auto& s : cfg.samplers) {
    auto key = std::make_pair(static_cast<int>(s.spec.binning), s.spec.bins);
    if (!tables.count(key)) tables.emplace(key, SymbolTable(g, s.spec.binning, s.spec.bins));
  }

  const std::size_t S = cfg.samplers.size(), R = cfg.repetitions, Q = cfg.fractions.size();
  struct Slot {
    std::vector<Record> records;
    std::size_t failed = 0, na = 0;
    std::vector<std::string> failures;
  };
  std::vector<Slot> slots(S * R);
  auto run_job = [&](std::size_t job) {
    const std::size_t si = job / R, rep = job % R;
    const auto& entry = cfg.samplers[si];
    const auto& sym = tables.at({static_cast<int>(entry.spec.binning), entry.spec.bins});
    Slot& slot = slots[job];
    for (std::size_t q = 0; q < Q; ++q) {
      const std::uint64_t seed = cell_seed(cfg.master_seed, si, rep, q);
      SamplerSpec spec = entry.spec;
      spec.rng_seed = seed;
      const double frac = cfg.fractions[q];
      try {
        Sample sample = run_sampler(g, sym, spec, seeds[rep], sample_size(frac, n));
        std::vector<Record> cell;
        for (std::size_t t = 0; t < cfg.tasks.size(); ++t) {
          Rng task_rng(splitmix64(seed ^ (0x7a5cULL + t)));
          TaskResult tr;
          switch (cfg.tasks[t].kind) {
            case TaskKind::characterize: tr = characterize(g, metric_symbols, ref, sample, task_rng); break;
            case TaskKind::cluster: tr = cluster_task(g, sample, cfg.tasks[t], task_rng); break;
            case TaskKind::classify: tr = classify_task(g, sample, cfg.tasks[t]); break;
          }
          for (const auto& [name, value] : tr.metrics)
            cell.push_back({entry.label, g.external_id(seeds[rep]), seed, frac, name, value});
        }
        slot.records.insert(slot.records.end(), cell.begin(), cell.end());
      } catch (const ConfigError& e) {
        ++slot.na;
        if (rep == 0 && q == 0) slot.failures.push_back(entry.label + ": not applicable: " + e.what());
      } catch (const std::exception& e) {
        ++slot.failed;
        slot.failures.push_back(entry.label + " rep " + std::to_string(rep) + " fraction " + format_real(frac) + ": " +
                                e.what());
      }
    }
  };

  const std::size_t jobs = S * R;
  const std::size_t threads = std::clamp<std::size_t>(cfg.threads, 1, std::max<std::size_t>(jobs, 1));
  if (threads == 1) {
    for (std::size_t j = 0; j < jobs; ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t j; (j = next.fetch_add(1)) < jobs;) run_job(j);
      });
    for (auto& th : pool) th.join();
  }

  report.cells.total = S * R * Q;
  for (auto& slot : slots) {
    report.records.insert(report.records.end(), slot.records.begin(), slot.records.end());
    report.cells.failed += slot.failed;
    report.cells.not_applicable += slot.na;
    report.failures.insert(report.failures.end(), slot.failures.begin(), slot.failures.end());
  }
  aggregate(report);
  compare_all(report, cfg.baseline_label(), cfg.permutations);
  return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  std::optional<GeneratorTargets> targets;
  AttributedGraph g = load_experiment_graph(cfg.graph, &targets);
  ExperimentReport r = run_experiment(g, cfg);
  r.generator = targets;
  return r;
}

// ---------------------------------------------------------------------------
// Report files.

inline constexpr const char* kRecordsHeader = "sampler,seed_node,rng_seed,fraction,metric,value";
inline constexpr const char* kCurvesHeader = "sampler,metric,fraction,mean,stderr,count";

inline void write_records_csv(std::span<const Record> records, std::ostream& out) {
  out << kRecordsHeader << '\n';
  for (const auto& r : records)
    out << detail::csv_field(r.sampler) << ',' << detail::csv_field(r.seed_node) << ',' << r.rng_seed << ','
        << format_real(r.fraction) << ',' << detail::csv_field(r.metric) << ',' << format_real(r.value) << '\n';
}

inline std::vector<Record> read_records_csv(std::istream& in, const std::string& source = "records.csv") {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || detail::trim(line) != kRecordsHeader)
    throw ParseError(source, 1, std::string("expected header '") + kRecordsHeader + "'");
  std::vector<Record> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto f = detail::split_csv(line);
    if (f.size() != 6) throw ParseError(source, lineno, "expected 6 fields");
    Record r;
    r.sampler = f[0];
    r.seed_node = f[1];
    auto seed = detail::parse_double(f[2]);
    auto frac = detail::parse_double(f[3]);
    auto val = detail::parse_double(f[5]);
    if (!seed || !frac || !val) throw ParseError(source, lineno, "non-numeric field");
    r.rng_seed = std::stoull(f[2]);
    r.fraction = *frac;
    r.metric = f[4];
    r.value = *val;
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_curves_csv(std::span<const Aggregate> aggs, std::ostream& out) {
  out << kCurvesHeader << '\n';
  for (const auto& a : aggs)
    out << detail::csv_field(a.sampler) << ',' << detail::csv_field(a.metric) << ',' << format_real(a.fraction) << ','
        << format_real(a.mean) << ',' << format_real(a.stderr_) << ',' << a.count << '\n';
}

inline std::vector<Aggregate> read_curves_csv(std::istream& in, const std::string& source = "curves.csv") {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || detail::trim(line) != kCurvesHeader)
    throw ParseError(source, 1, std::string("expected header '") + kCurvesHeader + "'");
  std::vector<Aggregate> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto f = detail::split_csv(line);
    if (f.size() != 6) throw ParseError(source, lineno, "expected 6 fields");
    auto frac = detail::parse_double(f[2]);
    auto mean = detail::parse_double(f[3]);
    auto se = detail::parse_double(f[4]);
    auto count = detail::parse_double(f[5]);
    if (!frac || !mean || !se || !count) throw ParseError(source, lineno, "non-numeric field");
    out.push_back({f[0], f[1], *frac, *mean, *se, static_cast<std::size_t>(*count)});
  }
  return out;
}

namespace detail {

inline nlohmann::json real_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }
inline double real_from(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace detail

inline nlohmann::json summary_json(const ExperimentReport& r) {
  nlohmann::json j;
  j["config"] = r.config;
  if (r.generator) {
    nlohmann::json gj = *r.generator;
    j["generator"] = gj;
  } else {
    j["generator"] = nullptr;
  }
  j["cells"] = {{"total", r.cells.total}, {"failed", r.cells.failed}, {"not_applicable", r.cells.not_applicable}};
  j["failures"] = r.failures;
  j["aggregates"] = nlohmann::json::array();
  for (const auto& a : r.aggregates)
    j["aggregates"].push_back({{"sampler", a.sampler}, {"metric", a.metric}, {"fraction", a.fraction},
                               {"mean", a.mean}, {"stderr", a.stderr_}, {"count", a.count}});
  j["headline"] = nlohmann::json::array();
  for (const auto& h : r.headline)
    j["headline"].push_back({{"sampler", h.sampler}, {"metric", h.metric}, {"value", h.value}, {"fractions", h.fractions}});
  j["comparisons"] = nlohmann::json::array();
  for (const auto& c : r.comparisons)
    j["comparisons"].push_back({{"metric", c.metric},
                                {"a", c.a},
                                {"b", c.b},
                                {"pairs", c.pairs},
                                {"mean_a", detail::real_or_null(c.mean_a)},
                                {"mean_b", detail::real_or_null(c.mean_b)},
                                {"gap", detail::real_or_null(c.gap)},
                                {"relative_gap", detail::real_or_null(c.relative_gap)},
                                {"p_value", c.p_value}});
  return j;
}

/// Restores everything except records from a summary document.
inline void apply_summary_json(const nlohmann::json& j, ExperimentReport& r) {
  r.config = j.at("config");
  r.generator.reset();
  if (!j.at("generator").is_null()) {
    const auto& g = j.at("generator");
    GeneratorTargets t;
    t.skew = g.at("skew").get<double>();
    t.assortativity = g.at("assortativity").get<double>();
    t.mixing = detail::real_from(g.at("mixing"));
    t.assortativity_converged = g.at("assortativity_converged").get<bool>();
    r.generator = t;
  }
  r.cells.total = j.at("cells").at("total").get<std::size_t>();
  r.cells.failed = j.at("cells").at("failed").get<std::size_t>();
  r.cells.not_applicable = j.at("cells").at("not_applicable").get<std::size_t>();
  r.failures = j.at("failures").get<std::vector<std::string>>();
  r.aggregates.clear();
  for (const auto& a : j.at("aggregates"))
    r.aggregates.push_back({a.at("sampler"), a.at("metric"), a.at("fraction"), a.at("mean"), a.at("stderr"), a.at("count")});
  r.headline.clear();
  for (const auto& h : j.at("headline")) r.headline.push_back({h.at("sampler"), h.at("metric"), h.at("value"), h.at("fractions")});
  r.comparisons.clear();
  for (const auto& c : j.at("comparisons"))
    r.comparisons.push_back({c.at("metric"), c.at("a"), c.at("b"), c.at("pairs"), detail::real_from(c.at("mean_a")),
                             detail::real_from(c.at("mean_b")), detail::real_from(c.at("gap")),
                             detail::real_from(c.at("relative_gap")), c.at("p_value")});
}

/// Writes records.csv, summary.json and curves.csv into `dir`.
inline void emit_report(const ExperimentReport& r, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
    if (!out) throw DataError("cannot write '" + (std::filesystem::path(dir) / name).string() + "'");
    return out;
  };
  {
    auto out = open("records.csv");
    write_records_csv(r.records, out);
  }
  {
    auto out = open("curves.csv");
    write_curves_csv(r.aggregates, out);
  }
  {
    auto out = open("summary.json");
    out << summary_json(r).dump(2) << '\n';
  }
}

inline ExperimentReport load_report(const std::string& dir) {
  ExperimentReport r;
  const auto rec = std::filesystem::path(dir) / "records.csv";
  std::ifstream in(rec, std::ios::binary);
  if (!in) throw DataError("cannot open '" + rec.string() + "'");
  r.records = read_records_csv(in, rec.string());
  const auto sum = std::filesystem::path(dir) / "summary.json";
  std::ifstream sj(sum, std::ios::binary);
  if (sj) {
    try {
      apply_summary_json(nlohmann::json::parse(sj), r);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(sum.string() + ": " + e.what());
    }
  } else {
    aggregate(r);
  }
  return r;
}

}  // namespace attrsample
