#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "attrsample/attrsample.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace attrsample;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kRun = 3 };

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write '" + p.string() + "'");
  return out;
}

int cmd_generate(const std::string& spec_path, const std::string& out_dir) {
  SyntheticSpec spec;
  try {
    spec = read_json(spec_path).get<SyntheticSpec>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(spec_path + ": " + e.what());
  }
  auto net = generate(spec);
  fs::create_directories(out_dir);
  {
    auto out = open_out(fs::path(out_dir) / "edges.txt");
    write_edge_list(net.graph, out);
  }
  {
    auto out = open_out(fs::path(out_dir) / "attributes.csv");
    write_attributes(net.graph, out);
  }
  nlohmann::json meta = {{"spec", spec},
                         {"nodes", net.graph.num_nodes()},
                         {"edges", net.graph.num_edges()},
                         {"cluster_sizes", net.sizes},
                         {"achieved", net.achieved}};
  {
    auto out = open_out(fs::path(out_dir) / "meta.json");
    out << meta.dump(2) << '\n';
  }
  std::printf("nodes %zu  edges %zu  skew %.4f  assortativity %.4f%s\n", net.graph.num_nodes(), net.graph.num_edges(),
              net.achieved.skew, net.achieved.assortativity, net.achieved.assortativity_converged ? "" : " (target missed)");
  return kOk;
}

struct SampleArgs {
  std::string graph, attrs, sampler = "uni", out;
  double frac = 0.05;
  std::size_t size = 0;
  std::uint64_t seed = 1;
  std::string seed_node;
  bool keep_missing = false;
};

int cmd_sample(const SampleArgs& a) {
  AttributedGraph g = load_edge_list(a.graph);
  if (!a.attrs.empty()) g = load_attributes(a.attrs, std::move(g));
  g = prepare_for_sampling(g, !a.keep_missing);
  if (g.num_nodes() == 0) throw DataError("graph is empty after preparation");

  SamplerSpec spec;
  if (fs::exists(a.sampler) && fs::path(a.sampler).extension() == ".json") {
    try {
      spec = read_json(a.sampler).get<SamplerSpec>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(a.sampler + ": " + e.what());
    }
  } else {
    spec.kind = parse_sampler_kind(a.sampler);
  }
  spec.rng_seed = a.seed;

  NodeId seed;
  if (!a.seed_node.empty()) {
    auto v = g.find_node(a.seed_node);
    if (!v) throw DataError("seed node '" + a.seed_node + "' is not in the largest component");
    seed = *v;
  } else {
    std::mt19937_64 rng(splitmix64(a.seed));
    seed = std::uniform_int_distribution<NodeId>(0, static_cast<NodeId>(g.num_nodes() - 1))(rng);
  }
  const std::size_t z = a.size ? a.size : sample_size(a.frac, g.num_nodes());
  if (z > g.num_nodes()) throw ConfigError("sample size exceeds the component size");
  Sample s = run_sampler(g, spec, seed, z);

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!a.out.empty()) {
    file = open_out(a.out);
    out = &file;
  }
  for (NodeId v : s.nodes) *out << g.external_id(v) << '\n';
  std::fprintf(stderr, "%s: %zu of %zu nodes from seed %s\n", std::string(to_string(spec.kind)).c_str(), s.nodes.size(),
               g.num_nodes(), g.external_id(seed).c_str());
  return kOk;
}

void print_report(const ExperimentReport& r) {
  std::printf("cells: %zu total, %zu failed, %zu not applicable\n", r.cells.total, r.cells.failed, r.cells.not_applicable);
  for (const auto& f : r.failures) std::printf("  note: %s\n", f.c_str());
  std::printf("\n%-12s %-20s %12s %4s\n", "sampler", "metric", "mean", "Q");
  for (const auto& h : r.headline)
    std::printf("%-12s %-20s %12.6f %4zu\n", h.sampler.c_str(), h.metric.c_str(), h.value, h.fractions);
  if (!r.comparisons.empty()) {
    std::printf("\n%-20s %-12s %-12s %6s %12s %10s %10s\n", "metric", "a", "b", "pairs", "gap", "rel", "p");
    for (const auto& c : r.comparisons)
      std::printf("%-20s %-12s %-12s %6zu %12.6f %10.4f %10.4g\n", c.metric.c_str(), c.a.c_str(), c.b.c_str(), c.pairs,
                  c.gap, c.relative_gap, c.p_value);
  }
}

int cmd_experiment(const std::string& config, const std::string& out_dir, std::optional<std::size_t> threads) {
  ExperimentConfig cfg = load_experiment_config(config);
  if (threads) cfg.threads = *threads;
  std::string dir = !out_dir.empty() ? out_dir : cfg.output;
  if (dir.empty()) throw ConfigError("no output directory given (--out or \"output\")");
  ExperimentReport r = run_experiment(cfg);
  emit_report(r, dir);
  print_report(r);
  if (r.failed()) {
    std::fprintf(stderr, "more than 10%% of the cells failed\n");
    return kRun;
  }
  return kOk;
}

int cmd_report(const std::string& in_dir) {
  print_report(load_report(in_dir));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attribute-aware link-trace sampling of attributed networks"};
  app.require_subcommand(1);

  std::string spec_path, gen_out;
  auto* gen = app.add_subcommand("generate", "Generate a synthetic attributed network");
  gen->add_option("--spec", spec_path, "Synthetic network spec (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "Output directory")->required();

  SampleArgs sa;
  auto* smp = app.add_subcommand("sample", "Draw one sample and print its node ids");
  smp->add_option("--graph", sa.graph, "Edge list")->required()->check(CLI::ExistingFile);
  smp->add_option("--attrs", sa.attrs, "Attribute CSV")->check(CLI::ExistingFile);
  smp->add_option("--sampler", sa.sampler, "Sampler name or sampler JSON file");
  auto* frac = smp->add_option("--frac", sa.frac, "Sample fraction of the component")->check(CLI::Range(0.0, 1.0));
  smp->add_option("--size", sa.size, "Sample size in nodes")->excludes(frac);
  smp->add_option("--seed", sa.seed, "Sampler rng seed; also picks the seed node when none is given");
  smp->add_option("--seed-node", sa.seed_node, "External id of the seed node");
  smp->add_option("--out", sa.out, "Write node ids here instead of stdout");
  smp->add_flag("--keep-missing", sa.keep_missing, "Keep nodes with missing attribute values");

  std::string cfg_path, exp_out;
  std::optional<std::size_t> threads;
  auto* exp = app.add_subcommand("experiment", "Run a sampler x repetition x fraction grid");
  exp->add_option("--config", cfg_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  exp->add_option("--out", exp_out, "Output directory (overrides the config)");
  exp->add_option("--threads", threads, "Worker threads (overrides the config)");

  std::string rep_in;
  auto* rep = app.add_subcommand("report", "Summarise an experiment output directory");
  rep->add_option("--in", rep_in, "Experiment output directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_generate(spec_path, gen_out);
    if (*smp) return cmd_sample(sa);
    if (*exp) return cmd_experiment(cfg_path, exp_out, threads);
    if (*rep) return cmd_report(rep_in);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "run failure: %s\n", e.what());
    return kRun;
  }
  return kUsage;
}
