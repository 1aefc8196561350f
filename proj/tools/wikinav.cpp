// wikinav: graph pipeline, benchmarks, and the human-play server.
//
// Every command prints one machine-readable line "RESULT {...}" on success.
// Exit codes: 0 ok, 1 usage, 2 I/O or format, 3 configuration.

#include <CLI11.hpp>
#include <httplib.h>

#include <pthread.h>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>
#include <nlohmann/json.hpp>

#include "wikinav/benchmark.hpp"
#include "wikinav/centrality.hpp"
#include "wikinav/embeddings.hpp"
#include "wikinav/errors.hpp"
#include "wikinav/graph.hpp"
#include "wikinav/graph_io.hpp"
#include "wikinav/ingest.hpp"
#include "wikinav/play_service.hpp"
#include "wikinav/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wikinav;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitConfig = 3;

void log(const std::string& msg) { std::cerr << "[wikinav] " << msg << '\n'; }

void emit_result(json payload) { std::cout << "RESULT " << payload.dump() << std::endl; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

json graph_summary(const LinkGraph& g) {
  return {{"node_count", g.node_count()}, {"edge_count", g.edge_count()}};
}

void require_inputs(std::initializer_list<std::string_view> paths) {
  for (auto p : paths) {
    if (!p.empty() && !fs::exists(fs::path(p))) throw IoError("input not found: " + std::string(p));
  }
}

bool is_graph_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in && std::string_view(magic, 4) == kGraphMagic;
}

// ---- ingest ---------------------------------------------------------------

struct IngestArgs {
  std::string in, out_graph, out_titles;
  std::size_t chunk_size = 1 << 16;
};

int run_ingest(const IngestArgs& a) {
  require_inputs({a.in});
  IngestOptions opts;
  opts.chunk_size = a.chunk_size;
  opts.on_progress = [](const IngestStats& s) {
    log("lines=" + std::to_string(s.lines_read) + " malformed=" + std::to_string(s.malformed_lines));
  };
  auto result = ingest_edge_list(a.in, opts);
  save_graph(result.graph, a.out_graph);
  write_title_map(result.graph, a.out_titles, result.page_ids);
  const auto& s = result.stats;
  json payload = graph_summary(result.graph);
  payload["command"] = "ingest";
  payload["stats"] = {{"lines_read", s.lines_read},
                      {"edges_kept", s.edges_kept},
                      {"duplicates_dropped", s.duplicates_dropped},
                      {"self_loops_dropped", s.self_loops_dropped},
                      {"malformed_lines", s.malformed_lines}};
  emit_result(payload);
  return 0;
}

// ---- prune / sample ---------------------------------------------------------

void write_remap(const IdRemap& remap, const std::string& path) {
  std::string text = "new_id\told_id\n";
  for (NodeId v = 0; v < remap.size(); ++v) {
    text += std::to_string(v) + '\t' + std::to_string(remap.to_old(v)) + '\n';
  }
  write_text(path, text);
}

// Optional side outputs shared by prune and sample.
void write_derived_outputs(const Subgraph& sub, const std::string& remap, const std::string& graphml,
                           const std::string& titles_in, const std::string& titles_out) {
  if (!remap.empty()) write_remap(sub.remap, remap);
  if (!graphml.empty()) export_graphml(sub.graph, fs::path(graphml));
  if (titles_out.empty()) return;
  std::vector<std::uint64_t> pages;
  if (!titles_in.empty()) {
    std::vector<std::uint64_t> old_pages;
    for (const auto& e : read_title_map(titles_in)) old_pages.push_back(e.page_id);
    pages = remap_page_ids(old_pages, sub.remap);
  } else {
    pages.assign(sub.remap.new_to_old().begin(), sub.remap.new_to_old().end());
  }
  write_title_map(sub.graph, titles_out, pages);
}

struct PruneArgs {
  std::string in, out, remap, graphml, titles_in, titles_out;
  bool also_sources = false;
};

int run_prune(const PruneArgs& a) {
  require_inputs({a.in, a.titles_in});
  const LinkGraph g = load_graph(a.in);
  auto pruned = prune_sinks(g, a.also_sources);
  save_graph(pruned.graph, a.out);
  write_derived_outputs(pruned, a.remap, a.graphml, a.titles_in, a.titles_out);
  log("pruned " + std::to_string(g.node_count() - pruned.graph.node_count()) + " nodes");
  json payload = graph_summary(pruned.graph);
  payload["command"] = "prune";
  payload["removed_nodes"] = g.node_count() - pruned.graph.node_count();
  emit_result(payload);
  return 0;
}

struct SampleArgs {
  std::string in, out, remap, graphml, titles_in, titles_out, seed_node = "random";
  std::size_t radius = 3, cap = 100'000;
  std::uint64_t rng_seed = kDefaultMasterSeed;
};

int run_sample(const SampleArgs& a) {
  require_inputs({a.in, a.titles_in});
  const LinkGraph g = load_graph(a.in);
  if (g.node_count() == 0) throw ConfigError("cannot sample from an empty graph");
  NodeId seed = 0;
  if (a.seed_node == "random") {
    Rng rng(a.rng_seed);
    seed = static_cast<NodeId>(rng.uniform_index(g.node_count()));
  } else {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(a.seed_node, &used);
      if (used != a.seed_node.size()) throw std::invalid_argument(a.seed_node);
      if (v >= g.node_count()) throw ConfigError("seed node " + a.seed_node + " is not in the graph");
      seed = static_cast<NodeId>(v);
    } catch (const std::logic_error&) {
      throw ConfigError("--seed-node must be a node id or 'random'");
    }
  }
  if (a.cap < 1) throw ConfigError("--cap must be >= 1");
  auto ball = k_ball_sample(g, seed, a.radius, a.cap);
  save_graph(ball.graph, a.out);
  write_derived_outputs(ball, a.remap, a.graphml, a.titles_in, a.titles_out);
  json payload = graph_summary(ball.graph);
  payload["command"] = "sample";
  payload["seed_node"] = seed;
  payload["seed_node_new_id"] = *ball.remap.to_new(seed);
  emit_result(payload);
  return 0;
}

// ---- centrality -----------------------------------------------------------

struct CentralityArgs {
  std::string in, out, pivots = "512";
  std::uint64_t rng_seed = kDefaultMasterSeed;
  unsigned threads = 1;
};

int run_centrality(const CentralityArgs& a) {
  require_inputs({a.in});
  const LinkGraph g = load_graph(a.in);
  CentralityScores scores;
  if (a.pivots == "exact") {
    scores = betweenness_exact(g, a.threads);
  } else {
    std::size_t k = 0;
    try {
      k = std::stoull(a.pivots);
    } catch (const std::logic_error&) {
      throw ConfigError("--pivots must be a count or 'exact'");
    }
    if (k < 1 || k > g.node_count()) {
      throw ConfigError("--pivots must lie in [1, " + std::to_string(g.node_count()) + "]");
    }
    scores = betweenness_sampled(g, k, a.rng_seed, a.threads);
  }
  save_centrality(scores, a.out);
  emit_result({{"command", "centrality"},
               {"node_count", scores.size()},
               {"method", scores.method == CentralityMethod::Exact ? "exact" : "sampled"},
               {"pivot_count", scores.pivot_count},
               {"seed", scores.seed}});
  return 0;
}

// ---- embed ------------------------------------------------------------------

struct EmbedArgs {
  std::string in_titles, provider = "hash", endpoint, source, out;
  std::size_t dim = kDefaultEmbeddingDim;
  std::uint64_t seed = 0;
  int retries = 2;
  int timeout_ms = 10'000;
};

std::vector<std::string> load_titles(const fs::path& path) {
  if (is_graph_file(path)) return load_graph(path).titles();
  std::vector<std::string> titles;
  for (auto& e : read_title_map(path)) titles.push_back(std::move(e.title));
  return titles;
}

int run_embed(const EmbedArgs& a) {
  require_inputs({a.in_titles, a.source});
  const auto titles = load_titles(a.in_titles);
  std::unique_ptr<EmbeddingProvider> provider;
  if (a.provider == "hash") {
    provider = std::make_unique<EmbeddingProvider>(std::make_unique<SyntheticHashBackend>(a.dim, a.seed));
  } else if (a.provider == "http") {
    if (a.endpoint.empty()) throw ConfigError("--provider http needs --endpoint");
    provider = std::make_unique<EmbeddingProvider>(std::make_unique<RemoteServiceBackend>(
        RemoteServiceOptions{a.endpoint, a.dim, std::chrono::milliseconds(a.timeout_ms), a.retries, 64}));
  } else if (a.provider == "file") {
    if (a.source.empty()) throw ConfigError("--provider file needs --source <embedding file>");
    provider = load_embeddings(a.source);
  } else {
    throw ConfigError("unknown provider '" + a.provider + "'");
  }
  std::vector<EmbedRequest> requests;
  requests.reserve(titles.size());
  for (std::size_t i = 0; i < titles.size(); ++i) requests.push_back({static_cast<NodeId>(i), titles[i]});
  provider->prefetch(requests);
  save_embeddings(*provider, a.out);
  emit_result({{"command", "embed"},
               {"provider", std::string(provider->kind())},
               {"dimension", provider->dimension()},
               {"count", provider->cache_size()}});
  return 0;
}

// ---- bench --------------------------------------------------------------

struct BenchArgs {
  std::string graph, centrality, embeddings, provider, endpoint, strategies = "oracle";
  std::string report = "json", out;
  std::size_t games = kDefaultGameCount, hop_cap = kDefaultHopCap, dim = kDefaultEmbeddingDim;
  std::uint64_t seed = kDefaultMasterSeed;
  std::string pivots = "512";
  NodeId start = 0;
  double epsilon = kDefaultEpsilon, theta = kDefaultTheta;
  std::size_t phase_hops = kDefaultPhaseHops;
  unsigned threads = 1;
};

ProviderFactory make_provider_factory(const BenchArgs& a, const LinkGraph& g) {
  std::string kind = a.provider;
  if (kind.empty()) {
    if (a.embeddings.empty()) throw ConfigError("semantic strategies need --embeddings or --provider");
    kind = "file";
  }
  if (kind == "file") {
    if (a.embeddings.empty()) throw ConfigError("--provider file needs --embeddings <path>");
    std::shared_ptr<EmbeddingProvider> p = load_embeddings(a.embeddings);
    return shared_provider(std::move(p));
  }
  if (kind == "hash") {
    return shared_provider(std::make_shared<EmbeddingProvider>(std::make_unique<SyntheticHashBackend>(a.dim)));
  }
  if (kind == "http") {
    if (a.endpoint.empty()) throw ConfigError("--provider http needs --endpoint");
    return shared_provider(std::make_shared<EmbeddingProvider>(std::make_unique<RemoteServiceBackend>(
        RemoteServiceOptions{a.endpoint, a.dim, std::chrono::milliseconds(10'000), 2, 64})));
  }
  if (kind == "distance-oracle") return distance_oracle_providers(g);
  throw ConfigError("unknown provider '" + kind + "'");
}

int run_bench(const BenchArgs& a) {
  require_inputs({a.graph, a.centrality, a.embeddings});
  const ReportFormat format = parse_report_format(a.report);
  BenchmarkConfig config;
  config.master_seed = a.seed;
  config.game_count = a.games;
  config.hop_cap = a.hop_cap;
  config.start = a.start;
  config.threads = a.threads;
  config.strategies = parse_strategy_list(a.strategies);
  bool need_centrality = false, need_embeddings = false;
  for (auto& s : config.strategies) {
    s.epsilon = a.epsilon;
    s.theta = a.theta;
    s.phase_hops = a.phase_hops;
    need_centrality = need_centrality || s.needs_centrality();
    need_embeddings = need_embeddings || s.needs_embeddings();
  }
  if (config.game_count < 1 || config.hop_cap < 1) throw ConfigError("--games and --hop-cap must be >= 1");
  if (need_embeddings && a.provider.empty() && a.embeddings.empty()) {
    throw ConfigError("semantic strategies need --embeddings or --provider");
  }

  const LinkGraph g = load_graph(a.graph);
  if (config.start >= g.node_count()) throw ConfigError("--start is not a node of the graph");

  std::optional<CentralityScores> scores;
  if (need_centrality) {
    if (!a.centrality.empty()) {
      scores = load_centrality(a.centrality);
    } else {
      const std::size_t k = std::min<std::size_t>(std::stoull(a.pivots), g.node_count());
      log("no --centrality given; sampling betweenness with " + std::to_string(k) + " pivots");
      scores = betweenness_sampled(g, k, a.seed, a.threads);
    }
  }
  BenchmarkResources resources;
  resources.centrality = scores ? &*scores : nullptr;
  if (need_embeddings) resources.embeddings = make_provider_factory(a, g);

  validate_config(g, config, resources);
  const BenchmarkReport report = run_benchmark(g, config, resources);
  const std::string text = render_report(report, format);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text(a.out, text);
  }
  std::cerr << render_report(report, ReportFormat::Table);

  json rows = json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"strategy", row.strategy}, {"avg_hops", row.avg_hops}, {"success_rate", row.success_rate}});
  }
  emit_result({{"command", "bench"}, {"report", a.out}, {"goals", report.goals}, {"rows", rows}});
  return 0;
}

// ---- oracle -----------------------------------------------------------------

struct OracleArgs {
  std::string graph;
  NodeId from = 0, to = 0;
};

int run_oracle(const OracleArgs& a) {
  require_inputs({a.graph});
  const LinkGraph g = load_graph(a.graph);
  if (a.from >= g.node_count() || a.to >= g.node_count()) {
    throw ConfigError("--from/--to must be node ids of the graph");
  }
  const auto path = bfs_shortest_path(g, a.from, a.to);
  json payload = {{"command", "oracle"}, {"from", a.from}, {"to", a.to}, {"reachable", path.has_value()}};
  if (path) {
    payload["hops"] = path->size() - 1;
    payload["path"] = *path;
    json titles = json::array();
    for (NodeId v : *path) titles.push_back(g.title(v));
    payload["titles"] = titles;
  }
  emit_result(payload);
  return 0;
}

// ---- serve ------------------------------------------------------------------

struct ServeArgs {
  std::string graph, embeddings, config, static_dir, results_log = "human_results.jsonl", host = "127.0.0.1";
  int port = 8080;
};


int run_serve(const ServeArgs& a) {
  require_inputs({a.graph, a.embeddings, a.config, a.static_dir});
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  const LinkGraph g = load_graph(a.graph);
  BenchmarkConfig config;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw IoError("cannot open " + a.config);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw FormatError("config " + a.config + ": " + e.what());
    }
    config.master_seed = j.value("master_seed", config.master_seed);
    config.game_count = j.value("game_count", config.game_count);
    config.hop_cap = j.value("hop_cap", config.hop_cap);
    config.start = j.value("start", config.start);
  }
  if (config.start >= g.node_count()) throw ConfigError("configured start node is not in the graph");
  if (config.hop_cap < 1 || config.game_count < 1) throw ConfigError("hop_cap and game_count must be >= 1");
  // Human players see titles only; the embedding file is only validated.
  if (!a.embeddings.empty()) load_embeddings(a.embeddings);

  PlayService service(g, config, a.results_log.empty() ? std::nullopt : std::optional<fs::path>(a.results_log));
  httplib::Server server;
  std::optional<fs::path> static_dir;
  if (!a.static_dir.empty()) static_dir = a.static_dir;
  mount_play_routes(server, service, static_dir);

  int port = a.port;
  if (port == 0) {
    port = server.bind_to_any_port(a.host);
  } else if (!server.bind_to_port(a.host, port)) {
    throw IoError("cannot bind " + a.host + ":" + std::to_string(port));
  }
  if (port < 0) throw IoError("cannot bind " + a.host);
  json goals = json::array();
  for (NodeId v : service.goals()) goals.push_back({{"id", v}, {"title", g.title(v)}});
  emit_result({{"command", "serve"}, {"host", a.host}, {"port", port}, {"goals", goals}});
  std::atomic<bool> signalled{false};
  std::jthread stopper([&server, &signalled, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    signalled = true;
    server.stop();
  });
  const bool ok = server.listen_after_bind();
  if (!signalled) pthread_kill(stopper.native_handle(), SIGTERM);
  stopper.join();
  if (!ok && !signalled) throw IoError("server stopped unexpectedly");
  return 0;
}

template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    log(std::string("configuration error: ") + e.what());
    return kExitConfig;
  } catch (const ContractViolation& e) {
    log(std::string("configuration error: ") + e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    log(std::string("I/O error: ") + e.what());
    return kExitIo;
  } catch (const FormatError& e) {
    log(std::string("format error: ") + e.what());
    return kExitIo;
  } catch (const ProviderError& e) {
    log(std::string("embedding provider error: ") + e.what());
    return kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wikinav: goal-directed navigation benchmarks on hyperlink graphs"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Stream a gzip TSV edge list into a graph and title map");
  c_ingest->add_option("--in", ingest.in, "gzip TSV edge list")->required();
  c_ingest->add_option("--out-graph", ingest.out_graph, "binary graph output")->required();
  c_ingest->add_option("--out-titles", ingest.out_titles, "title map output (gzip TSV)")->required();
  c_ingest->add_option("--chunk-size", ingest.chunk_size, "read chunk in bytes")->check(CLI::PositiveNumber);

  PruneArgs prune;
  auto* c_prune = app.add_subcommand("prune", "Iteratively remove sink nodes");
  c_prune->add_option("--in", prune.in)->required();
  c_prune->add_option("--out", prune.out)->required();
  c_prune->add_flag("--also-sources", prune.also_sources, "also remove in-degree-0 nodes");
  c_prune->add_option("--remap", prune.remap, "write new->old id table");
  c_prune->add_option("--graphml", prune.graphml, "also export GraphML");
  c_prune->add_option("--titles", prune.titles_in, "title map of the input graph (for page ids)");
  c_prune->add_option("--out-titles", prune.titles_out, "write the title map of the output graph");

  SampleArgs sample;
  auto* c_sample = app.add_subcommand("sample", "Extract a k-hop ball around a seed node");
  c_sample->add_option("--in", sample.in)->required();
  c_sample->add_option("--out", sample.out)->required();
  c_sample->add_option("--seed-node", sample.seed_node, "node id or 'random'");
  c_sample->add_option("--radius", sample.radius);
  c_sample->add_option("--cap", sample.cap);
  c_sample->add_option("--rng-seed", sample.rng_seed);
  c_sample->add_option("--remap", sample.remap, "write new->old id table");
  c_sample->add_option("--graphml", sample.graphml, "also export GraphML");
  c_sample->add_option("--titles", sample.titles_in, "title map of the input graph (for page ids)");
  c_sample->add_option("--out-titles", sample.titles_out, "write the title map of the output graph");

  CentralityArgs centrality;
  auto* c_cent = app.add_subcommand("centrality", "Compute betweenness centrality");
  c_cent->add_option("--in", centrality.in)->required();
  c_cent->add_option("--out", centrality.out)->required();
  c_cent->add_option("--pivots", centrality.pivots, "pivot count or 'exact'");
  c_cent->add_option("--rng-seed", centrality.rng_seed);
  c_cent->add_option("--threads", centrality.threads)->check(CLI::PositiveNumber);

  EmbedArgs embed;
  auto* c_embed = app.add_subcommand("embed", "Compute and store title embeddings");
  c_embed->add_option("--in-titles", embed.in_titles, "title map or binary graph")->required();
  c_embed->add_option("--provider", embed.provider)->check(CLI::IsMember({"file", "http", "hash"}));
  c_embed->add_option("--endpoint", embed.endpoint, "embedding service URL");
  c_embed->add_option("--source", embed.source, "raw embedding file for --provider file");
  c_embed->add_option("--dim", embed.dim)->check(CLI::PositiveNumber);
  c_embed->add_option("--hash-seed", embed.seed);
  c_embed->add_option("--retries", embed.retries);
  c_embed->add_option("--timeout-ms", embed.timeout_ms);
  c_embed->add_option("--out", embed.out)->required();

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "Run the seeded navigation benchmark");
  c_bench->add_option("--graph", bench.graph)->required();
  c_bench->add_option("--centrality", bench.centrality);
  c_bench->add_option("--embeddings", bench.embeddings);
  c_bench->add_option("--provider", bench.provider)
      ->check(CLI::IsMember({"file", "hash", "http", "distance-oracle"}));
  c_bench->add_option("--endpoint", bench.endpoint);
  c_bench->add_option("--dim", bench.dim)->check(CLI::PositiveNumber);
  c_bench->add_option("--strategies", bench.strategies, "comma-separated strategy names");
  c_bench->add_option("--games", bench.games);
  c_bench->add_option("--seed", bench.seed);
  c_bench->add_option("--hop-cap", bench.hop_cap);
  c_bench->add_option("--start", bench.start);
  c_bench->add_option("--epsilon", bench.epsilon);
  c_bench->add_option("--phase-hops", bench.phase_hops);
  c_bench->add_option("--theta", bench.theta);
  c_bench->add_option("--pivots", bench.pivots, "pivots when centrality is computed on the fly")
      ->check(CLI::PositiveNumber);
  c_bench->add_option("--threads", bench.threads)->check(CLI::PositiveNumber);
  c_bench->add_option("--report", bench.report)->check(CLI::IsMember({"json", "csv", "table"}));
  c_bench->add_option("--out", bench.out);

  OracleArgs oracle;
  auto* c_oracle = app.add_subcommand("oracle", "Shortest path between two nodes");
  c_oracle->add_option("--graph", oracle.graph)->required();
  c_oracle->add_option("--from", oracle.from)->required();
  c_oracle->add_option("--to", oracle.to)->required();

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "Serve the human-play API");
  c_serve->add_option("--graph", serve.graph)->required();
  c_serve->add_option("--embeddings", serve.embeddings);
  c_serve->add_option("--config", serve.config, "JSON with master_seed, game_count, hop_cap, start");
  c_serve->add_option("--port", serve.port, "0 picks a free port");
  c_serve->add_option("--host", serve.host);
  c_serve->add_option("--static", serve.static_dir, "UI directory served at /");
  c_serve->add_option("--results-log", serve.results_log, "JSON-lines file for finished games");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*c_ingest) return guarded([&] { return run_ingest(ingest); });
  if (*c_prune) return guarded([&] { return run_prune(prune); });
  if (*c_sample) return guarded([&] { return run_sample(sample); });
  if (*c_cent) return guarded([&] { return run_centrality(centrality); });
  if (*c_embed) return guarded([&] { return run_embed(embed); });
  if (*c_bench) return guarded([&] { return run_bench(bench); });
  if (*c_oracle) return guarded([&] { return run_oracle(oracle); });
  if (*c_serve) return guarded([&] { return run_serve(serve); });
  return kExitUsage;
}
