#include "wikinav/benchmark.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "wikinav/errors.hpp"
#include "wikinav/graph_io.hpp"
#include "wikinav/rng.hpp"

namespace wikinav {

GameEngine::GameEngine(const LinkGraph& g, NodeId start, NodeId goal, std::size_t hop_cap)
    : graph_(&g), state_(start, goal), hop_cap_(hop_cap) {
  if (start >= g.node_count() || goal >= g.node_count()) {
    throw ContractViolation("game start/goal out of range");
  }
  if (hop_cap < 1) throw ContractViolation("hop cap must be >= 1");
  update_status();
}

void GameEngine::update_status() {
  if (state_.current() == state_.goal()) {
    status_ = GameStatus::Success;
  } else if (state_.hops() >= hop_cap_) {
    status_ = GameStatus::CapReached;
  } else if (graph_->out_degree(state_.current()) == 0) {
    status_ = GameStatus::DeadEnd;
  }
}

void GameEngine::move(NodeId next) {
  if (finished()) throw GameFinished("game already finished");
  if (next >= graph_->node_count() || !graph_->has_edge(state_.current(), next)) {
    throw IllegalMove("node " + std::to_string(next) + " is not linked from node " +
                      std::to_string(state_.current()));
  }
  state_.advance(next);
  update_status();
}

void GameEngine::mark_dead_end() {
  if (!finished()) status_ = GameStatus::DeadEnd;
}

GameResult GameEngine::result(std::string strategy, std::size_t game_index) const {
  GameResult r;
  r.strategy = std::move(strategy);
  r.game_index = game_index;
  r.goal = state_.goal();
  r.goal_title = graph_->title(state_.goal());
  r.success = status_ == GameStatus::Success;
  r.dead_end = status_ == GameStatus::DeadEnd;
  r.hops = r.success ? state_.hops() : hop_cap_;
  r.path = state_.path();
  return r;
}

std::vector<NodeId> sample_goals(const LinkGraph& g, NodeId start, std::size_t count,
                                 std::uint64_t master_seed) {
  if (start >= g.node_count()) throw ConfigError("start node " + std::to_string(start) + " is not in the graph");
  std::vector<NodeId> pool;
  for (NodeId v : reachable_set(g, start)) {
    if (v != start) pool.push_back(v);
  }
  if (pool.size() < count) {
    throw ConfigError("only " + std::to_string(pool.size()) + " goals reachable from node " +
                      std::to_string(start) + ", need " + std::to_string(count));
  }
  Rng rng(master_seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(pool[i], pool[i + rng.uniform_index(pool.size() - i)]);
  }
  pool.resize(count);
  return pool;
}

std::uint64_t derive_game_seed(std::uint64_t master_seed, std::string_view strategy,
                               std::size_t game_index) {
  std::uint64_t h = fnv1a64(strategy, splitmix64(master_seed));
  return splitmix64(h ^ splitmix64(static_cast<std::uint64_t>(game_index)));
}

GameResult run_game(const StrategyContext& ctx, const StrategySpec& spec, NodeId start, NodeId goal,
                    std::size_t hop_cap, std::uint64_t game_seed, std::size_t game_index) {
  if (!ctx.graph) throw ConfigError("strategy context has no graph");
  const auto t0 = std::chrono::steady_clock::now();
  GameEngine engine(*ctx.graph, start, goal, hop_cap);
  Rng rng(game_seed);
  std::vector<DecisionTrace> traces;
  while (!engine.finished()) {
    DecisionTrace trace;
    try {
      trace = decide(spec, ctx, engine.state(), rng);
    } catch (const DeadEndError&) {
      engine.mark_dead_end();
      break;
    }
    engine.move(trace.chosen);
    traces.push_back(trace);
  }
  GameResult result = engine.result(spec.name(), game_index);
  result.traces = std::move(traces);
  result.duration = std::chrono::steady_clock::now() - t0;
  return result;
}

StrategyRow aggregate_row(std::string strategy, std::string display_name, std::vector<GameResult> games) {
  StrategyRow row{std::move(strategy), std::move(display_name), 0.0, 0.0, std::move(games)};
  if (row.games.empty()) return row;
  double hops = 0.0;
  std::size_t wins = 0;
  for (const auto& g : row.games) {
    hops += static_cast<double>(g.hops);
    wins += g.success ? 1 : 0;
  }
  row.avg_hops = hops / static_cast<double>(row.games.size());
  row.success_rate = static_cast<double>(wins) / static_cast<double>(row.games.size());
  return row;
}

GraphFingerprint fingerprint(const LinkGraph& g) {
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(content_hash(g)));
  return {g.node_count(), g.edge_count(), hex};
}

void validate_config(const LinkGraph& g, const BenchmarkConfig& config,
                     const BenchmarkResources& resources) {
  if (config.game_count < 1) throw ConfigError("game_count must be >= 1");
  if (config.hop_cap < 1) throw ConfigError("hop_cap must be >= 1");
  if (config.start >= g.node_count()) {
    throw ConfigError("start node " + std::to_string(config.start) + " is not in the graph");
  }
  if (config.goal_policy != "uniform-reachable") {
    throw ConfigError("unsupported goal policy '" + config.goal_policy + "'");
  }
  for (const auto& s : config.strategies) {
    if (s.needs_centrality()) {
      if (!resources.centrality) throw ConfigError("strategy " + s.name() + " needs centrality scores");
      if (resources.centrality->size() != g.node_count()) {
        throw ConfigError("centrality scores cover " + std::to_string(resources.centrality->size()) +
                          " nodes, graph has " + std::to_string(g.node_count()));
      }
    }
    if (s.needs_embeddings() && !resources.embeddings) {
      throw ConfigError("strategy " + s.name() + " needs an embedding provider");
    }
    if (s.epsilon < 0.0 || s.epsilon > 1.0) throw ConfigError("epsilon must lie in [0, 1]");
  }
}

BenchmarkReport run_benchmark(const LinkGraph& g, const BenchmarkConfig& config,
                              const BenchmarkResources& resources) {
  validate_config(g, config, resources);
  BenchmarkReport report;
  report.config = config;
  report.graph = fingerprint(g);
  report.goals = sample_goals(g, config.start, config.game_count, config.master_seed);

  bool semantic = false;
  for (const auto& s : config.strategies) semantic = semantic || s.needs_embeddings();
  std::vector<std::shared_ptr<EmbeddingProvider>> providers(report.goals.size());
  if (semantic) {
    for (std::size_t i = 0; i < report.goals.size(); ++i) providers[i] = resources.embeddings(report.goals[i]);
  }

  const std::size_t games = report.goals.size();
  const std::size_t cells = config.strategies.size() * games;
  std::vector<GameResult> results(cells);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t cell = next++; cell < cells; cell = next++) {
      const auto& spec = config.strategies[cell / games];
      const std::size_t game = cell % games;
      try {
        StrategyContext ctx{&g, resources.centrality, providers[game].get()};
        results[cell] = run_game(ctx, spec, config.start, report.goals[game], config.hop_cap,
                                 derive_game_seed(config.master_seed, spec.name(), game), game);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(cells)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t s = 0; s < config.strategies.size(); ++s) {
    std::vector<GameResult> row_games(std::make_move_iterator(results.begin() + s * games),
                                      std::make_move_iterator(results.begin() + (s + 1) * games));
    const auto& spec = config.strategies[s];
    report.rows.push_back(aggregate_row(spec.name(), spec.display_name(), std::move(row_games)));
  }
  return report;
}

}  // namespace wikinav
