#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wikinav/embeddings.hpp"
#include "wikinav/graph.hpp"
#include "wikinav/strategies.hpp"

namespace wikinav {

inline constexpr std::uint64_t kDefaultMasterSeed = 42;
inline constexpr std::size_t kDefaultGameCount = 10;
inline constexpr std::size_t kDefaultHopCap = 5000;

struct BenchmarkConfig {
  std::uint64_t master_seed = kDefaultMasterSeed;
  std::size_t game_count = kDefaultGameCount;
  std::size_t hop_cap = kDefaultHopCap;
  NodeId start = 0;
  std::vector<StrategySpec> strategies;
  std::string goal_policy = "uniform-reachable";
  /// Worker threads for (strategy, game) cells; results do not depend on it.
  unsigned threads = 1;
};

enum class GameStatus { InProgress, Success, CapReached, DeadEnd };

struct GameResult {
  std::string strategy;
  std::size_t game_index = 0;
  NodeId goal = kNoNode;
  std::string goal_title;
  bool success = false;
  bool dead_end = false;
  /// Path length on success, the hop cap on any failure.
  std::size_t hops = 0;
  std::vector<NodeId> path;
  std::vector<DecisionTrace> traces;
  std::chrono::duration<double> duration{0};
};

/// Hop-by-hop game rules shared by the automated runner and the play API.
class GameEngine {
 public:
  GameEngine(const LinkGraph& g, NodeId start, NodeId goal, std::size_t hop_cap);

  const NavigationState& state() const { return state_; }
  GameStatus status() const { return status_; }
  bool finished() const { return status_ != GameStatus::InProgress; }
  std::size_t hop_cap() const { return hop_cap_; }

  /// Takes one hop. Throws GameFinished after the game ended and
  /// IllegalMove if `next` is not a successor of the current node.
  void move(NodeId next);
  void mark_dead_end();

  GameResult result(std::string strategy, std::size_t game_index) const;

 private:
  void update_status();

  const LinkGraph* graph_;
  NavigationState state_;
  std::size_t hop_cap_;
  GameStatus status_ = GameStatus::InProgress;
};

/// `count` goals drawn uniformly without replacement from the nodes
/// reachable from `start` (start excluded), in draw order.
std::vector<NodeId> sample_goals(const LinkGraph& g, NodeId start, std::size_t count,
                                 std::uint64_t master_seed);

/// Per-game RNG seed from (master seed, strategy name, game index).
std::uint64_t derive_game_seed(std::uint64_t master_seed, std::string_view strategy,
                               std::size_t game_index);

GameResult run_game(const StrategyContext& ctx, const StrategySpec& spec, NodeId start, NodeId goal,
                    std::size_t hop_cap, std::uint64_t game_seed, std::size_t game_index = 0);

struct BenchmarkResources {
  const CentralityScores* centrality = nullptr;
  /// Required when any strategy needs embeddings.
  ProviderFactory embeddings;
};

struct StrategyRow {
  std::string strategy;       // CLI name
  std::string display_name;   // table label
  double avg_hops = 0.0;
  double success_rate = 0.0;  // fraction in [0, 1]
  std::vector<GameResult> games;
};

/// Averages include capped failures at the cap value.
StrategyRow aggregate_row(std::string strategy, std::string display_name, std::vector<GameResult> games);

struct GraphFingerprint {
  std::uint64_t node_count = 0;
  std::uint64_t edge_count = 0;
  std::string content_hash;  // 16 hex digits
};

GraphFingerprint fingerprint(const LinkGraph& g);

struct BenchmarkReport {
  BenchmarkConfig config;
  GraphFingerprint graph;
  std::vector<NodeId> goals;
  std::vector<StrategyRow> rows;
};

/// Throws ConfigError before any game runs when the config cannot be satisfied.
void validate_config(const LinkGraph& g, const BenchmarkConfig& config,
                     const BenchmarkResources& resources);

BenchmarkReport run_benchmark(const LinkGraph& g, const BenchmarkConfig& config,
                              const BenchmarkResources& resources);

enum class ReportFormat { Table, Json, Csv };

ReportFormat parse_report_format(std::string_view name);
std::string render_report(const BenchmarkReport& report, ReportFormat format);

/// Inverse of the JSON rendering (per-game decision traces are summarized
/// there and are not restored).
BenchmarkReport parse_report_json(std::string_view text);
/// Rows rebuilt from the per-game CSV, aggregates recomputed.
std::vector<StrategyRow> parse_report_csv(std::string_view text);

}  // namespace wikinav
