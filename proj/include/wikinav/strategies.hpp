#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wikinav/centrality.hpp"
#include "wikinav/embeddings.hpp"
#include "wikinav/graph.hpp"
#include "wikinav/rng.hpp"

namespace wikinav {

/// One in-flight game. The path starts at the start node and always ends at
/// the current node; visited holds every node on the path.
class NavigationState {
 public:
  NavigationState(NodeId start, NodeId goal);

  NodeId current() const { return path_.back(); }
  NodeId goal() const { return goal_; }
  std::size_t hops() const { return path_.size() - 1; }
  const std::vector<NodeId>& path() const { return path_; }
  const NodeSet& visited() const { return visited_; }
  bool was_visited(NodeId v) const { return visited_.contains(v); }
  /// Node before the current one, if any hop has been taken.
  std::optional<NodeId> previous() const;

  void advance(NodeId next);

 private:
  NodeId goal_;
  std::vector<NodeId> path_;
  NodeSet visited_;
};

enum class StrategyType {
  Random,
  Betweenness,
  BetweennessStar,
  LlmGreedy,
  LlmStar,
  LlmStarEps,
  BetweennessThenLlm,
  LlmFallback,
  ShortestPathOracle,
};

inline constexpr double kDefaultEpsilon = 0.1;
inline constexpr std::size_t kDefaultPhaseHops = 3;
inline constexpr double kDefaultTheta = 0.25;

struct StrategySpec {
  StrategyType type = StrategyType::Random;
  double epsilon = kDefaultEpsilon;
  std::size_t phase_hops = kDefaultPhaseHops;
  double theta = kDefaultTheta;

  /// CLI name, e.g. "llm-star-eps".
  std::string name() const;
  /// Row label in the results table, e.g. "LLM*+eps".
  std::string display_name() const;
  bool needs_centrality() const;
  bool needs_embeddings() const;
  bool operator==(const StrategySpec&) const = default;
};

/// Parses a CLI name. Throws ConfigError on unknown names.
StrategySpec parse_strategy(std::string_view name);
std::vector<StrategySpec> parse_strategy_list(std::string_view comma_separated);
const std::vector<std::string_view>& strategy_names();

enum class Rule {
  UniformRandom,
  Structural,
  StructuralAllVisited,
  Semantic,
  SemanticAllVisited,
  FallbackStructural,
  ExploreRandom,
  OraclePath,
};

std::string_view rule_label(Rule rule);
bool is_structural(Rule rule);
bool is_semantic(Rule rule);

struct DecisionTrace {
  NodeId chosen = kNoNode;
  Rule rule = Rule::UniformRandom;
  std::optional<double> score;
};

/// Shared read-only inputs for decisions. Pointers may be null when the
/// strategy in use does not need them.
struct StrategyContext {
  const LinkGraph* graph = nullptr;
  const CentralityScores* centrality = nullptr;
  EmbeddingProvider* embeddings = nullptr;
};

/// Picks the next node from out_neighbors(state.current()).
/// Throws DeadEndError when there is no successor (or, for the oracle, no
/// remaining path to the goal) and ConfigError when a required input is
/// missing from `ctx`.
DecisionTrace decide(const StrategySpec& spec, const StrategyContext& ctx,
                     const NavigationState& state, Rng& rng);

enum class GateBranch { Semantic, Structural };

/// Semantic iff max(similarities) >= theta.
GateBranch llm_fallback_gate(std::span<const double> similarities, double theta);

}  // namespace wikinav
