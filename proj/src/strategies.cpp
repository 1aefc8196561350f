#include "wikinav/strategies.hpp"

#include <algorithm>
#include <array>

#include "wikinav/errors.hpp"

namespace wikinav {

NavigationState::NavigationState(NodeId start, NodeId goal) : goal_(goal), path_{start}, visited_{start} {}

std::optional<NodeId> NavigationState::previous() const {
  if (path_.size() < 2) return std::nullopt;
  return path_[path_.size() - 2];
}

void NavigationState::advance(NodeId next) {
  path_.push_back(next);
  visited_.insert(next);
}

namespace {

struct NameEntry {
  StrategyType type;
  std::string_view name;
};

constexpr std::array<NameEntry, 9> kNames{{
    {StrategyType::Random, "random"},
    {StrategyType::Betweenness, "betweenness"},
    {StrategyType::BetweennessStar, "betweenness-star"},
    {StrategyType::LlmGreedy, "llm"},
    {StrategyType::LlmStar, "llm-star"},
    {StrategyType::LlmStarEps, "llm-star-eps"},
    {StrategyType::BetweennessThenLlm, "betweenness-then-llm"},
    {StrategyType::LlmFallback, "llm-fallback"},
    {StrategyType::ShortestPathOracle, "oracle"},
}};

std::string trim_copy(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string StrategySpec::name() const {
  for (const auto& entry : kNames) {
    if (entry.type == type) return std::string(entry.name);
  }
  return "unknown";
}

std::string StrategySpec::display_name() const {
  switch (type) {
    case StrategyType::Random: return "Random";
    case StrategyType::Betweenness: return "Betweenness";
    case StrategyType::BetweennessStar: return "Betweenness*";
    case StrategyType::LlmGreedy: return "LLM";
    case StrategyType::LlmStar: return "LLM*";
    case StrategyType::LlmStarEps: return "LLM*+eps";
    case StrategyType::BetweennessThenLlm: return "Betweenness+LLM* (K=" + std::to_string(phase_hops) + ")";
    case StrategyType::LlmFallback: return "LLM* Fallback";
    case StrategyType::ShortestPathOracle: return "Shortest-Path";
  }
  return "unknown";
}

bool StrategySpec::needs_centrality() const {
  return type == StrategyType::Betweenness || type == StrategyType::BetweennessStar ||
         type == StrategyType::BetweennessThenLlm || type == StrategyType::LlmFallback;
}

bool StrategySpec::needs_embeddings() const {
  return type == StrategyType::LlmGreedy || type == StrategyType::LlmStar ||
         type == StrategyType::LlmStarEps || type == StrategyType::BetweennessThenLlm ||
         type == StrategyType::LlmFallback;
}

StrategySpec parse_strategy(std::string_view name) {
  for (const auto& entry : kNames) {
    if (entry.name == name) return StrategySpec{.type = entry.type};
  }
  throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

std::vector<StrategySpec> parse_strategy_list(std::string_view comma_separated) {
  std::vector<StrategySpec> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = comma_separated.find(',', start);
    const auto item = trim_copy(comma_separated.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (!item.empty()) out.push_back(parse_strategy(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError("strategy list is empty");
  return out;
}

const std::vector<std::string_view>& strategy_names() {
  static const std::vector<std::string_view> names = [] {
    std::vector<std::string_view> v;
    for (const auto& entry : kNames) v.push_back(entry.name);
    return v;
  }();
  return names;
}

std::string_view rule_label(Rule rule) {
  switch (rule) {
    case Rule::UniformRandom: return "uniform-random";
    case Rule::Structural: return "structural";
    case Rule::StructuralAllVisited: return "structural-all-visited-fallback";
    case Rule::Semantic: return "semantic";
    case Rule::SemanticAllVisited: return "semantic-all-visited-fallback";
    case Rule::FallbackStructural: return "fallback-structural";
    case Rule::ExploreRandom: return "explore-random";
    case Rule::OraclePath: return "oracle-path";
  }
  return "unknown";
}

bool is_structural(Rule rule) {
  return rule == Rule::Structural || rule == Rule::StructuralAllVisited ||
         rule == Rule::FallbackStructural;
}

bool is_semantic(Rule rule) { return rule == Rule::Semantic || rule == Rule::SemanticAllVisited; }

GateBranch llm_fallback_gate(std::span<const double> similarities, double theta) {
  if (similarities.empty()) throw ContractViolation("llm_fallback_gate: empty similarity list");
  const double m = *std::max_element(similarities.begin(), similarities.end());
  return m >= theta ? GateBranch::Semantic : GateBranch::Structural;
}

namespace {

const CentralityScores& need_centrality(const StrategyContext& ctx, const StrategySpec& spec) {
  if (!ctx.centrality) throw ConfigError("strategy " + spec.name() + " needs centrality scores");
  return *ctx.centrality;
}

EmbeddingProvider& need_embeddings(const StrategyContext& ctx, const StrategySpec& spec) {
  if (!ctx.embeddings) throw ConfigError("strategy " + spec.name() + " needs an embedding provider");
  return *ctx.embeddings;
}

// Plain betweenness: never step straight back unless that is the only way out.
DecisionTrace betweenness_step(const StrategySpec& spec, const StrategyContext& ctx,
                               const NavigationState& state, Rule rule) {
  const auto& scores = need_centrality(ctx, spec);
  const LinkGraph& g = *ctx.graph;
  NodeSet excluded;
  if (auto prev = state.previous(); prev && g.out_degree(state.current()) > 1) excluded.insert(*prev);
  const NodeId chosen = *top_neighbor_by_centrality(g, scores, state.current(), excluded);
  return {chosen, rule, scores[chosen]};
}

DecisionTrace betweenness_star_step(const StrategySpec& spec, const StrategyContext& ctx,
                                    const NavigationState& state) {
  const auto& scores = need_centrality(ctx, spec);
  const LinkGraph& g = *ctx.graph;
  if (auto chosen = top_neighbor_by_centrality(g, scores, state.current(), state.visited())) {
    return {*chosen, Rule::Structural, scores[*chosen]};
  }
  const NodeId chosen = *top_neighbor_by_centrality(g, scores, state.current());
  return {chosen, Rule::StructuralAllVisited, scores[chosen]};
}

DecisionTrace llm_star_step(const StrategySpec& spec, const StrategyContext& ctx,
                            const NavigationState& state, std::span<const NodeId> neighbors) {
  auto& provider = need_embeddings(ctx, spec);
  std::vector<NodeId> unvisited;
  for (NodeId w : neighbors) {
    if (!state.was_visited(w)) unvisited.push_back(w);
  }
  if (!unvisited.empty()) {
    auto [chosen, score] = *best_semantic_neighbor(provider, *ctx.graph, state.goal(), unvisited);
    return {chosen, Rule::Semantic, score};
  }
  auto [chosen, score] = *best_semantic_neighbor(provider, *ctx.graph, state.goal(), neighbors);
  return {chosen, Rule::SemanticAllVisited, score};
}

DecisionTrace llm_fallback_step(const StrategySpec& spec, const StrategyContext& ctx,
                                const NavigationState& state, std::span<const NodeId> neighbors) {
  auto& provider = need_embeddings(ctx, spec);
  need_centrality(ctx, spec);
  const LinkGraph& g = *ctx.graph;
  const EmbeddingVector& target = provider.embed(g, state.goal());
  std::vector<double> sims;
  sims.reserve(neighbors.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    sims.push_back(similarity(provider.embed(g, neighbors[i]), target));
    if (sims[i] > sims[best]) best = i;
  }
  if (llm_fallback_gate(sims, spec.theta) == GateBranch::Semantic) {
    return {neighbors[best], Rule::Semantic, sims[best]};
  }
  return betweenness_step(spec, ctx, state, Rule::FallbackStructural);
}

}  // namespace

DecisionTrace decide(const StrategySpec& spec, const StrategyContext& ctx,
                     const NavigationState& state, Rng& rng) {
  if (!ctx.graph) throw ConfigError("strategy context has no graph");
  const LinkGraph& g = *ctx.graph;
  const auto neighbors = g.out_neighbors(state.current());
  if (neighbors.empty()) {
    throw DeadEndError(state.current(), "node " + std::to_string(state.current()) + " has no outgoing links");
  }

  switch (spec.type) {
    case StrategyType::Random:
      return {neighbors[rng.uniform_index(neighbors.size())], Rule::UniformRandom, std::nullopt};

    case StrategyType::Betweenness:
      return betweenness_step(spec, ctx, state, Rule::Structural);

    case StrategyType::BetweennessStar:
      return betweenness_star_step(spec, ctx, state);

    case StrategyType::LlmGreedy: {
      auto [chosen, score] =
          *best_semantic_neighbor(need_embeddings(ctx, spec), g, state.goal(), neighbors);
      return {chosen, Rule::Semantic, score};
    }

    case StrategyType::LlmStar:
      return llm_star_step(spec, ctx, state, neighbors);

    case StrategyType::LlmStarEps:
      // One draw for the branch, one more only when exploring.
      if (rng.uniform01() < spec.epsilon) {
        return {neighbors[rng.uniform_index(neighbors.size())], Rule::ExploreRandom, std::nullopt};
      }
      return llm_star_step(spec, ctx, state, neighbors);

    case StrategyType::BetweennessThenLlm:
      if (state.hops() < spec.phase_hops) return betweenness_step(spec, ctx, state, Rule::Structural);
      return llm_star_step(spec, ctx, state, neighbors);

    case StrategyType::LlmFallback:
      return llm_fallback_step(spec, ctx, state, neighbors);

    case StrategyType::ShortestPathOracle: {
      if (state.current() == state.goal()) throw ContractViolation("oracle asked to move from the goal");
      auto path = bfs_shortest_path(g, state.current(), state.goal());
      if (!path) {
        throw DeadEndError(state.current(), "goal unreachable from node " + std::to_string(state.current()));
      }
      return {(*path)[1], Rule::OraclePath, static_cast<double>(path->size() - 1)};
    }
  }
  throw ContractViolation("unhandled strategy type");
}

}  // namespace wikinav
