#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wikinav/graph.hpp"

namespace wikinav {

enum class CentralityMethod : std::uint8_t { Exact = 0, Sampled = 1 };

/// Betweenness per node in the unnormalized ordered-pair convention.
struct CentralityScores {
  std::vector<double> values;
  CentralityMethod method = CentralityMethod::Exact;
  std::uint64_t pivot_count = 0;
  std::uint64_t seed = 0;

  std::size_t size() const { return values.size(); }
  double operator[](NodeId v) const { return values[v]; }
  bool operator==(const CentralityScores&) const = default;
};

/// Brandes over every source. `threads` > 1 splits sources across workers;
/// per-worker sums are merged in a fixed order.
CentralityScores betweenness_exact(const LinkGraph& g, unsigned threads = 1);

/// Brandes restricted to `pivot_count` sources drawn without replacement,
/// scaled by node_count / pivot_count.
CentralityScores betweenness_sampled(const LinkGraph& g, std::size_t pivot_count,
                                     std::uint64_t seed, unsigned threads = 1);

/// Sum of single-source dependencies over `sources`, multiplied by `scale`.
std::vector<double> betweenness_from_sources(const LinkGraph& g, std::span<const NodeId> sources,
                                             double scale, unsigned threads = 1);

/// `count` distinct ids from [0, node_count), ascending.
std::vector<NodeId> sample_pivots(std::size_t node_count, std::size_t count, std::uint64_t seed);

/// Highest-scoring out-neighbor of `v` not in `excluded`; ties go to the
/// lowest id.
std::optional<NodeId> top_neighbor_by_centrality(const LinkGraph& g, const CentralityScores& scores,
                                                 NodeId v, const NodeSet& excluded = {});

// "WCEN" v1: magic, version:u32, node_count:u64, method:u8, pivot_count:u64,
// seed:u64, node_count x f64.
inline constexpr std::string_view kCentralityMagic = "WCEN";
inline constexpr std::uint32_t kCentralityVersion = 1;

std::string serialize_centrality(const CentralityScores& scores);
CentralityScores deserialize_centrality(std::string_view bytes);
void save_centrality(const CentralityScores& scores, const std::filesystem::path& path);
CentralityScores load_centrality(const std::filesystem::path& path);

}  // namespace wikinav
