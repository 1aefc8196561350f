#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wikinav/types.hpp"

namespace wikinav {

struct Edge {
  NodeId from;
  NodeId to;
  auto operator<=>(const Edge&) const = default;
};

/// Immutable directed graph in compressed sparse row form.
///
/// Both adjacency directions are stored. Lists are sorted ascending, contain
/// no duplicates and no self-loops, and each direction is the transpose of
/// the other. Every node carries a title.
class LinkGraph {
 public:
  LinkGraph() = default;

  /// Normalizes an arbitrary edge list: self-loops and repeated edges are
  /// dropped. An empty `titles` assigns each node its decimal id.
  static LinkGraph from_edges(std::size_t node_count, std::vector<Edge> edges,
                              std::vector<std::string> titles = {});

  std::size_t node_count() const { return titles_.size(); }
  std::size_t edge_count() const { return fwd_targets_.size(); }

  std::span<const NodeId> out_neighbors(NodeId v) const;
  std::span<const NodeId> in_neighbors(NodeId v) const;
  std::size_t out_degree(NodeId v) const { return out_neighbors(v).size(); }
  std::size_t in_degree(NodeId v) const { return in_neighbors(v).size(); }
  bool has_edge(NodeId from, NodeId to) const;

  const std::string& title(NodeId v) const;
  const std::vector<std::string>& titles() const { return titles_; }

  /// All edges in (from, to) lexicographic order.
  std::vector<Edge> edges() const;

  // Raw CSR views for serialization.
  std::span<const std::uint64_t> forward_offsets() const { return fwd_offsets_; }
  std::span<const NodeId> forward_targets() const { return fwd_targets_; }
  std::span<const std::uint64_t> backward_offsets() const { return bwd_offsets_; }
  std::span<const NodeId> backward_targets() const { return bwd_targets_; }

  bool operator==(const LinkGraph&) const = default;

 private:
  void check_node(NodeId v) const;

  std::vector<std::uint64_t> fwd_offsets_{0};
  std::vector<NodeId> fwd_targets_;
  std::vector<std::uint64_t> bwd_offsets_{0};
  std::vector<NodeId> bwd_targets_;
  std::vector<std::string> titles_;
};

/// Old-to-new id table produced whenever nodes are dropped.
/// New ids are assigned in ascending order of the original ids.
class IdRemap {
 public:
  IdRemap() = default;
  explicit IdRemap(std::vector<NodeId> new_to_old);

  std::size_t size() const { return new_to_old_.size(); }
  NodeId to_old(NodeId new_id) const;
  std::optional<NodeId> to_new(NodeId old_id) const;
  const std::vector<NodeId>& new_to_old() const { return new_to_old_; }

  /// Composes `this` (a → b) with `next` (b → c) into a → c.
  IdRemap then(const IdRemap& next) const;

  bool operator==(const IdRemap&) const = default;

 private:
  std::vector<NodeId> new_to_old_;
};

struct Subgraph {
  LinkGraph graph;
  IdRemap remap;
};

inline constexpr std::uint32_t kUnreachable = std::numeric_limits<std::uint32_t>::max();

std::span<const NodeId> out_neighbors(const LinkGraph& g, NodeId v);

/// Induced subgraph on `keep` (any order, duplicates ignored), titles carried over.
Subgraph induced_subgraph(const LinkGraph& g, std::vector<NodeId> keep);

/// Fixed point of repeatedly deleting out-degree-0 nodes. With
/// `also_sources`, in-degree-0 nodes are deleted in the same fixed point.
Subgraph prune_sinks(const LinkGraph& g, bool also_sources = false);

/// Forward BFS ball of `radius` hops around `seed`. The last layer is cut in
/// ascending id order once `node_cap` nodes are retained.
Subgraph k_ball_sample(const LinkGraph& g, NodeId seed, std::size_t radius,
                       std::size_t node_cap);

/// Minimum-hop path; neighbors are expanded in ascending id order, so among
/// equal-length paths the result is fixed.
std::optional<std::vector<NodeId>> bfs_shortest_path(const LinkGraph& g, NodeId from,
                                                     NodeId to);

/// Hop distance from `from` to every node (kUnreachable when no path).
std::vector<std::uint32_t> bfs_distances(const LinkGraph& g, NodeId from);

/// Hop distance from every node to `target`, via the backward adjacency.
std::vector<std::uint32_t> distances_to(const LinkGraph& g, NodeId target);

/// Every node reachable from `from`, including itself, ascending.
std::vector<NodeId> reachable_set(const LinkGraph& g, NodeId from);

}  // namespace wikinav
