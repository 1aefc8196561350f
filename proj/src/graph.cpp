#include "wikinav/graph.hpp"

#include <algorithm>
#include <deque>

#include "wikinav/errors.hpp"

namespace wikinav {

namespace {

void build_csr(std::size_t node_count, const std::vector<Edge>& sorted_edges, bool forward,
               std::vector<std::uint64_t>& offsets, std::vector<NodeId>& targets) {
  offsets.assign(node_count + 1, 0);
  for (const Edge& e : sorted_edges) ++offsets[(forward ? e.from : e.to) + 1];
  for (std::size_t i = 0; i < node_count; ++i) offsets[i + 1] += offsets[i];
  targets.resize(sorted_edges.size());
  std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
  // Edges arrive sorted by (from, to), so both directions come out ascending.
  for (const Edge& e : sorted_edges) {
    if (forward) {
      targets[cursor[e.from]++] = e.to;
    } else {
      targets[cursor[e.to]++] = e.from;
    }
  }
}

}  // namespace

LinkGraph LinkGraph::from_edges(std::size_t node_count, std::vector<Edge> edges,
                                std::vector<std::string> titles) {
  if (node_count >= kNoNode) throw ContractViolation("node_count exceeds NodeId range");
  if (titles.empty()) {
    titles.reserve(node_count);
    for (std::size_t v = 0; v < node_count; ++v) titles.push_back(std::to_string(v));
  } else if (titles.size() != node_count) {
    throw ContractViolation("title count " + std::to_string(titles.size()) +
                            " does not match node_count " + std::to_string(node_count));
  }
  for (const Edge& e : edges) {
    if (e.from >= node_count || e.to >= node_count) {
      throw ContractViolation("edge endpoint out of range");
    }
  }
  std::erase_if(edges, [](const Edge& e) { return e.from == e.to; });
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  LinkGraph g;
  build_csr(node_count, edges, true, g.fwd_offsets_, g.fwd_targets_);
  build_csr(node_count, edges, false, g.bwd_offsets_, g.bwd_targets_);
  g.titles_ = std::move(titles);
  return g;
}

void LinkGraph::check_node(NodeId v) const {
  if (v >= node_count()) {
    throw ContractViolation("node id " + std::to_string(v) + " out of range [0, " +
                            std::to_string(node_count()) + ")");
  }
}

std::span<const NodeId> LinkGraph::out_neighbors(NodeId v) const {
  check_node(v);
  return {fwd_targets_.data() + fwd_offsets_[v], fwd_targets_.data() + fwd_offsets_[v + 1]};
}

std::span<const NodeId> LinkGraph::in_neighbors(NodeId v) const {
  check_node(v);
  return {bwd_targets_.data() + bwd_offsets_[v], bwd_targets_.data() + bwd_offsets_[v + 1]};
}

bool LinkGraph::has_edge(NodeId from, NodeId to) const {
  const auto succ = out_neighbors(from);
  return std::binary_search(succ.begin(), succ.end(), to);
}

const std::string& LinkGraph::title(NodeId v) const {
  check_node(v);
  return titles_[v];
}

std::vector<Edge> LinkGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (NodeId u = 0; u < node_count(); ++u) {
    for (NodeId v : out_neighbors(u)) out.push_back({u, v});
  }
  return out;
}

IdRemap::IdRemap(std::vector<NodeId> new_to_old) : new_to_old_(std::move(new_to_old)) {
  if (std::adjacent_find(new_to_old_.begin(), new_to_old_.end(),
                         std::greater_equal<>()) != new_to_old_.end()) {
    throw ContractViolation("IdRemap requires strictly ascending original ids");
  }
}

NodeId IdRemap::to_old(NodeId new_id) const {
  if (new_id >= new_to_old_.size()) throw ContractViolation("remap id out of range");
  return new_to_old_[new_id];
}

std::optional<NodeId> IdRemap::to_new(NodeId old_id) const {
  auto it = std::lower_bound(new_to_old_.begin(), new_to_old_.end(), old_id);
  if (it == new_to_old_.end() || *it != old_id) return std::nullopt;
  return static_cast<NodeId>(it - new_to_old_.begin());
}

IdRemap IdRemap::then(const IdRemap& next) const {
  std::vector<NodeId> composed;
  composed.reserve(next.size());
  for (NodeId mid : next.new_to_old()) composed.push_back(to_old(mid));
  return IdRemap(std::move(composed));
}

std::span<const NodeId> out_neighbors(const LinkGraph& g, NodeId v) {
  return g.out_neighbors(v);
}

Subgraph induced_subgraph(const LinkGraph& g, std::vector<NodeId> keep) {
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (!keep.empty() && keep.back() >= g.node_count()) {
    throw ContractViolation("induced_subgraph: node id out of range");
  }
  std::vector<NodeId> old_to_new(g.node_count(), kNoNode);
  for (std::size_t i = 0; i < keep.size(); ++i) old_to_new[keep[i]] = static_cast<NodeId>(i);

  std::vector<Edge> edges;
  std::vector<std::string> titles;
  titles.reserve(keep.size());
  for (NodeId old_u : keep) {
    titles.push_back(g.title(old_u));
    for (NodeId old_v : g.out_neighbors(old_u)) {
      if (old_to_new[old_v] != kNoNode) edges.push_back({old_to_new[old_u], old_to_new[old_v]});
    }
  }
  return {LinkGraph::from_edges(keep.size(), std::move(edges), std::move(titles)),
          IdRemap(std::move(keep))};
}

Subgraph prune_sinks(const LinkGraph& g, bool also_sources) {
  const std::size_t n = g.node_count();
  std::vector<std::size_t> out_deg(n), in_deg(n);
  std::vector<bool> removed(n, false);
  std::vector<NodeId> queue;
  for (NodeId v = 0; v < n; ++v) {
    out_deg[v] = g.out_degree(v);
    in_deg[v] = g.in_degree(v);
    if (out_deg[v] == 0 || (also_sources && in_deg[v] == 0)) {
      removed[v] = true;
      queue.push_back(v);
    }
  }
  // A node is marked when queued; deleting it lowers the live degree of its
  // surviving neighbors, which may cascade.
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId v = queue[head];
    for (NodeId u : g.in_neighbors(v)) {
      if (!removed[u] && --out_deg[u] == 0) {
        removed[u] = true;
        queue.push_back(u);
      }
    }
    if (also_sources) {
      for (NodeId w : g.out_neighbors(v)) {
        if (!removed[w] && --in_deg[w] == 0) {
          removed[w] = true;
          queue.push_back(w);
        }
      }
    }
  }
  std::vector<NodeId> keep;
  keep.reserve(n - queue.size());
  for (NodeId v = 0; v < n; ++v) {
    if (!removed[v]) keep.push_back(v);
  }
  return induced_subgraph(g, std::move(keep));
}

Subgraph k_ball_sample(const LinkGraph& g, NodeId seed, std::size_t radius,
                       std::size_t node_cap) {
  if (seed >= g.node_count()) throw ContractViolation("k_ball_sample: seed out of range");
  if (node_cap < 1) throw ContractViolation("k_ball_sample: node_cap must be >= 1");

  std::vector<bool> seen(g.node_count(), false);
  std::vector<NodeId> retained{seed};
  std::vector<NodeId> frontier{seed};
  seen[seed] = true;
  for (std::size_t depth = 1; depth <= radius && retained.size() < node_cap; ++depth) {
    std::vector<NodeId> layer;
    for (NodeId u : frontier) {
      for (NodeId v : g.out_neighbors(u)) {
        if (!seen[v]) {
          seen[v] = true;
          layer.push_back(v);
        }
      }
    }
    if (layer.empty()) break;
    std::sort(layer.begin(), layer.end());
    const std::size_t room = node_cap - retained.size();
    if (layer.size() > room) layer.resize(room);
    retained.insert(retained.end(), layer.begin(), layer.end());
    frontier = std::move(layer);
  }
  return induced_subgraph(g, std::move(retained));
}

std::optional<std::vector<NodeId>> bfs_shortest_path(const LinkGraph& g, NodeId from,
                                                     NodeId to) {
  if (from >= g.node_count() || to >= g.node_count()) {
    throw ContractViolation("bfs_shortest_path: node id out of range");
  }
  if (from == to) return std::vector<NodeId>{from};

  std::vector<NodeId> parent(g.node_count(), kNoNode);
  parent[from] = from;
  std::deque<NodeId> queue{from};
  bool found = false;
  while (!queue.empty() && !found) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : g.out_neighbors(u)) {
      if (parent[v] != kNoNode) continue;
      parent[v] = u;
      if (v == to) {
        found = true;
        break;
      }
      queue.push_back(v);
    }
  }
  if (!found) return std::nullopt;

  std::vector<NodeId> path{to};
  for (NodeId v = to; v != from;) {
    v = parent[v];
    path.push_back(v);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

namespace {

std::vector<std::uint32_t> bfs_levels(const LinkGraph& g, NodeId root, bool forward) {
  std::vector<std::uint32_t> dist(g.node_count(), kUnreachable);
  dist[root] = 0;
  std::vector<NodeId> queue{root};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId u = queue[head];
    const auto next = forward ? g.out_neighbors(u) : g.in_neighbors(u);
    for (NodeId v : next) {
      if (dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

}  // namespace

std::vector<std::uint32_t> bfs_distances(const LinkGraph& g, NodeId from) {
  if (from >= g.node_count()) throw ContractViolation("bfs_distances: node id out of range");
  return bfs_levels(g, from, true);
}

std::vector<std::uint32_t> distances_to(const LinkGraph& g, NodeId target) {
  if (target >= g.node_count()) throw ContractViolation("distances_to: node id out of range");
  return bfs_levels(g, target, false);
}

std::vector<NodeId> reachable_set(const LinkGraph& g, NodeId from) {
  const auto dist = bfs_distances(g, from);
  std::vector<NodeId> out;
  for (NodeId v = 0; v < dist.size(); ++v) {
    if (dist[v] != kUnreachable) out.push_back(v);
  }
  return out;
}

}  // namespace wikinav
