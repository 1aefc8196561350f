#include "wikinav/centrality.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "byte_io.hpp"
#include "wikinav/errors.hpp"
#include "wikinav/rng.hpp"

namespace wikinav {

namespace {

constexpr std::size_t kSourceBlocks = 64;

/// Scratch buffers for one Brandes pass, reused across sources.
struct BrandesWorkspace {
  explicit BrandesWorkspace(std::size_t n) : dist(n, kUnreachable), sigma(n, 0.0), delta(n, 0.0) {
    order.reserve(n);
  }

  // Adds the dependencies of `source` on every other node into `acc`.
  void accumulate(const LinkGraph& g, NodeId source, std::vector<double>& acc) {
    order.clear();
    dist[source] = 0;
    sigma[source] = 1.0;
    order.push_back(source);
    for (std::size_t head = 0; head < order.size(); ++head) {
      const NodeId u = order[head];
      for (NodeId w : g.out_neighbors(u)) {
        if (dist[w] == kUnreachable) {
          dist[w] = dist[u] + 1;
          order.push_back(w);
        }
        if (dist[w] == dist[u] + 1) sigma[w] += sigma[u];
      }
    }
    // Reverse BFS order; predecessors are the in-neighbors one layer closer.
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const NodeId w = *it;
      const double coeff = (1.0 + delta[w]) / sigma[w];
      for (NodeId v : g.in_neighbors(w)) {
        if (dist[v] != kUnreachable && dist[v] + 1 == dist[w]) delta[v] += sigma[v] * coeff;
      }
      if (w != source) acc[w] += delta[w];
    }
    for (NodeId v : order) {
      dist[v] = kUnreachable;
      sigma[v] = 0.0;
      delta[v] = 0.0;
    }
  }

  std::vector<std::uint32_t> dist;
  std::vector<double> sigma;
  std::vector<double> delta;
  std::vector<NodeId> order;
};

}  // namespace

std::vector<double> betweenness_from_sources(const LinkGraph& g, std::span<const NodeId> sources,
                                             double scale, unsigned threads) {
  const std::size_t n = g.node_count();
  for (NodeId s : sources) {
    if (s >= n) throw ContractViolation("betweenness source out of range");
  }
  // Sources are split into a fixed number of blocks whose partial sums are
  // folded into the total in block order, so the floating-point result does
  // not depend on the thread count.
  const std::size_t blocks = std::max<std::size_t>(1, std::min<std::size_t>(kSourceBlocks, sources.size()));
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(blocks)));

  std::vector<double> total(n, 0.0);
  std::atomic<std::size_t> next_block{0};
  std::size_t merged = 0;
  std::mutex merge_mutex;
  std::condition_variable merge_cv;

  auto work = [&] {
    BrandesWorkspace ws(n);
    std::vector<double> partial(n, 0.0);
    for (;;) {
      const std::size_t b = next_block.fetch_add(1);
      if (b >= blocks) return;
      const std::size_t begin = sources.size() * b / blocks;
      const std::size_t end = sources.size() * (b + 1) / blocks;
      for (std::size_t i = begin; i < end; ++i) ws.accumulate(g, sources[i], partial);
      std::unique_lock lock(merge_mutex);
      merge_cv.wait(lock, [&] { return merged == b; });
      for (std::size_t v = 0; v < n; ++v) total[v] += partial[v];
      ++merged;
      lock.unlock();
      merge_cv.notify_all();
      std::fill(partial.begin(), partial.end(), 0.0);
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }

  if (scale != 1.0) {
    for (double& x : total) x *= scale;
  }
  return total;
}

CentralityScores betweenness_exact(const LinkGraph& g, unsigned threads) {
  std::vector<NodeId> all(g.node_count());
  std::iota(all.begin(), all.end(), NodeId{0});
  return {betweenness_from_sources(g, all, 1.0, threads), CentralityMethod::Exact,
          g.node_count(), 0};
}

std::vector<NodeId> sample_pivots(std::size_t node_count, std::size_t count, std::uint64_t seed) {
  if (count > node_count) throw ContractViolation("pivot count exceeds node count");
  // Partial Fisher-Yates.
  std::vector<NodeId> ids(node_count);
  std::iota(ids.begin(), ids.end(), NodeId{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(ids[i], ids[i + rng.uniform_index(node_count - i)]);
  }
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

CentralityScores betweenness_sampled(const LinkGraph& g, std::size_t pivot_count,
                                     std::uint64_t seed, unsigned threads) {
  if (pivot_count < 1 || pivot_count > g.node_count()) {
    throw ContractViolation("pivot_count must be in [1, node_count], got " +
                            std::to_string(pivot_count));
  }
  const auto pivots = sample_pivots(g.node_count(), pivot_count, seed);
  const double scale = static_cast<double>(g.node_count()) / static_cast<double>(pivot_count);
  return {betweenness_from_sources(g, pivots, scale, threads), CentralityMethod::Sampled,
          pivot_count, seed};
}

std::optional<NodeId> top_neighbor_by_centrality(const LinkGraph& g, const CentralityScores& scores,
                                                 NodeId v, const NodeSet& excluded) {
  if (scores.size() != g.node_count()) {
    throw ContractViolation("centrality scores do not match the graph");
  }
  std::optional<NodeId> best;
  for (NodeId w : g.out_neighbors(v)) {
    if (excluded.contains(w)) continue;
    // Neighbors are ascending, so strict > keeps the lowest id on ties.
    if (!best || scores[w] > scores[*best]) best = w;
  }
  return best;
}

std::string serialize_centrality(const CentralityScores& scores) {
  detail::ByteWriter w;
  w.bytes(kCentralityMagic);
  w.u32(kCentralityVersion);
  w.u64(scores.size());
  w.u8(static_cast<std::uint8_t>(scores.method));
  w.u64(scores.pivot_count);
  w.u64(scores.seed);
  for (double x : scores.values) w.f64(x);
  return w.take();
}

CentralityScores deserialize_centrality(std::string_view bytes) {
  detail::ByteReader r(bytes, "centrality file");
  r.expect_magic(kCentralityMagic, kCentralityVersion);
  CentralityScores s;
  const auto n = r.u64();
  const auto tag = r.u8();
  if (tag > 1) r.fail("unknown method tag " + std::to_string(tag));
  s.method = static_cast<CentralityMethod>(tag);
  s.pivot_count = r.u64();
  s.seed = r.u64();
  if (r.remaining() / 8 < n) r.fail("truncated file");
  s.values.resize(n);
  for (double& x : s.values) {
    x = r.f64();
    if (!std::isfinite(x) || x < 0) r.fail("score must be finite and non-negative");
  }
  r.expect_end();
  return s;
}

void save_centrality(const CentralityScores& scores, const std::filesystem::path& path) {
  detail::write_file(path, serialize_centrality(scores));
}

CentralityScores load_centrality(const std::filesystem::path& path) {
  return deserialize_centrality(detail::read_file(path));
}

}  // namespace wikinav
