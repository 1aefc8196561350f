#include "fixtures.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

namespace wntest {

LinkGraph RawGraph::build() const {
  std::vector<wikinav::Edge> out;
  out.reserve(edges.size());
  for (auto [u, v] : edges) out.push_back({u, v});
  return LinkGraph::from_edges(n, std::move(out));
}

std::vector<std::pair<NodeId, NodeId>> RawGraph::clean_edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (auto e : edges) {
    if (e.first != e.second) out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

RawGraph random_digraph(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  RawGraph g{n, {}};
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u != v && coin(rng)) g.edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
  }
  return g;
}

RawGraph random_strongly_connected(std::size_t n, double extra_p, std::uint64_t seed) {
  RawGraph g = random_digraph(n, extra_p, seed);
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; n > 1 && i < n; ++i) g.edges.emplace_back(order[i], order[(i + 1) % n]);
  return g;
}

RawGraph wiki_like(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::geometric_distribution<int> degree(0.12);
  // Zipf-like popularity: targets are drawn from a pool that grows with each hit.
  std::vector<NodeId> pool(n);
  std::iota(pool.begin(), pool.end(), NodeId{0});
  RawGraph g{n, {}};
  for (std::size_t u = 0; u < n; ++u) {
    const int d = std::min<int>(1 + degree(rng), 200);
    for (int k = 0; k < d; ++k) {
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      NodeId v = pool[pick(rng)];
      // Half of the links stay local to mimic topical clustering.
      if (k % 2 == 1) {
        std::uniform_int_distribution<long> off(-20, 20);
        long w = static_cast<long>(u) + off(rng);
        v = static_cast<NodeId>((w % static_cast<long>(n) + static_cast<long>(n)) % static_cast<long>(n));
      }
      if (v == u) continue;
      g.edges.emplace_back(static_cast<NodeId>(u), v);
      pool.push_back(v);
    }
  }
  return g;
}

std::vector<std::string> numbered_titles(std::size_t n) {
  std::vector<std::string> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back("Node " + std::to_string(i));
  return t;
}

TempDir::TempDir() {
  std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = base / ("wikinav-test-" + std::to_string(rd()) + std::to_string(rd()));
    if (std::filesystem::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_gzip(const std::filesystem::path& path, const std::string& text) {
  gzFile f = gzopen(path.string().c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::size_t off = 0;
  while (off < text.size()) {
    const auto n = static_cast<unsigned>(std::min<std::size_t>(text.size() - off, 1 << 20));
    if (gzwrite(f, text.data() + off, n) != static_cast<int>(n)) {
      gzclose(f);
      throw std::runtime_error("gzwrite failed");
    }
    off += n;
  }
  gzclose(f);
}

}  // namespace wntest
