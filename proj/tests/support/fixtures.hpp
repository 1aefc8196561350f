#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "wikinav/graph.hpp"

namespace wntest {

using wikinav::LinkGraph;
using wikinav::NodeId;

/// Raw edge list as generated, possibly with duplicates and self-loops.
struct RawGraph {
  std::size_t n = 0;
  std::vector<std::pair<NodeId, NodeId>> edges;

  LinkGraph build() const;
  /// Distinct edges without self-loops, sorted.
  std::vector<std::pair<NodeId, NodeId>> clean_edges() const;
};

/// Erdos-Renyi style digraph; each ordered pair present with probability p.
RawGraph random_digraph(std::size_t n, double p, std::uint64_t seed);

/// Random Hamiltonian cycle plus Erdos-Renyi extras, so every node reaches every other.
RawGraph random_strongly_connected(std::size_t n, double extra_p, std::uint64_t seed);

/// Heavy-tailed out-degrees with preferential targets, loosely resembling a link graph.
RawGraph wiki_like(std::size_t n, std::uint64_t seed);

/// Titles "Node <i>" for the fixture graphs that need readable names.
std::vector<std::string> numbered_titles(std::size_t n);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, const std::string& bytes);

/// Gzip-compresses `text` into `path`.
void write_gzip(const std::filesystem::path& path, const std::string& text);

}  // namespace wntest
