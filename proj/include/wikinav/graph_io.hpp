#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "wikinav/graph.hpp"

namespace wikinav {

// Binary layout ("WNAV", version 1, little-endian):
//   magic[4] version:u32 node_count:u64 edge_count:u64
//   forward offsets (node_count+1) x u64, forward targets edge_count x u64
//   backward offsets, backward targets (same shapes)
//   node_count titles, each u32 byte length + UTF-8 bytes
inline constexpr std::string_view kGraphMagic = "WNAV";
inline constexpr std::uint32_t kGraphVersion = 1;

std::string serialize_graph(const LinkGraph& g);

/// Rejects bad magic/version, truncation, and any structural inconsistency
/// (unsorted lists, self-loops, out-of-range ids, non-transposed directions).
LinkGraph deserialize_graph(std::string_view bytes);

void save_graph(const LinkGraph& g, const std::filesystem::path& path);
LinkGraph load_graph(const std::filesystem::path& path);

void export_graphml(const LinkGraph& g, std::ostream& out);
void export_graphml(const LinkGraph& g, const std::filesystem::path& path);

/// FNV-1a over the binary serialization.
std::uint64_t content_hash(const LinkGraph& g);

}  // namespace wikinav
