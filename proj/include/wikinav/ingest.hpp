#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wikinav/graph.hpp"

namespace wikinav {

/// Reads a gzip (or plain) text file line by line with a fixed read-chunk size.
/// Lines are split on '\n'; a trailing '\r' is kept for the caller to handle.
class GzLineReader {
 public:
  explicit GzLineReader(const std::filesystem::path& path, std::size_t chunk_size = 1 << 16);
  ~GzLineReader();
  GzLineReader(const GzLineReader&) = delete;
  GzLineReader& operator=(const GzLineReader&) = delete;

  bool next_line(std::string& line);

 private:
  bool fill();

  struct Handle;
  std::unique_ptr<Handle> handle_;
  std::string path_;
  std::vector<char> chunk_;
  std::string pending_;
  std::size_t pending_pos_ = 0;
  bool eof_ = false;
};

class GzWriter {
 public:
  explicit GzWriter(const std::filesystem::path& path);
  ~GzWriter();
  GzWriter(const GzWriter&) = delete;
  GzWriter& operator=(const GzWriter&) = delete;

  void write(std::string_view data);
  /// Flushes and closes; errors surface here rather than in the destructor.
  void close();

 private:
  struct Handle;
  std::unique_ptr<Handle> handle_;
  std::string path_;
};

struct IngestStats {
  std::uint64_t lines_read = 0;
  std::uint64_t edges_kept = 0;
  std::uint64_t duplicates_dropped = 0;
  std::uint64_t self_loops_dropped = 0;
  std::uint64_t malformed_lines = 0;
};

struct IngestOptions {
  std::size_t chunk_size = 1 << 16;
  std::function<void(const IngestStats&)> on_progress;
  std::uint64_t progress_every = 1'000'000;
  /// Pending raw edges are deduplicated whenever the buffer exceeds twice the
  /// last compacted size (and at least this many entries).
  std::size_t compact_threshold = 1 << 20;
};

struct IngestResult {
  LinkGraph graph;
  /// Original page id per dense node id.
  std::vector<std::uint64_t> page_ids;
  IngestStats stats;
};

/// Streams a WikiLinkGraphs-style TSV (header + page_id_from, page_title_from,
/// page_id_to, page_title_to). Dense ids follow first-seen order; malformed
/// lines are counted and skipped.
IngestResult ingest_edge_list(const std::filesystem::path& path, const IngestOptions& options = {});

struct TitleEntry {
  NodeId id;
  std::uint64_t page_id;
  std::string title;
  bool operator==(const TitleEntry&) const = default;
};

std::string escape_title(std::string_view title);
std::string unescape_title(std::string_view escaped);

/// Gzip TSV "dense_id, page_id, title". Without `page_ids` the dense id is
/// written as the page id.
void write_title_map(const LinkGraph& g, const std::filesystem::path& path,
                     std::span<const std::uint64_t> page_ids = {});
std::vector<TitleEntry> read_title_map(const std::filesystem::path& path);

/// Carries per-node page ids through a prune/sample remap.
std::vector<std::uint64_t> remap_page_ids(std::span<const std::uint64_t> page_ids,
                                          const IdRemap& remap);

}  // namespace wikinav
