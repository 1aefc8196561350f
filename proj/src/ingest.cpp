#include "wikinav/ingest.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <unordered_map>

#include "wikinav/errors.hpp"

namespace wikinav {

struct GzLineReader::Handle {
  gzFile file = nullptr;
  ~Handle() {
    if (file) gzclose(file);
  }
};

GzLineReader::GzLineReader(const std::filesystem::path& path, std::size_t chunk_size)
    : handle_(std::make_unique<Handle>()), path_(path.string()), chunk_(std::max<std::size_t>(chunk_size, 1)) {
  handle_->file = gzopen(path_.c_str(), "rb");
  if (!handle_->file) throw IoError("cannot open " + path_);
}

GzLineReader::~GzLineReader() = default;

bool GzLineReader::fill() {
  if (eof_) return false;
  const int got = gzread(handle_->file, chunk_.data(), static_cast<unsigned>(chunk_.size()));
  if (got < 0) {
    int err = 0;
    const char* msg = gzerror(handle_->file, &err);
    throw IoError("read failed for " + path_ + ": " + (msg ? msg : "unknown"));
  }
  if (got == 0) {
    eof_ = true;
    return false;
  }
  pending_.erase(0, pending_pos_);
  pending_pos_ = 0;
  pending_.append(chunk_.data(), static_cast<std::size_t>(got));
  return true;
}

bool GzLineReader::next_line(std::string& line) {
  for (;;) {
    const auto nl = pending_.find('\n', pending_pos_);
    if (nl != std::string::npos) {
      line.assign(pending_, pending_pos_, nl - pending_pos_);
      pending_pos_ = nl + 1;
      return true;
    }
    if (!fill()) {
      if (pending_pos_ < pending_.size()) {
        line.assign(pending_, pending_pos_);
        pending_pos_ = pending_.size();
        return true;
      }
      return false;
    }
  }
}

struct GzWriter::Handle {
  gzFile file = nullptr;
  ~Handle() {
    if (file) gzclose(file);
  }
};

GzWriter::GzWriter(const std::filesystem::path& path)
    : handle_(std::make_unique<Handle>()), path_(path.string()) {
  handle_->file = gzopen(path_.c_str(), "wb");
  if (!handle_->file) throw IoError("cannot open " + path_ + " for writing");
}

GzWriter::~GzWriter() = default;

void GzWriter::write(std::string_view data) {
  if (!handle_->file) throw IoError("write after close: " + path_);
  while (!data.empty()) {
    const auto n = static_cast<unsigned>(std::min<std::size_t>(data.size(), 1u << 30));
    if (gzwrite(handle_->file, data.data(), n) != static_cast<int>(n)) {
      throw IoError("write failed: " + path_);
    }
    data.remove_prefix(n);
  }
}

void GzWriter::close() {
  if (!handle_->file) return;
  const int rc = gzclose(handle_->file);
  handle_->file = nullptr;
  if (rc != Z_OK) throw IoError("close failed: " + path_);
}

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\v\f";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

struct ParsedLine {
  std::uint64_t from_id, to_id;
  std::string_view from_title, to_title;
};

bool parse_edge_line(std::string_view line, ParsedLine& out) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::string_view fields[4];
  std::size_t count = 0;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    if (count == 4) return false;
    fields[count++] = line.substr(start, tab == std::string_view::npos ? tab : tab - start);
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  if (count != 4) return false;
  out.from_title = trim(fields[1]);
  out.to_title = trim(fields[3]);
  return parse_u64(fields[0], out.from_id) && parse_u64(fields[2], out.to_id) &&
         !out.from_title.empty() && !out.to_title.empty();
}

}  // namespace

IngestResult ingest_edge_list(const std::filesystem::path& path, const IngestOptions& options) {
  GzLineReader reader(path, options.chunk_size);
  IngestResult result;
  IngestStats& stats = result.stats;

  std::unordered_map<std::uint64_t, NodeId> dense;
  std::vector<std::string> titles;
  auto intern = [&](std::uint64_t page_id, std::string_view title) {
    auto [it, inserted] = dense.try_emplace(page_id, static_cast<NodeId>(titles.size()));
    if (inserted) {
      if (titles.size() >= kNoNode - 1) throw FormatError("too many distinct pages");
      titles.emplace_back(title);
      result.page_ids.push_back(page_id);
    }
    return it->second;
  };

  // Duplicates are squeezed out periodically so memory tracks the number of
  // distinct edges rather than the number of input lines.
  std::vector<Edge> edges;
  std::uint64_t accepted = 0;
  std::size_t compacted_size = 0;
  auto compact = [&] {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    compacted_size = edges.size();
  };

  std::string line;
  bool header = true;
  while (reader.next_line(line)) {
    ++stats.lines_read;
    if (header) {
      header = false;
      continue;
    }
    ParsedLine parsed;
    if (!parse_edge_line(line, parsed)) {
      ++stats.malformed_lines;
    } else {
      const NodeId u = intern(parsed.from_id, parsed.from_title);
      const NodeId v = intern(parsed.to_id, parsed.to_title);
      if (u == v) {
        ++stats.self_loops_dropped;
      } else {
        edges.push_back({u, v});
        ++accepted;
        if (edges.size() >= std::max(options.compact_threshold, 2 * compacted_size)) compact();
      }
    }
    if (options.on_progress && options.progress_every > 0 &&
        stats.lines_read % options.progress_every == 0) {
      stats.edges_kept = compacted_size;
      options.on_progress(stats);
    }
  }
  compact();
  stats.edges_kept = edges.size();
  stats.duplicates_dropped = accepted - edges.size();

  const std::size_t n = titles.size();
  result.graph = LinkGraph::from_edges(n, std::move(edges), std::move(titles));
  if (options.on_progress) options.on_progress(stats);
  return result;
}

std::string escape_title(std::string_view title) {
  std::string out;
  out.reserve(title.size());
  for (char c : title) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_title(std::string_view escaped) {
  std::string out;
  out.reserve(escaped.size());
  for (std::size_t i = 0; i < escaped.size(); ++i) {
    const char c = escaped[i];
    if (c != '\\') {
      out += c;
      continue;
    }
    if (i + 1 == escaped.size()) throw FormatError("dangling escape");
    switch (escaped[++i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      default: throw FormatError(std::string("unknown escape \\") + escaped[i]);
    }
  }
  return out;
}

namespace {
constexpr std::string_view kTitleMapHeader = "dense_id\tpage_id\ttitle";
}

void write_title_map(const LinkGraph& g, const std::filesystem::path& path,
                     std::span<const std::uint64_t> page_ids) {
  if (!page_ids.empty() && page_ids.size() != g.node_count()) {
    throw ContractViolation("page id count does not match node count");
  }
  GzWriter out(path);
  std::string buf(kTitleMapHeader);
  buf += '\n';
  for (NodeId v = 0; v < g.node_count(); ++v) {
    buf += std::to_string(v);
    buf += '\t';
    buf += std::to_string(page_ids.empty() ? std::uint64_t{v} : page_ids[v]);
    buf += '\t';
    buf += escape_title(g.title(v));
    buf += '\n';
    if (buf.size() > (1 << 20)) {
      out.write(buf);
      buf.clear();
    }
  }
  out.write(buf);
  out.close();
}

std::vector<TitleEntry> read_title_map(const std::filesystem::path& path) {
  GzLineReader reader(path);
  std::vector<TitleEntry> entries;
  std::string line;
  std::uint64_t line_no = 0;
  auto fail = [&](const std::string& msg) -> FormatError {
    return FormatError(path.string() + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (reader.next_line(line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != kTitleMapHeader) throw fail("missing title map header");
      continue;
    }
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw fail("expected 3 tab-separated fields");
    std::uint64_t id = 0, page = 0;
    const std::string_view sv(line);
    if (!parse_u64(sv.substr(0, t1), id) || !parse_u64(sv.substr(t1 + 1, t2 - t1 - 1), page)) {
      throw fail("invalid integer field");
    }
    if (id != entries.size()) throw fail("dense ids must be consecutive from 0");
    try {
      entries.push_back({static_cast<NodeId>(id), page, unescape_title(sv.substr(t2 + 1))});
    } catch (const FormatError& e) {
      throw fail(e.what());
    }
  }
  if (line_no == 0) throw FormatError(path.string() + ":1: missing title map header");
  return entries;
}

std::vector<std::uint64_t> remap_page_ids(std::span<const std::uint64_t> page_ids,
                                          const IdRemap& remap) {
  std::vector<std::uint64_t> out;
  out.reserve(remap.size());
  for (NodeId old_id : remap.new_to_old()) {
    if (old_id >= page_ids.size()) throw ContractViolation("remap refers past page id table");
    out.push_back(page_ids[old_id]);
  }
  return out;
}

}  // namespace wikinav
