#include "wikinav/graph_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "byte_io.hpp"
#include "wikinav/errors.hpp"
#include "wikinav/rng.hpp"

namespace wikinav {

namespace detail {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace detail

std::string serialize_graph(const LinkGraph& g) {
  detail::ByteWriter w;
  w.bytes(kGraphMagic);
  w.u32(kGraphVersion);
  w.u64(g.node_count());
  w.u64(g.edge_count());
  for (auto off : g.forward_offsets()) w.u64(off);
  for (auto t : g.forward_targets()) w.u64(t);
  for (auto off : g.backward_offsets()) w.u64(off);
  for (auto t : g.backward_targets()) w.u64(t);
  for (const auto& title : g.titles()) {
    w.u32(static_cast<std::uint32_t>(title.size()));
    w.bytes(title);
  }
  return w.take();
}

namespace {

struct CsrBlock {
  std::vector<std::uint64_t> offsets;
  std::vector<std::uint64_t> targets;
};

CsrBlock read_csr(detail::ByteReader& r, std::uint64_t n, std::uint64_t m) {
  // Bound the allocation by what the file can actually hold.
  if (r.remaining() / 8 < n + 1) r.fail("truncated file");
  CsrBlock block;
  block.offsets.resize(n + 1);
  for (auto& off : block.offsets) off = r.u64();
  if (r.remaining() / 8 < m) r.fail("truncated file");
  block.targets.resize(m);
  for (auto& t : block.targets) t = r.u64();
  if (block.offsets.front() != 0 || block.offsets.back() != m ||
      !std::is_sorted(block.offsets.begin(), block.offsets.end())) {
    r.fail("inconsistent adjacency offsets");
  }
  for (auto t : block.targets) {
    if (t >= n) r.fail("adjacency target out of range");
  }
  return block;
}

template <class A, class B>
bool same_values(std::span<const A> a, const std::vector<B>& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                    [](A x, B y) { return static_cast<std::uint64_t>(x) == y; });
}

}  // namespace

LinkGraph deserialize_graph(std::string_view bytes) {
  detail::ByteReader r(bytes, "graph file");
  r.expect_magic(kGraphMagic, kGraphVersion);
  const auto n = r.u64();
  const auto m = r.u64();
  if (n >= kNoNode) r.fail("node_count exceeds supported range");
  const CsrBlock fwd = read_csr(r, n, m);
  const CsrBlock bwd = read_csr(r, n, m);

  std::vector<std::string> titles;
  titles.reserve(std::min<std::uint64_t>(n, r.remaining() / 4));
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto len = r.u32();
    titles.emplace_back(r.bytes(len));
  }
  r.expect_end();

  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::uint64_t u = 0; u < n; ++u) {
    for (auto i = fwd.offsets[u]; i < fwd.offsets[u + 1]; ++i) {
      edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(fwd.targets[i])});
    }
  }
  LinkGraph g = LinkGraph::from_edges(n, std::move(edges), std::move(titles));
  // Rebuilding normalizes; any difference means the file was not canonical.
  if (!same_values(g.forward_offsets(), fwd.offsets) ||
      !same_values(g.forward_targets(), fwd.targets) ||
      !same_values(g.backward_offsets(), bwd.offsets) ||
      !same_values(g.backward_targets(), bwd.targets)) {
    r.fail("adjacency not sorted, deduplicated, or transposed");
  }
  return g;
}

void save_graph(const LinkGraph& g, const std::filesystem::path& path) {
  detail::write_file(path, serialize_graph(g));
}

LinkGraph load_graph(const std::filesystem::path& path) {
  return deserialize_graph(detail::read_file(path));
}

namespace {

void write_xml_text(std::ostream& out, std::string_view s) {
  for (char c : s) {
    switch (c) {
      case '&': out << "&amp;"; break;
      case '<': out << "&lt;"; break;
      case '>': out << "&gt;"; break;
      case '"': out << "&quot;"; break;
      case '\'': out << "&apos;"; break;
      case '\t': out << "&#9;"; break;
      case '\n': out << "&#10;"; break;
      case '\r': out << "&#13;"; break;
      default:
        // Other C0 controls are not representable in XML 1.0.
        if (static_cast<unsigned char>(c) >= 0x20) out << c;
    }
  }
}

}  // namespace

void export_graphml(const LinkGraph& g, std::ostream& out) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
         "  <key id=\"title\" for=\"node\" attr.name=\"title\" attr.type=\"string\"/>\n"
         "  <graph id=\"G\" edgedefault=\"directed\">\n";
  for (NodeId v = 0; v < g.node_count(); ++v) {
    out << "    <node id=\"n" << v << "\"><data key=\"title\">";
    write_xml_text(out, g.title(v));
    out << "</data></node>\n";
  }
  for (const Edge& e : g.edges()) {
    out << "    <edge source=\"n" << e.from << "\" target=\"n" << e.to << "\"/>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

void export_graphml(const LinkGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  export_graphml(g, out);
  if (!out) throw IoError("write failed: " + path.string());
}

std::uint64_t content_hash(const LinkGraph& g) { return fnv1a64(serialize_graph(g)); }

}  // namespace wikinav
