#include "wikinav/embeddings.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <nlohmann/json.hpp>

#include "byte_io.hpp"
#include "wikinav/errors.hpp"
#include "wikinav/rng.hpp"

namespace wikinav {

EmbeddingVector EmbeddingVector::normalized(std::vector<float> raw) {
  if (raw.empty()) throw FormatError("empty embedding vector");
  double sq = 0.0;
  for (float x : raw) {
    if (!std::isfinite(x)) throw FormatError("non-finite embedding component");
    sq += static_cast<double>(x) * x;
  }
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0)) throw FormatError("zero-norm embedding vector");
  if (std::abs(norm - 1.0) > 1e-6) {
    for (float& x : raw) x = static_cast<float>(x / norm);
  }
  return EmbeddingVector(std::move(raw));
}

double similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    throw ContractViolation("similarity: dimension mismatch " + std::to_string(a.dimension()) +
                            " vs " + std::to_string(b.dimension()));
  }
  const auto x = a.values();
  const auto y = b.values();
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += static_cast<double>(x[i]) * y[i];
  return dot;
}

std::vector<std::vector<float>> EmbeddingBackend::compute_batch(std::span<const EmbedRequest> batch) {
  std::vector<std::vector<float>> out;
  out.reserve(batch.size());
  for (const auto& req : batch) out.push_back(compute(req.node, req.title));
  return out;
}

std::vector<float> SyntheticHashBackend::compute(NodeId, std::string_view title) {
  std::uint64_t state = fnv1a64(title, 0xcbf29ce484222325ULL ^ splitmix64(seed_));
  auto uniform = [&state] {
    state = splitmix64(state);
    // (0, 1], never zero so the log below is finite.
    return (static_cast<double>(state >> 11) + 1.0) * 0x1.0p-53;
  };
  std::vector<float> v(dimension_);
  for (std::size_t i = 0; i < dimension_; i += 2) {
    // Box-Muller pair.
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * M_PI * uniform();
    v[i] = static_cast<float>(r * std::cos(theta));
    if (i + 1 < dimension_) v[i + 1] = static_cast<float>(r * std::sin(theta));
  }
  return v;
}

PrecomputedBackend::PrecomputedBackend(std::size_t dimension,
                                       std::map<NodeId, std::vector<float>> vectors)
    : dimension_(dimension), vectors_(std::move(vectors)) {
  for (const auto& [node, v] : vectors_) {
    if (v.size() != dimension_) {
      throw FormatError("vector for node " + std::to_string(node) + " has dimension " +
                        std::to_string(v.size()) + ", expected " + std::to_string(dimension_));
    }
  }
}

std::vector<float> PrecomputedBackend::compute(NodeId node, std::string_view) {
  auto it = vectors_.find(node);
  if (it == vectors_.end()) throw ProviderError(node, "no precomputed embedding");
  return it->second;
}

RemoteServiceBackend::RemoteServiceBackend(RemoteServiceOptions options)
    : options_(std::move(options)) {
  std::string_view url = options_.endpoint;
  constexpr std::string_view scheme = "http://";
  if (url.substr(0, scheme.size()) != scheme) {
    throw ConfigError("embedding endpoint must be an http:// URL: " + options_.endpoint);
  }
  url.remove_prefix(scheme.size());
  const auto slash = url.find('/');
  host_ = "http://" + std::string(url.substr(0, slash));
  path_ = slash == std::string_view::npos ? "/embed" : std::string(url.substr(slash));
  if (path_ == "/") path_ = "/embed";
  if (options_.batch_size == 0) options_.batch_size = 1;
}

std::vector<float> RemoteServiceBackend::compute(NodeId node, std::string_view title) {
  const EmbedRequest req{node, title};
  return request(std::span(&req, 1)).front();
}

std::vector<std::vector<float>> RemoteServiceBackend::compute_batch(
    std::span<const EmbedRequest> batch) {
  std::vector<std::vector<float>> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); i += options_.batch_size) {
    auto part = request(batch.subspan(i, std::min(options_.batch_size, batch.size() - i)));
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<std::vector<float>> RemoteServiceBackend::request(std::span<const EmbedRequest> batch) {
  nlohmann::json body;
  body["texts"] = nlohmann::json::array();
  for (const auto& req : batch) body["texts"].push_back(req.title);
  const std::string payload = body.dump();
  const NodeId first = batch.empty() ? kNoNode : batch.front().node;

  httplib::Client client(host_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    auto res = client.Post(path_, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP status " + std::to_string(res->status);
      continue;
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("embedding service returned invalid JSON: ") + e.what());
    }
    if (!reply.contains("vectors") || !reply["vectors"].is_array() ||
        reply["vectors"].size() != batch.size()) {
      throw FormatError("embedding service reply must hold one vector per text");
    }
    std::vector<std::vector<float>> out;
    out.reserve(batch.size());
    for (const auto& vec : reply["vectors"]) {
      if (!vec.is_array() || vec.size() != options_.dimension) {
        throw FormatError("embedding service returned dimension " +
                          std::to_string(vec.is_array() ? vec.size() : 0) + ", expected " +
                          std::to_string(options_.dimension));
      }
      out.push_back(vec.get<std::vector<float>>());
    }
    return out;
  }
  throw ProviderError(first, "embedding service failed after " +
                                 std::to_string(options_.retries + 1) + " attempts: " + last_error);
}

DistanceOracleBackend::DistanceOracleBackend(const LinkGraph& g, NodeId goal, std::size_t dimension)
    : dist_(distances_to(g, goal)), dimension_(std::max<std::size_t>(dimension, 2)) {
  for (auto d : dist_) {
    if (d != kUnreachable) max_dist_ = std::max(max_dist_, d);
  }
}

std::vector<float> DistanceOracleBackend::compute(NodeId node, std::string_view) {
  if (node >= dist_.size()) throw ProviderError(node, "node outside distance-oracle graph");
  std::vector<float> v(dimension_, 0.0f);
  if (dist_[node] == kUnreachable) {
    v[0] = -1.0f;
    return v;
  }
  // Goal vector is e0, so similarity equals the first component.
  const double s = 1.0 - static_cast<double>(dist_[node]) / (max_dist_ + 1.0);
  v[0] = static_cast<float>(s);
  v[1] = static_cast<float>(std::sqrt(std::max(0.0, 1.0 - s * s)));
  return v;
}

EmbeddingProvider::EmbeddingProvider(std::unique_ptr<EmbeddingBackend> backend)
    : backend_(std::move(backend)) {
  if (!backend_) throw ContractViolation("EmbeddingProvider requires a backend");
}

const EmbeddingVector& EmbeddingProvider::store(NodeId node, std::vector<float> raw) {
  if (raw.size() != dimension()) {
    throw FormatError("backend returned dimension " + std::to_string(raw.size()) +
                      " for node " + std::to_string(node) + ", expected " +
                      std::to_string(dimension()));
  }
  auto vec = EmbeddingVector::normalized(std::move(raw));
  std::unique_lock lock(mutex_);
  // First write wins; vectors are deterministic so a lost race is harmless.
  return cache_.try_emplace(node, std::move(vec)).first->second;
}

const EmbeddingVector& EmbeddingProvider::embed(NodeId node, std::string_view title) {
  {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(node);
    if (it != cache_.end()) return it->second;
  }
  if (title.empty()) throw ContractViolation("embed: empty title for node " + std::to_string(node));
  ++invocations_;
  return store(node, backend_->compute(node, title));
}

void EmbeddingProvider::prefetch(std::span<const EmbedRequest> requests) {
  std::vector<EmbedRequest> missing;
  {
    std::shared_lock lock(mutex_);
    for (const auto& req : requests) {
      if (!cache_.contains(req.node)) missing.push_back(req);
    }
  }
  auto by_node = [](const EmbedRequest& a, const EmbedRequest& b) { return a.node < b.node; };
  std::stable_sort(missing.begin(), missing.end(), by_node);
  missing.erase(std::unique(missing.begin(), missing.end(),
                            [](const EmbedRequest& a, const EmbedRequest& b) { return a.node == b.node; }),
                missing.end());
  if (missing.empty()) return;
  for (const auto& req : missing) {
    if (req.title.empty()) {
      throw ContractViolation("embed: empty title for node " + std::to_string(req.node));
    }
  }
  ++invocations_;
  auto raw = backend_->compute_batch(missing);
  if (raw.size() != missing.size()) throw FormatError("backend batch size mismatch");
  for (std::size_t i = 0; i < missing.size(); ++i) store(missing[i].node, std::move(raw[i]));
}

void EmbeddingProvider::prefetch(const LinkGraph& g, std::span<const NodeId> nodes) {
  std::vector<EmbedRequest> requests;
  requests.reserve(nodes.size());
  for (NodeId v : nodes) requests.push_back({v, g.title(v)});
  prefetch(requests);
}

void EmbeddingProvider::insert(NodeId node, EmbeddingVector vector) {
  if (vector.dimension() != dimension()) throw FormatError("inserted vector has wrong dimension");
  std::unique_lock lock(mutex_);
  cache_.try_emplace(node, std::move(vector));
}

std::optional<EmbeddingVector> EmbeddingProvider::cached(NodeId node) const {
  std::shared_lock lock(mutex_);
  auto it = cache_.find(node);
  if (it == cache_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingProvider::cache_size() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

std::vector<std::pair<NodeId, EmbeddingVector>> EmbeddingProvider::snapshot() const {
  std::vector<std::pair<NodeId, EmbeddingVector>> out;
  {
    std::shared_lock lock(mutex_);
    out.assign(cache_.begin(), cache_.end());
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

std::optional<std::pair<NodeId, double>> best_semantic_neighbor(EmbeddingProvider& provider,
                                                                const LinkGraph& g, NodeId goal,
                                                                std::span<const NodeId> candidates) {
  if (candidates.empty()) return std::nullopt;
  const EmbeddingVector& target = provider.embed(g, goal);
  std::optional<std::pair<NodeId, double>> best;
  for (NodeId c : candidates) {
    const double s = similarity(provider.embed(g, c), target);
    if (!best || s > best->second || (s == best->second && c < best->first)) best.emplace(c, s);
  }
  return best;
}

std::optional<std::pair<NodeId, double>> best_semantic_neighbor(EmbeddingProvider& provider,
                                                                const LinkGraph& g, NodeId v,
                                                                NodeId goal,
                                                                std::span<const NodeId> candidates) {
  for (NodeId c : candidates) {
    if (!g.has_edge(v, c)) {
      throw ContractViolation("candidate " + std::to_string(c) + " is not a successor of " +
                              std::to_string(v));
    }
  }
  return best_semantic_neighbor(provider, g, goal, candidates);
}

std::string serialize_embeddings(const EmbeddingFile& file) {
  detail::ByteWriter w;
  w.bytes(kEmbeddingMagic);
  w.u32(kEmbeddingVersion);
  w.u32(static_cast<std::uint32_t>(file.dimension));
  w.u64(file.vectors.size());
  for (const auto& [node, v] : file.vectors) {
    if (v.size() != file.dimension) throw ContractViolation("vector dimension mismatch");
    w.u64(node);
    for (float x : v) w.f32(x);
  }
  return w.take();
}

EmbeddingFile deserialize_embeddings(std::string_view bytes) {
  detail::ByteReader r(bytes, "embedding file");
  r.expect_magic(kEmbeddingMagic, kEmbeddingVersion);
  EmbeddingFile file;
  file.dimension = r.u32();
  const auto count = r.u64();
  const std::uint64_t record = 8 + 4 * static_cast<std::uint64_t>(file.dimension);
  if (count > 0 && (file.dimension == 0 || r.remaining() / record < count)) {
    r.fail("truncated file");
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto node = r.u64();
    if (node >= kNoNode) r.fail("node id out of range");
    std::vector<float> v(file.dimension);
    for (float& x : v) x = r.f32();
    if (!file.vectors.emplace(static_cast<NodeId>(node), std::move(v)).second) {
      r.fail("duplicate node id " + std::to_string(node));
    }
  }
  r.expect_end();
  return file;
}

void save_embeddings(const EmbeddingProvider& provider, const std::filesystem::path& path) {
  EmbeddingFile file;
  file.dimension = provider.dimension();
  for (auto& [node, vec] : provider.snapshot()) {
    file.vectors.emplace(node, std::vector<float>(vec.values().begin(), vec.values().end()));
  }
  detail::write_file(path, serialize_embeddings(file));
}

std::unique_ptr<EmbeddingProvider> load_embeddings(const std::filesystem::path& path) {
  EmbeddingFile file = deserialize_embeddings(detail::read_file(path));
  auto backend = std::make_unique<PrecomputedBackend>(file.dimension, std::move(file.vectors));
  std::vector<std::pair<NodeId, EmbeddingVector>> ready;
  for (const auto& [node, raw] : backend->vectors()) {
    ready.emplace_back(node, EmbeddingVector::normalized(raw));
  }
  auto provider = std::make_unique<EmbeddingProvider>(std::move(backend));
  for (auto& [node, vec] : ready) provider->insert(node, std::move(vec));
  return provider;
}

ProviderFactory shared_provider(std::shared_ptr<EmbeddingProvider> provider) {
  return [provider = std::move(provider)](NodeId) { return provider; };
}

ProviderFactory distance_oracle_providers(const LinkGraph& g) {
  return [&g](NodeId goal) {
    return std::make_shared<EmbeddingProvider>(std::make_unique<DistanceOracleBackend>(g, goal));
  };
}

}  // namespace wikinav
