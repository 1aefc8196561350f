#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wikinav/graph.hpp"

namespace wikinav {

inline constexpr std::size_t kDefaultEmbeddingDim = 384;

/// Unit-norm dense vector. Construction is the only place normalization
/// happens; similarity never re-normalizes.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;

  /// Scales `raw` to unit length. Vectors already within 1e-6 of unit length
  /// are kept bit-for-bit.
  /// Throws FormatError on empty, non-finite, or zero vectors.
  static EmbeddingVector normalized(std::vector<float> raw);

  std::size_t dimension() const { return values_.size(); }
  std::span<const float> values() const { return values_; }
  bool operator==(const EmbeddingVector&) const = default;

 private:
  explicit EmbeddingVector(std::vector<float> v) : values_(std::move(v)) {}
  std::vector<float> values_;
};

/// Dot product, i.e. cosine similarity for unit vectors.
double similarity(const EmbeddingVector& a, const EmbeddingVector& b);

struct EmbedRequest {
  NodeId node;
  std::string_view title;
};

/// Source of raw (not necessarily normalized) vectors.
class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::string_view kind() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<float> compute(NodeId node, std::string_view title) = 0;
  virtual std::vector<std::vector<float>> compute_batch(std::span<const EmbedRequest> batch);
};

/// Seeded hash of the title bytes expanded to Gaussian-ish components.
class SyntheticHashBackend final : public EmbeddingBackend {
 public:
  explicit SyntheticHashBackend(std::size_t dimension = kDefaultEmbeddingDim, std::uint64_t seed = 0)
      : dimension_(dimension), seed_(seed) {}
  std::string_view kind() const override { return "synthetic-hash"; }
  std::size_t dimension() const override { return dimension_; }
  std::vector<float> compute(NodeId node, std::string_view title) override;

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

/// Vectors keyed by node id, typically read from a "WEMB" file.
class PrecomputedBackend final : public EmbeddingBackend {
 public:
  PrecomputedBackend(std::size_t dimension, std::map<NodeId, std::vector<float>> vectors);
  std::string_view kind() const override { return "precomputed-file"; }
  std::size_t dimension() const override { return dimension_; }
  std::vector<float> compute(NodeId node, std::string_view title) override;
  const std::map<NodeId, std::vector<float>>& vectors() const { return vectors_; }

 private:
  std::size_t dimension_;
  std::map<NodeId, std::vector<float>> vectors_;
};

struct RemoteServiceOptions {
  std::string endpoint;  // e.g. http://127.0.0.1:8080/embed; path defaults to /embed
  std::size_t dimension = kDefaultEmbeddingDim;
  std::chrono::milliseconds timeout{10'000};
  int retries = 2;
  std::size_t batch_size = 64;
};

/// POST {"texts": [...]} -> {"vectors": [[...], ...]}.
class RemoteServiceBackend final : public EmbeddingBackend {
 public:
  explicit RemoteServiceBackend(RemoteServiceOptions options);
  std::string_view kind() const override { return "remote-service"; }
  std::size_t dimension() const override { return options_.dimension; }
  std::vector<float> compute(NodeId node, std::string_view title) override;
  std::vector<std::vector<float>> compute_batch(std::span<const EmbedRequest> batch) override;

 private:
  std::vector<std::vector<float>> request(std::span<const EmbedRequest> batch);

  RemoteServiceOptions options_;
  std::string host_;
  std::string path_;
};

/// Validation-only backend tied to one goal: similarity to the goal strictly
/// decreases with BFS distance to it, and unreachable nodes score -1.
class DistanceOracleBackend final : public EmbeddingBackend {
 public:
  DistanceOracleBackend(const LinkGraph& g, NodeId goal, std::size_t dimension = 2);
  std::string_view kind() const override { return "distance-oracle"; }
  std::size_t dimension() const override { return dimension_; }
  std::vector<float> compute(NodeId node, std::string_view title) override;

 private:
  std::vector<std::uint32_t> dist_;
  std::uint32_t max_dist_ = 0;
  std::size_t dimension_;
};

/// Backend plus a write-once cache keyed by node id. Safe for concurrent use.
class EmbeddingProvider {
 public:
  explicit EmbeddingProvider(std::unique_ptr<EmbeddingBackend> backend);

  std::string_view kind() const { return backend_->kind(); }
  std::size_t dimension() const { return backend_->dimension(); }

  /// Cached vector for `node`, computed from `title` on first use.
  /// The reference stays valid for the provider's lifetime.
  const EmbeddingVector& embed(NodeId node, std::string_view title);
  const EmbeddingVector& embed(const LinkGraph& g, NodeId node) { return embed(node, g.title(node)); }

  /// Computes all uncached requests in one backend batch call.
  void prefetch(std::span<const EmbedRequest> requests);
  void prefetch(const LinkGraph& g, std::span<const NodeId> nodes);

  /// Inserts a ready vector (no backend call). Dimension must match.
  void insert(NodeId node, EmbeddingVector vector);

  std::optional<EmbeddingVector> cached(NodeId node) const;
  std::size_t cache_size() const;
  /// Number of single or batched backend calls issued so far.
  std::uint64_t backend_invocations() const { return invocations_.load(); }

  /// Cache contents sorted by node id.
  std::vector<std::pair<NodeId, EmbeddingVector>> snapshot() const;

 private:
  const EmbeddingVector& store(NodeId node, std::vector<float> raw);

  std::unique_ptr<EmbeddingBackend> backend_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<NodeId, EmbeddingVector> cache_;
  std::atomic<std::uint64_t> invocations_{0};
};

/// Candidate with the highest similarity to the goal; ties go to the lowest id.
std::optional<std::pair<NodeId, double>> best_semantic_neighbor(EmbeddingProvider& provider,
                                                                const LinkGraph& g, NodeId goal,
                                                                std::span<const NodeId> candidates);

/// Checks candidates ⊆ out_neighbors(v) before delegating.
std::optional<std::pair<NodeId, double>> best_semantic_neighbor(EmbeddingProvider& provider,
                                                                const LinkGraph& g, NodeId v,
                                                                NodeId goal,
                                                                std::span<const NodeId> candidates);

// "WEMB" v1: magic, version:u32, dimension:u32, count:u64, then count records
// of (node id:u64, dimension x f32).
inline constexpr std::string_view kEmbeddingMagic = "WEMB";
inline constexpr std::uint32_t kEmbeddingVersion = 1;

struct EmbeddingFile {
  std::size_t dimension = 0;
  std::map<NodeId, std::vector<float>> vectors;
};

std::string serialize_embeddings(const EmbeddingFile& file);
EmbeddingFile deserialize_embeddings(std::string_view bytes);

/// Writes the provider's cache.
void save_embeddings(const EmbeddingProvider& provider, const std::filesystem::path& path);
/// Precomputed-file provider with every stored vector loaded into the cache.
std::unique_ptr<EmbeddingProvider> load_embeddings(const std::filesystem::path& path);

/// Per-goal provider lookup used by the benchmark; most providers ignore the goal.
using ProviderFactory = std::function<std::shared_ptr<EmbeddingProvider>(NodeId goal)>;

ProviderFactory shared_provider(std::shared_ptr<EmbeddingProvider> provider);
ProviderFactory distance_oracle_providers(const LinkGraph& g);

}  // namespace wikinav
