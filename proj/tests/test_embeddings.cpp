#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <set>

#include "embed_server.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "wikinav/embeddings.hpp"
#include "wikinav/errors.hpp"

using namespace wikinav;

namespace {

double norm(std::span<const float> v) {
  double s = 0;
  for (float x : v) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

EmbeddingVector unit(std::vector<float> v) { return EmbeddingVector::normalized(std::move(v)); }

/// Reads a WEMB file with plain stream calls, independent of the library parser.
std::map<std::uint64_t, std::vector<float>> independent_read(const std::filesystem::path& path,
                                                             std::uint32_t& dim) {
  std::ifstream in(path, std::ios::binary);
  char magic[4];
  std::uint32_t version;
  std::uint64_t count;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&dim), 4);
  in.read(reinterpret_cast<char*>(&count), 8);
  std::map<std::uint64_t, std::vector<float>> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t id;
    in.read(reinterpret_cast<char*>(&id), 8);
    std::vector<float> v(dim);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(4 * dim));
    out[id] = v;
  }
  EXPECT_TRUE(in.good());
  EXPECT_EQ(std::string(magic, 4), "WEMB");
  return out;
}

}  // namespace

TEST(EmbeddingVector, NormalizesAndRejectsDegenerateInput) {
  const auto v = unit({3, 4});
  EXPECT_FLOAT_EQ(v.values()[0], 0.6f);
  EXPECT_FLOAT_EQ(v.values()[1], 0.8f);
  EXPECT_THROW(unit({}), FormatError);
  EXPECT_THROW(unit({0, 0}), FormatError);
  EXPECT_THROW(unit({1, NAN}), FormatError);
  EXPECT_THROW(unit({INFINITY, 1}), FormatError);
}

TEST(Similarity, IdentityAndOrthogonality) {
  const auto a = unit({0.3f, -0.2f, 0.9f});
  EXPECT_NEAR(similarity(a, a), 1.0, 1e-6);
  EXPECT_EQ(similarity(unit({1, 0}), unit({0, 1})), 0.0);
  EXPECT_THROW(similarity(unit({1, 0}), unit({1, 0, 0})), ContractViolation);
}

TEST(Similarity, MatchesFullCosineFormula) {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> gauss;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<float> a(64), b(64);
    for (auto& x : a) x = gauss(rng);
    for (auto& x : b) x = gauss(rng);
    double dot = 0;
    for (std::size_t i = 0; i < 64; ++i) dot += static_cast<double>(a[i]) * b[i];
    EXPECT_NEAR(similarity(unit(a), unit(b)), dot / (norm(a) * norm(b)), 1e-6);
  }
}

TEST(SyntheticHash, DeterministicAndUnitNorm) {
  EmbeddingProvider p(std::make_unique<SyntheticHashBackend>(384));
  EmbeddingProvider q(std::make_unique<SyntheticHashBackend>(384));
  const auto& a = p.embed(0, "Albert Einstein");
  const auto& b = q.embed(5, "Albert Einstein");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.dimension(), 384u);
  EXPECT_NEAR(norm(a.values()), 1.0, 1e-4);
  EXPECT_NE(p.embed(1, "Albert Einstein "), a);
  EmbeddingProvider seeded(std::make_unique<SyntheticHashBackend>(384, 7));
  EXPECT_NE(seeded.embed(0, "Albert Einstein"), a);
}

TEST(SyntheticHash, DistinctTitlesDoNotCollide) {
  EmbeddingProvider p(std::make_unique<SyntheticHashBackend>(32));
  std::set<std::vector<float>> seen;
  for (NodeId i = 0; i < 10'000; ++i) {
    const auto& v = p.embed(i, "Title number " + std::to_string(i));
    EXPECT_NEAR(norm(v.values()), 1.0, 1e-4);
    seen.emplace(v.values().begin(), v.values().end());
  }
  EXPECT_EQ(seen.size(), 10'000u);
}

TEST(Provider, CacheCountsBackendCalls) {
  EmbeddingProvider p(std::make_unique<SyntheticHashBackend>(16));
  const auto& a = p.embed(3, "Cat");
  const auto& b = p.embed(3, "Cat");
  EXPECT_EQ(&a, &b);
  EXPECT_EQ(p.backend_invocations(), 1u);
  p.embed(4, "Dog");
  EXPECT_EQ(p.backend_invocations(), 2u);
  EXPECT_EQ(p.cache_size(), 2u);
  const std::vector<EmbedRequest> batch{{3, "Cat"}, {5, "Eel"}, {6, "Fox"}, {5, "Eel"}};
  p.prefetch(batch);
  EXPECT_EQ(p.backend_invocations(), 3u);
  EXPECT_EQ(p.cache_size(), 4u);
  p.prefetch(batch);
  EXPECT_EQ(p.backend_invocations(), 3u);
  EXPECT_TRUE(p.cached(6).has_value());
  EXPECT_FALSE(p.cached(9).has_value());
  EXPECT_THROW(p.embed(9, ""), ContractViolation);
}

TEST(Provider, ConcurrentEmbedsAgree) {
  EmbeddingProvider p(std::make_unique<SyntheticHashBackend>(16));
  std::vector<std::jthread> pool;
  std::vector<std::vector<float>> first(8);
  for (int t = 0; t < 8; ++t) {
    pool.emplace_back([&, t] {
      for (NodeId v = 0; v < 500; ++v) {
        const auto& e = p.embed(v, "T" + std::to_string(v));
        if (v == 42) first[t].assign(e.values().begin(), e.values().end());
      }
    });
  }
  pool.clear();
  EXPECT_EQ(p.cache_size(), 500u);
  for (int t = 1; t < 8; ++t) EXPECT_EQ(first[t], first[0]);
}

TEST(Precomputed, NormalizesFileVectorsAsIndependentReaderDoes) {
  std::mt19937_64 rng(4);
  std::normal_distribution<float> gauss(0.0f, 3.0f);
  EmbeddingFile raw;
  raw.dimension = 12;
  for (NodeId v = 0; v < 50; ++v) {
    std::vector<float> x(12);
    for (auto& c : x) c = gauss(rng);
    raw.vectors[v * 3] = x;
  }
  wntest::TempDir dir;
  wntest::write_bytes(dir / "raw.wemb", serialize_embeddings(raw));
  std::uint32_t dim = 0;
  const auto reference = independent_read(dir / "raw.wemb", dim);
  ASSERT_EQ(dim, 12u);
  const auto provider = load_embeddings(dir / "raw.wemb");
  EXPECT_EQ(provider->kind(), "precomputed-file");
  for (const auto& [id, x] : reference) {
    const auto& v = provider->embed(static_cast<NodeId>(id), "ignored");
    const double n = norm(x);
    for (std::size_t i = 0; i < dim; ++i) EXPECT_NEAR(v.values()[i], x[i] / n, 1e-6);
  }
  EXPECT_THROW(provider->embed(1, "missing"), ProviderError);
}

TEST(Precomputed, DimensionMismatchIsFormatError) {
  std::map<NodeId, std::vector<float>> m{{0, {1, 2, 3}}};
  EXPECT_THROW(PrecomputedBackend(4, m), FormatError);
}

TEST(EmbeddingFileIo, EmptyAndSingleRoundTrip) {
  EmbeddingFile empty{8, {}};
  EXPECT_EQ(serialize_embeddings(deserialize_embeddings(serialize_embeddings(empty))),
            serialize_embeddings(empty));
  EmbeddingFile one{3, {{7, {0.1f, -0.0f, 1e-30f}}}};
  const auto back = deserialize_embeddings(serialize_embeddings(one));
  ASSERT_EQ(back.vectors.size(), 1u);
  EXPECT_EQ(std::memcmp(back.vectors.at(7).data(), one.vectors.at(7).data(), 12), 0);
}

TEST(EmbeddingFileIo, SaveLoadSaveIsByteFixpoint) {
  EmbeddingProvider p(std::make_unique<SyntheticHashBackend>(24));
  for (NodeId v = 0; v < 1000; ++v) p.embed(v * 7 + 1, "page " + std::to_string(v));
  wntest::TempDir dir;
  save_embeddings(p, dir / "a.wemb");
  save_embeddings(*load_embeddings(dir / "a.wemb"), dir / "b.wemb");
  EXPECT_EQ(wntest::read_bytes(dir / "a.wemb"), wntest::read_bytes(dir / "b.wemb"));
}

TEST(EmbeddingFileIo, RejectsCorruption) {
  EmbeddingFile f{2, {{0, {1, 0}}, {1, {0, 1}}}};
  const auto good = serialize_embeddings(f);
  EXPECT_THROW(deserialize_embeddings(good.substr(0, good.size() - 2)), FormatError);
  auto dup = good;
  std::memset(dup.data() + 20 + 16, 0, 8);  // second record id -> 0
  EXPECT_THROW(deserialize_embeddings(dup), FormatError);
  auto magic = good;
  magic[3] = 'X';
  EXPECT_THROW(deserialize_embeddings(magic), FormatError);
  EXPECT_THROW(load_embeddings("/nonexistent.wemb"), IoError);
}

TEST(BestSemanticNeighbor, ArgmaxAndTieBreak) {
  const auto g = LinkGraph::from_edges(10, {{0, 5}, {0, 9}, {0, 2}});
  EmbeddingProvider p(std::make_unique<SyntheticHashBackend>(2));
  p.insert(1, unit({1, 0}));
  p.insert(5, unit({0.9f, std::sqrt(1 - 0.81f)}));
  p.insert(9, unit({0.2f, std::sqrt(1 - 0.04f)}));
  const std::vector<NodeId> cands{5, 9};
  const auto best = best_semantic_neighbor(p, g, 1, cands);
  ASSERT_TRUE(best);
  EXPECT_EQ(best->first, 5u);
  EXPECT_NEAR(best->second, 0.9, 1e-6);

  p.insert(2, unit({0.9f, std::sqrt(1 - 0.81f)}));
  const std::vector<NodeId> tied{5, 2};
  EXPECT_EQ(best_semantic_neighbor(p, g, 1, tied)->first, 2u);
  EXPECT_FALSE(best_semantic_neighbor(p, g, 1, std::vector<NodeId>{}).has_value());
  EXPECT_THROW(best_semantic_neighbor(p, g, 5, 1, cands), ContractViolation);
  EXPECT_EQ(best_semantic_neighbor(p, g, 0, 1, cands)->first, 5u);
}

TEST(DistanceOracle, BestNeighborMinimizesDistance) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto raw = wntest::random_digraph(60, 0.05, seed);
    const auto g = raw.build();
    const auto d = wntest::floyd_warshall(60, raw.edges);
    const NodeId goal = static_cast<NodeId>(seed * 7 % 60);
    EmbeddingProvider p(std::make_unique<DistanceOracleBackend>(g, goal));
    for (NodeId v = 0; v < 60; ++v) {
      const auto nb = g.out_neighbors(v);
      if (nb.empty()) continue;
      const auto best = best_semantic_neighbor(p, g, goal, nb);
      std::uint32_t min_d = wntest::kInf;
      for (NodeId w : nb) min_d = std::min(min_d, d[w][goal]);
      EXPECT_EQ(d[best->first][goal], min_d);
    }
  }
}

TEST(DistanceOracle, SimilarityDecreasesWithDistance) {
  const auto g = LinkGraph::from_edges(5, {{0, 1}, {1, 2}, {2, 3}});
  auto factory = distance_oracle_providers(g);
  auto p = factory(3);
  EXPECT_EQ(p->kind(), "distance-oracle");
  std::vector<double> sims;
  for (NodeId v = 0; v < 5; ++v) sims.push_back(similarity(p->embed(g, v), p->embed(g, 3)));
  EXPECT_NEAR(sims[3], 1.0, 1e-7);
  EXPECT_GT(sims[2], sims[1]);
  EXPECT_GT(sims[1], sims[0]);
  EXPECT_GT(sims[0], 0.0);
  EXPECT_NEAR(sims[4], -1.0, 1e-7);
}

TEST(RemoteService, EmbedsThroughHttp) {
  wntest::FakeEmbedServer server(4);
  EmbeddingProvider p(std::make_unique<RemoteServiceBackend>(RemoteServiceOptions{server.endpoint(), 4}));
  const auto& v = p.embed(0, "abc");
  EXPECT_NEAR(norm(v.values()), 1.0, 1e-6);
  std::vector<EmbedRequest> batch;
  std::vector<std::string> titles;
  for (int i = 0; i < 10; ++i) titles.push_back("t" + std::to_string(i));
  for (NodeId i = 0; i < 10; ++i) batch.push_back({i + 1, titles[i]});
  p.prefetch(batch);
  EXPECT_EQ(server.requests(), 2);
  EXPECT_EQ(p.cache_size(), 11u);
  EXPECT_EQ(server.texts_seen.back(), "t9");
}

TEST(RemoteService, SplitsLargeBatches) {
  wntest::FakeEmbedServer server(3);
  RemoteServiceOptions opts{server.endpoint(), 3};
  opts.batch_size = 4;
  RemoteServiceBackend backend(opts);
  std::vector<EmbedRequest> batch;
  for (NodeId i = 0; i < 10; ++i) batch.push_back({i, "x"});
  EXPECT_EQ(backend.compute_batch(batch).size(), 10u);
  EXPECT_EQ(server.requests(), 3);
}

TEST(RemoteService, RetriesTransientFailures) {
  wntest::FakeEmbedServer server(4);
  server.fail_first = 2;
  RemoteServiceOptions opts{server.endpoint(), 4};
  opts.retries = 2;
  RemoteServiceBackend backend(opts);
  EXPECT_EQ(backend.compute(0, "x").size(), 4u);
  EXPECT_EQ(server.requests(), 3);
}

TEST(RemoteService, ExhaustedRetriesCarryNodeId) {
  wntest::FakeEmbedServer server(4);
  server.fail_first = 100;
  RemoteServiceOptions opts{server.endpoint(), 4};
  opts.retries = 1;
  EmbeddingProvider p(std::make_unique<RemoteServiceBackend>(opts));
  try {
    p.embed(17, "x");
    FAIL() << "expected ProviderError";
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.node(), 17u);
  }
  EXPECT_EQ(server.requests(), 2);
}

TEST(RemoteService, TimeoutBecomesProviderError) {
  wntest::FakeEmbedServer server(4);
  server.stall_ms = 600;
  RemoteServiceOptions opts{server.endpoint(), 4, std::chrono::milliseconds(150), 0};
  RemoteServiceBackend backend(opts);
  EXPECT_THROW(backend.compute(3, "x"), ProviderError);
}

TEST(RemoteService, ShapeMismatchesAreFormatErrors) {
  wntest::FakeEmbedServer server(4);
  server.extra_dims = 1;
  RemoteServiceBackend wrong_dim({server.endpoint(), 4});
  EXPECT_THROW(wrong_dim.compute(0, "x"), FormatError);
  server.extra_dims = 0;
  server.drop_one = true;
  EXPECT_THROW(wrong_dim.compute(0, "x"), FormatError);
}

TEST(RemoteService, UnreachableAndBadEndpoints) {
  EXPECT_THROW(RemoteServiceBackend({"https://example.com/embed", 4}), ConfigError);
  EXPECT_THROW(RemoteServiceBackend({"localhost:80", 4}), ConfigError);
  RemoteServiceOptions opts{"http://127.0.0.1:1/embed", 4, std::chrono::milliseconds(200), 1};
  RemoteServiceBackend dead(opts);
  EXPECT_THROW(dead.compute(2, "x"), ProviderError);
}
