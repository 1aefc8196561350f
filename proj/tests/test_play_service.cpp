#include <gtest/gtest.h>
#include <httplib.h>

#include <random>
#include <thread>

#include "fixtures.hpp"
#include "wikinav/errors.hpp"
#include "wikinav/play_service.hpp"

using namespace wikinav;
using nlohmann::json;

namespace {

BenchmarkConfig play_config(std::size_t games = 10, std::size_t cap = 5000) {
  BenchmarkConfig c;
  c.game_count = games;
  c.hop_cap = cap;
  return c;
}

LinkGraph fixture(std::uint64_t seed = 1) {
  const auto raw = wntest::random_strongly_connected(60, 0.04, seed);
  std::vector<Edge> e;
  for (auto [u, v] : raw.edges) e.push_back({u, v});
  return LinkGraph::from_edges(60, e, wntest::numbered_titles(60));
}

std::string new_session(PlayService& svc, json body) {
  const auto r = svc.new_game(body);
  EXPECT_EQ(r.status, 200) << r.body.dump();
  return r.body.at("session_id").get<std::string>();
}

}  // namespace

TEST(PlayService, StartEqualsGoalFinishesImmediately) {
  const auto g = fixture();
  PlayService svc(g, play_config());
  const auto r = svc.new_game({{"goal", 0}});
  ASSERT_EQ(r.status, 200);
  EXPECT_TRUE(r.body["finished"]);
  EXPECT_TRUE(r.body["success"]);
  EXPECT_EQ(r.body["hops"], 0);
  EXPECT_TRUE(r.body["neighbors"].empty());
  ASSERT_EQ(svc.results().size(), 1u);
  EXPECT_EQ(svc.results()[0].strategy, "human");
  EXPECT_EQ(svc.results()[0].hops, 0u);
}

TEST(PlayService, NewGameEchoesStartGoalAndCap) {
  const auto g = fixture();
  PlayService svc(g, play_config(10, 77));
  const auto r = svc.new_game({{"goal_index", 3}});
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["start"]["id"], 0);
  EXPECT_EQ(r.body["start"]["title"], "Node 0");
  EXPECT_EQ(r.body["goal"]["id"], svc.goals()[3]);
  EXPECT_EQ(r.body["hop_cap"], 77);
}

TEST(PlayService, GoalSetMatchesBenchmarkSampler) {
  const auto g = fixture();
  auto cfg = play_config();
  cfg.master_seed = 42;
  PlayService svc(g, cfg);
  EXPECT_EQ(svc.goals(), sample_goals(g, 0, 10, 42));
}

TEST(PlayService, NeighborsAreSortedByTitle) {
  std::vector<std::string> titles{"Start", "Zebra", "apple", "Mango", "Goal"};
  const auto g = LinkGraph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {3, 4}}, titles);
  PlayService svc(g, play_config(1));
  const auto id = new_session(svc, {{"goal", 4}});
  const auto st = svc.state(id);
  ASSERT_EQ(st.status, 200);
  std::vector<std::string> shown;
  for (const auto& n : st.body["neighbors"]) shown.push_back(n["title"]);
  EXPECT_EQ(shown, (std::vector<std::string>{"Mango", "Zebra", "apple"}));
  EXPECT_EQ(st.body["visited_ids"], json::array({0}));
}

TEST(PlayService, IllegalMoveIs422AndLeavesStateUnchanged) {
  const auto g = fixture();
  PlayService svc(g, play_config());
  const auto id = new_session(svc, {{"goal_index", 0}});
  const auto before = svc.state(id).body;
  NodeId non_neighbor = 0;
  while (g.has_edge(0, non_neighbor) || non_neighbor == 0) ++non_neighbor;
  EXPECT_EQ(svc.move(id, {{"next", non_neighbor}}).status, 422);
  EXPECT_EQ(svc.move(id, {{"next", 100000}}).status, 422);
  EXPECT_EQ(svc.move(id, {{"next", -1}}).status, 422);
  EXPECT_EQ(svc.move(id, {{"nxt", 1}}).status, 422);
  EXPECT_EQ(svc.move(id, json::array()).status, 422);
  EXPECT_EQ(svc.state(id).body, before);
}

TEST(PlayService, ErrorStatuses) {
  const auto g = fixture();
  PlayService svc(g, play_config());
  EXPECT_EQ(svc.new_game({{"goal_index", 10}}).status, 400);
  EXPECT_EQ(svc.new_game({{"goal_index", -1}}).status, 400);
  EXPECT_EQ(svc.new_game({{"goal_index", "2"}}).status, 400);
  EXPECT_EQ(svc.new_game({{"goal", 60}}).status, 400);
  EXPECT_EQ(svc.new_game(json::object()).status, 400);
  EXPECT_EQ(svc.state("nope").status, 404);
  EXPECT_EQ(svc.move("nope", {{"next", 1}}).status, 404);
  EXPECT_EQ(svc.abandon("nope").status, 404);

  const auto tiny = LinkGraph::from_edges(2, {{0, 1}});
  PlayService empty(tiny, play_config(5));
  EXPECT_EQ(empty.new_game({{"goal_index", 0}}).status, 409);
  EXPECT_EQ(empty.new_game({{"goal", 1}}).status, 200);
}

TEST(PlayService, FinishedGameRejectsMoves) {
  const auto g = LinkGraph::from_edges(3, {{0, 1}, {1, 2}, {2, 0}});
  PlayService svc(g, play_config(2));
  const auto id = new_session(svc, {{"goal", 1}});
  const auto done = svc.move(id, {{"next", 1}});
  EXPECT_TRUE(done.body["finished"]);
  EXPECT_TRUE(done.body["success"]);
  EXPECT_EQ(svc.move(id, {{"next", 2}}).status, 409);
  EXPECT_EQ(svc.results().size(), 1u);
}

TEST(PlayService, CapEndsGameAsFailure) {
  const auto g = LinkGraph::from_edges(3, {{0, 1}, {1, 0}, {1, 2}});
  PlayService svc(g, play_config(2, 2));
  const auto id = new_session(svc, {{"goal", 2}});
  svc.move(id, {{"next", 1}});
  const auto r = svc.move(id, {{"next", 0}});
  EXPECT_TRUE(r.body["finished"]);
  EXPECT_FALSE(r.body["success"]);
  ASSERT_EQ(svc.results().size(), 1u);
  EXPECT_EQ(svc.results()[0].hops, 2u);
}

TEST(PlayService, AbandonRecordsNothing) {
  const auto g = fixture();
  PlayService svc(g, play_config());
  const auto id = new_session(svc, {{"goal_index", 1}});
  EXPECT_EQ(svc.abandon(id).status, 200);
  EXPECT_EQ(svc.state(id).status, 404);
  EXPECT_TRUE(svc.results().empty());
}

TEST(PlayService, SessionsAreIsolated) {
  const auto g = fixture();
  PlayService svc(g, play_config());
  const auto a = new_session(svc, {{"goal_index", 0}});
  const auto b = new_session(svc, {{"goal_index", 0}});
  EXPECT_NE(a, b);
  const auto before = svc.state(b).body;
  svc.move(a, {{"next", g.out_neighbors(0)[0]}});
  auto after = svc.state(b).body;
  EXPECT_EQ(after, before);
  EXPECT_EQ(svc.state(a).body["hops"], 1);
}

TEST(PlayService, RandomScriptsMatchEngine) {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = fixture(seed);
    PlayService svc(g, play_config(10, 40));
    for (std::size_t gi = 0; gi < 10; ++gi) {
      const auto id = new_session(svc, {{"goal_index", gi}});
      GameEngine engine(g, 0, svc.goals()[gi], 40);
      while (!engine.finished()) {
        const auto nb = g.out_neighbors(engine.state().current());
        const NodeId next = nb[rng() % nb.size()];
        engine.move(next);
        const auto r = svc.move(id, {{"next", next}});
        ASSERT_EQ(r.status, 200);
        EXPECT_EQ(r.body["hops"], engine.state().hops());
        EXPECT_EQ(r.body["path"], engine.state().path());
      }
      const auto mine = engine.result("human", gi);
      const auto all = svc.results();
      const auto& recorded = all.back();
      EXPECT_EQ(recorded.hops, mine.hops);
      EXPECT_EQ(recorded.success, mine.success);
      EXPECT_EQ(recorded.path, mine.path);
      EXPECT_EQ(recorded.game_index, gi);
    }
  }
}

TEST(PlayService, OracleReplayMatchesEngineResult) {
  const auto g = fixture(3);
  PlayService svc(g, play_config());
  StrategyContext ctx{&g, nullptr, nullptr};
  for (std::size_t gi = 0; gi < 10; ++gi) {
    const auto expected = run_game(ctx, parse_strategy("oracle"), 0, svc.goals()[gi], 5000, 0, gi);
    const auto id = new_session(svc, {{"goal_index", gi}});
    for (std::size_t i = 1; i < expected.path.size(); ++i) svc.move(id, {{"next", expected.path[i]}});
    EXPECT_EQ(svc.results().back().hops, expected.hops);
    EXPECT_TRUE(svc.results().back().success);
  }
}

TEST(PlayService, ResultsLogIsJsonLines) {
  wntest::TempDir dir;
  const auto g = LinkGraph::from_edges(3, {{0, 1}, {1, 2}, {2, 0}}, {"A", "B", "C"});
  PlayService svc(g, play_config(2), dir / "log.jsonl");
  for (int i = 0; i < 2; ++i) {
    const auto id = new_session(svc, {{"goal", 2}});
    svc.move(id, {{"next", 1}});
    svc.move(id, {{"next", 2}});
  }
  std::istringstream in(wntest::read_bytes(dir / "log.jsonl"));
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const auto j = json::parse(line);
    EXPECT_EQ(j["strategy"], "human");
    EXPECT_EQ(j["hops"], 2);
    EXPECT_EQ(j["success"], true);
    EXPECT_EQ(j["goal_title"], "C");
    ++lines;
  }
  EXPECT_EQ(lines, 2);
}

class PlayHttp : public ::testing::Test {
 protected:
  void SetUp() override {
    graph_ = LinkGraph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}}, {"Start", "B", "C", "D"});
    service_ = std::make_unique<PlayService>(graph_, play_config(3), dir_ / "log.jsonl");
    std::filesystem::create_directory(dir_ / "ui");
    wntest::write_bytes(dir_ / "ui" / "index.html", "<html>play</html>");
    mount_play_routes(server_, *service_, dir_ / "ui");
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::jthread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_ = {};
  }
  httplib::Client client() { return httplib::Client("127.0.0.1", port_); }

  wntest::TempDir dir_;
  LinkGraph graph_;
  std::unique_ptr<PlayService> service_;
  httplib::Server server_;
  int port_ = 0;
  std::jthread thread_;
};

TEST_F(PlayHttp, FullGameOverHttp) {
  auto c = client();
  auto res = c.Post("/api/game", R"({"goal": 3})", "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  const auto id = json::parse(res->body)["session_id"].get<std::string>();

  res = c.Get("/api/game/" + id);
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["neighbors"].size(), 2u);

  res = c.Post("/api/game/" + id + "/move", R"({"next": 3})", "application/json");
  EXPECT_EQ(res->status, 422);
  res = c.Post("/api/game/" + id + "/move", "{broken", "application/json");
  EXPECT_EQ(res->status, 422);
  res = c.Post("/api/game/" + id + "/move", R"({"next": 2})", "application/json");
  EXPECT_EQ(res->status, 200);
  res = c.Post("/api/game/" + id + "/move", R"({"next": 3})", "application/json");
  const auto done = json::parse(res->body);
  EXPECT_TRUE(done["finished"]);
  EXPECT_TRUE(done["success"]);
  EXPECT_EQ(done["hops"], 2);
  res = c.Post("/api/game/" + id + "/move", R"({"next": 0})", "application/json");
  EXPECT_EQ(res->status, 409);

  const auto log = json::parse(wntest::read_bytes(dir_ / "log.jsonl"));
  EXPECT_EQ(log["strategy"], "human");
  EXPECT_EQ(log["hops"], 2);
}

TEST_F(PlayHttp, ErrorCodesAndStaticFiles) {
  auto c = client();
  EXPECT_EQ(c.Post("/api/game", R"({"goal_index": 9})", "application/json")->status, 400);
  EXPECT_EQ(c.Post("/api/game", "nope", "application/json")->status, 400);
  EXPECT_EQ(c.Get("/api/game/unknown")->status, 404);
  EXPECT_EQ(c.Delete("/api/game/unknown")->status, 404);
  auto res = c.Get("/index.html");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->body, "<html>play</html>");
}

TEST_F(PlayHttp, ConcurrentSessions) {
  std::vector<std::jthread> players;
  std::atomic<int> ok{0};
  for (int p = 0; p < 8; ++p) {
    players.emplace_back([&] {
      auto c = client();
      auto res = c.Post("/api/game", R"({"goal": 3})", "application/json");
      const auto id = json::parse(res->body)["session_id"].get<std::string>();
      for (NodeId next : {1u, 2u, 3u}) c.Post("/api/game/" + id + "/move", json{{"next", next}}.dump(), "application/json");
      const auto st = json::parse(c.Get("/api/game/" + id)->body);
      if (st["success"] == true && st["hops"] == 3) ++ok;
    });
  }
  players.clear();
  EXPECT_EQ(ok.load(), 8);
  EXPECT_EQ(service_->results().size(), 8u);
}
