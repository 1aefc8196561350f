#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wikinav/benchmark.hpp"
#include "wikinav/graph.hpp"

namespace httplib {
class Server;
}

namespace wikinav {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// Human-play sessions over the shared game engine. Handlers take and return
/// JSON; mount_play_routes() binds them to HTTP.
class PlayService {
 public:
  /// Goals come from the same sampler (and seed) as the automated benchmark.
  /// If they cannot be drawn, games by goal index answer 409.
  PlayService(const LinkGraph& g, BenchmarkConfig config,
              std::optional<std::filesystem::path> results_log = std::nullopt);

  /// Body: {"goal_index": i} or {"goal": id}.
  ApiResponse new_game(const nlohmann::json& request);
  ApiResponse state(std::string_view session_id) const;
  /// Body: {"next": id}.
  ApiResponse move(std::string_view session_id, const nlohmann::json& request);
  /// Drops the session without recording a result.
  ApiResponse abandon(std::string_view session_id);

  const std::vector<NodeId>& goals() const { return goals_; }
  const BenchmarkConfig& config() const { return config_; }
  /// Finished human games, in completion order.
  std::vector<GameResult> results() const;

 private:
  struct Session {
    Session(GameEngine e, std::size_t index)
        : engine(std::move(e)), game_index(index), created(std::chrono::system_clock::now()) {}
    std::mutex mutex;
    GameEngine engine;
    std::size_t game_index;
    std::chrono::system_clock::time_point created;
    bool recorded = false;
  };

  std::shared_ptr<Session> find(std::string_view id) const;
  nlohmann::json describe(const std::string& id, const Session& s) const;
  nlohmann::json node_json(NodeId v) const;
  void record(const GameResult& result);

  const LinkGraph* graph_;
  BenchmarkConfig config_;
  std::vector<NodeId> goals_;
  std::string goals_error_;
  std::optional<std::filesystem::path> results_log_;

  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>, std::less<>> sessions_;
  std::uint64_t session_counter_ = 0;
  std::uint64_t session_salt_;

  mutable std::mutex results_mutex_;
  std::vector<GameResult> results_;
};

/// JSON line written to the results log for a finished game.
nlohmann::json result_log_entry(const GameResult& result);

/// POST /api/game, GET /api/game/<id>, POST /api/game/<id>/move,
/// DELETE /api/game/<id>; static files from `static_dir` at /.
void mount_play_routes(httplib::Server& server, PlayService& service,
                       const std::optional<std::filesystem::path>& static_dir = std::nullopt);

}  // namespace wikinav
