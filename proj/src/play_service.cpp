#include "wikinav/play_service.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>

#include "wikinav/errors.hpp"
#include "wikinav/rng.hpp"

namespace wikinav {

using nlohmann::json;

namespace {

ApiResponse error(int status, std::string message) { return {status, {{"error", std::move(message)}}}; }

}  // namespace

PlayService::PlayService(const LinkGraph& g, BenchmarkConfig config,
                         std::optional<std::filesystem::path> results_log)
    : graph_(&g), config_(std::move(config)), results_log_(std::move(results_log)),
      session_salt_(std::random_device{}()) {
  try {
    goals_ = sample_goals(g, config_.start, config_.game_count, config_.master_seed);
  } catch (const ConfigError& e) {
    goals_error_ = e.what();
  }
}

json PlayService::node_json(NodeId v) const { return {{"id", v}, {"title", graph_->title(v)}}; }

json PlayService::describe(const std::string& id, const Session& s) const {
  const auto& st = s.engine.state();
  std::vector<NodeId> neighbors(graph_->out_neighbors(st.current()).begin(),
                                graph_->out_neighbors(st.current()).end());
  std::stable_sort(neighbors.begin(), neighbors.end(), [this](NodeId a, NodeId b) {
    return graph_->title(a) < graph_->title(b);
  });
  json nb = json::array();
  if (!s.engine.finished()) {
    for (NodeId v : neighbors) nb.push_back(node_json(v));
  }
  std::vector<NodeId> visited(st.visited().begin(), st.visited().end());
  std::sort(visited.begin(), visited.end());
  return {{"session_id", id},
          {"current", node_json(st.current())},
          {"goal", node_json(st.goal())},
          {"hops", st.hops()},
          {"hop_cap", s.engine.hop_cap()},
          {"neighbors", std::move(nb)},
          {"visited_ids", std::move(visited)},
          {"path", st.path()},
          {"finished", s.engine.finished()},
          {"success", s.engine.status() == GameStatus::Success}};
}

ApiResponse PlayService::new_game(const json& request) {
  NodeId goal = kNoNode;
  std::size_t game_index = 0;
  if (request.is_object() && request.contains("goal_index")) {
    if (goals_.empty()) return error(409, "goal set not initialized: " + goals_error_);
    const auto& gi = request["goal_index"];
    if (!gi.is_number_integer() || gi.get<long long>() < 0 ||
        static_cast<std::size_t>(gi.get<long long>()) >= goals_.size()) {
      return error(400, "goal_index must be in [0, " + std::to_string(goals_.size()) + ")");
    }
    game_index = gi.get<std::size_t>();
    goal = goals_[game_index];
  } else if (request.is_object() && request.contains("goal")) {
    const auto& gj = request["goal"];
    if (!gj.is_number_integer() || gj.get<long long>() < 0 ||
        static_cast<unsigned long long>(gj.get<long long>()) >= graph_->node_count()) {
      return error(400, "goal must be a node id of the loaded graph");
    }
    goal = gj.get<NodeId>();
    // Explicit goals that belong to the benchmark set keep their index.
    auto it = std::find(goals_.begin(), goals_.end(), goal);
    game_index = it == goals_.end() ? goals_.size() : static_cast<std::size_t>(it - goals_.begin());
  } else {
    return error(400, "request needs goal_index or goal");
  }

  auto session = std::make_shared<Session>(GameEngine(*graph_, config_.start, goal, config_.hop_cap),
                                           game_index);
  std::string id;
  {
    std::lock_guard lock(sessions_mutex_);
    char buf[24];
    std::snprintf(buf, sizeof buf, "s%016llx",
                  static_cast<unsigned long long>(splitmix64(session_salt_ ^ ++session_counter_)));
    id = buf;
    while (sessions_.contains(id)) id += 'x';
    sessions_.emplace(id, session);
  }
  std::lock_guard lock(session->mutex);
  if (session->engine.finished()) {
    record(session->engine.result("human", session->game_index));
    session->recorded = true;
  }
  json body = describe(id, *session);
  body["start"] = node_json(config_.start);
  return {200, std::move(body)};
}

std::shared_ptr<PlayService::Session> PlayService::find(std::string_view id) const {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

ApiResponse PlayService::state(std::string_view session_id) const {
  auto s = find(session_id);
  if (!s) return error(404, "unknown session");
  std::lock_guard lock(s->mutex);
  return {200, describe(std::string(session_id), *s)};
}

ApiResponse PlayService::move(std::string_view session_id, const json& request) {
  auto s = find(session_id);
  if (!s) return error(404, "unknown session");
  if (!request.is_object() || !request.contains("next") || !request["next"].is_number_integer() ||
      request["next"].get<long long>() < 0) {
    return error(422, "request needs a non-negative integer 'next'");
  }
  const auto next = request["next"].get<unsigned long long>();
  std::lock_guard lock(s->mutex);
  if (s->engine.finished()) return error(409, "game already finished");
  if (next >= graph_->node_count()) return error(422, "node " + std::to_string(next) + " is not a neighbor");
  try {
    s->engine.move(static_cast<NodeId>(next));
  } catch (const IllegalMove& e) {
    return error(422, e.what());
  }
  if (s->engine.finished() && !s->recorded) {
    record(s->engine.result("human", s->game_index));
    s->recorded = true;
  }
  return {200, describe(std::string(session_id), *s)};
}

ApiResponse PlayService::abandon(std::string_view session_id) {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return error(404, "unknown session");
  sessions_.erase(it);
  return {200, {{"abandoned", std::string(session_id)}}};
}

std::vector<GameResult> PlayService::results() const {
  std::lock_guard lock(results_mutex_);
  return results_;
}

json result_log_entry(const GameResult& r) {
  return {{"strategy", r.strategy}, {"game_index", r.game_index}, {"goal", r.goal},
          {"goal_title", r.goal_title}, {"success", r.success}, {"dead_end", r.dead_end},
          {"hops", r.hops}, {"path", r.path}};
}

void PlayService::record(const GameResult& result) {
  std::lock_guard lock(results_mutex_);
  results_.push_back(result);
  if (results_log_) {
    std::ofstream out(*results_log_, std::ios::app);
    if (!out) throw IoError("cannot append to " + results_log_->string());
    out << result_log_entry(result).dump() << '\n';
  }
}

void mount_play_routes(httplib::Server& server, PlayService& service,
                       const std::optional<std::filesystem::path>& static_dir) {
  auto reply = [](httplib::Response& res, const ApiResponse& api) {
    res.status = api.status;
    res.set_content(api.body.dump(), "application/json");
  };
  auto parse_body = [](const httplib::Request& req) -> std::optional<json> {
    if (req.body.empty()) return json::object();
    try {
      return json::parse(req.body);
    } catch (const json::exception&) {
      return std::nullopt;
    }
  };

  server.Post("/api/game", [&service, reply, parse_body](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    reply(res, body ? service.new_game(*body) : ApiResponse{400, {{"error", "invalid JSON"}}});
  });
  server.Get(R"(/api/game/([A-Za-z0-9]+))", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.state(req.matches[1].str()));
  });
  server.Post(R"(/api/game/([A-Za-z0-9]+)/move)",
              [&service, reply, parse_body](const httplib::Request& req, httplib::Response& res) {
                auto body = parse_body(req);
                reply(res, body ? service.move(req.matches[1].str(), *body)
                                : ApiResponse{422, {{"error", "invalid JSON"}}});
              });
  server.Delete(R"(/api/game/([A-Za-z0-9]+))", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.abandon(req.matches[1].str()));
  });
  if (static_dir && !server.set_mount_point("/", static_dir->string())) {
    throw IoError("cannot serve static files from " + static_dir->string());
  }
}

}  // namespace wikinav
