#include <cmath>
#include <cstdio>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "wikinav/benchmark.hpp"
#include "wikinav/errors.hpp"

namespace wikinav {

using ojson = nlohmann::ordered_json;

ReportFormat parse_report_format(std::string_view name) {
  if (name == "table") return ReportFormat::Table;
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  throw ConfigError("unknown report format '" + std::string(name) + "'");
}

namespace {

std::string display_name_for(const std::string& strategy) {
  if (strategy == "human") return "Human Expert";
  try {
    return parse_strategy(strategy).display_name();
  } catch (const ConfigError&) {
    return strategy;
  }
}

std::string render_table(const BenchmarkReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-30s %14s %14s\n", "Strategy", "Average Hops", "Success Rate");
  out << line << std::string(60, '-') << '\n';
  for (const auto& row : report.rows) {
    char pct[16];
    std::snprintf(pct, sizeof pct, "%ld%%", std::lround(row.success_rate * 100.0));
    std::snprintf(line, sizeof line, "%-30s %14.1f %14s\n", row.display_name.c_str(), row.avg_hops, pct);
    out << line;
  }
  return out.str();
}

ojson rule_counts(const GameResult& game) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : game.traces) ++counts[std::string(rule_label(t.rule))];
  ojson out = ojson::object();
  for (const auto& [label, n] : counts) out[label] = n;
  return out;
}

ojson to_json(const BenchmarkReport& report) {
  ojson strategies = ojson::array();
  for (const auto& s : report.config.strategies) {
    strategies.push_back({{"name", s.name()},
                          {"epsilon", s.epsilon},
                          {"phase_hops", s.phase_hops},
                          {"theta", s.theta}});
  }
  ojson rows = ojson::array();
  for (const auto& row : report.rows) {
    ojson games = ojson::array();
    for (const auto& g : row.games) {
      games.push_back({{"game_index", g.game_index},
                       {"goal", g.goal},
                       {"goal_title", g.goal_title},
                       {"success", g.success},
                       {"dead_end", g.dead_end},
                       {"hops", g.hops},
                       {"path", g.path},
                       {"rules", rule_counts(g)}});
    }
    rows.push_back({{"strategy", row.strategy},
                    {"display_name", row.display_name},
                    {"avg_hops", row.avg_hops},
                    {"success_rate", row.success_rate},
                    {"games", std::move(games)}});
  }
  return {{"config",
           {{"master_seed", report.config.master_seed},
            {"game_count", report.config.game_count},
            {"hop_cap", report.config.hop_cap},
            {"start", report.config.start},
            {"goal_policy", report.config.goal_policy},
            {"strategies", std::move(strategies)}}},
          {"graph_fingerprint",
           {{"node_count", report.graph.node_count},
            {"edge_count", report.graph.edge_count},
            {"content_hash", report.graph.content_hash}}},
          {"goals", report.goals},
          {"rows", std::move(rows)}};
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

constexpr std::string_view kCsvHeader = "strategy,game_index,goal_id,goal_title,success,hops";

std::string render_csv(const BenchmarkReport& report) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& row : report.rows) {
    for (const auto& g : row.games) {
      out += csv_field(row.strategy) + ',' + std::to_string(g.game_index) + ',' +
             std::to_string(g.goal) + ',' + csv_field(g.goal_title) + ',' +
             (g.success ? "true" : "false") + ',' + std::to_string(g.hops) + '\n';
    }
  }
  return out;
}

std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    any = true;
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw FormatError("csv: unterminated quoted field");
  if (any) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace

std::string render_report(const BenchmarkReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Table: return render_table(report);
    case ReportFormat::Json: return to_json(report).dump(2) + "\n";
    case ReportFormat::Csv: return render_csv(report);
  }
  return {};
}

BenchmarkReport parse_report_json(std::string_view text) {
  BenchmarkReport report;
  try {
    const auto j = ojson::parse(text);
    const auto& cfg = j.at("config");
    report.config.master_seed = cfg.at("master_seed").get<std::uint64_t>();
    report.config.game_count = cfg.at("game_count").get<std::size_t>();
    report.config.hop_cap = cfg.at("hop_cap").get<std::size_t>();
    report.config.start = cfg.at("start").get<NodeId>();
    report.config.goal_policy = cfg.at("goal_policy").get<std::string>();
    for (const auto& s : cfg.at("strategies")) {
      StrategySpec spec = parse_strategy(s.at("name").get<std::string>());
      spec.epsilon = s.at("epsilon").get<double>();
      spec.phase_hops = s.at("phase_hops").get<std::size_t>();
      spec.theta = s.at("theta").get<double>();
      report.config.strategies.push_back(spec);
    }
    const auto& fp = j.at("graph_fingerprint");
    report.graph = {fp.at("node_count").get<std::uint64_t>(), fp.at("edge_count").get<std::uint64_t>(),
                    fp.at("content_hash").get<std::string>()};
    report.goals = j.at("goals").get<std::vector<NodeId>>();
    for (const auto& r : j.at("rows")) {
      StrategyRow row;
      row.strategy = r.at("strategy").get<std::string>();
      row.display_name = r.at("display_name").get<std::string>();
      row.avg_hops = r.at("avg_hops").get<double>();
      row.success_rate = r.at("success_rate").get<double>();
      for (const auto& gj : r.at("games")) {
        GameResult g;
        g.strategy = row.strategy;
        g.game_index = gj.at("game_index").get<std::size_t>();
        g.goal = gj.at("goal").get<NodeId>();
        g.goal_title = gj.at("goal_title").get<std::string>();
        g.success = gj.at("success").get<bool>();
        g.dead_end = gj.at("dead_end").get<bool>();
        g.hops = gj.at("hops").get<std::size_t>();
        g.path = gj.at("path").get<std::vector<NodeId>>();
        row.games.push_back(std::move(g));
      }
      report.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report json: ") + e.what());
  }
  return report;
}

std::vector<StrategyRow> parse_report_csv(std::string_view text) {
  const auto records = parse_csv_records(text);
  if (records.empty() || records.front().size() != 6) throw FormatError("csv: missing header");
  std::vector<std::string> order;
  std::map<std::string, std::vector<GameResult>> games;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.size() != 6) throw FormatError("csv: record " + std::to_string(i + 1) + " has " + std::to_string(rec.size()) + " fields");
    GameResult g;
    g.strategy = rec[0];
    try {
      g.game_index = std::stoul(rec[1]);
      g.goal = static_cast<NodeId>(std::stoul(rec[2]));
      g.hops = std::stoul(rec[5]);
    } catch (const std::exception&) {
      throw FormatError("csv: record " + std::to_string(i + 1) + " has a non-numeric field");
    }
    g.goal_title = rec[3];
    if (rec[4] != "true" && rec[4] != "false") throw FormatError("csv: bad success flag");
    g.success = rec[4] == "true";
    if (!games.contains(g.strategy)) order.push_back(g.strategy);
    games[g.strategy].push_back(std::move(g));
  }
  std::vector<StrategyRow> rows;
  for (const auto& name : order) rows.push_back(aggregate_row(name, display_name_for(name), std::move(games[name])));
  return rows;
}

}  // namespace wikinav
