#include "cgforge/review/server.hpp"

#include "cgforge/core/error.hpp"
#include "cgforge/patterns/diff.hpp"
#include "cgforge/sql/parser.hpp"
#include "cgforge/sql/printer.hpp"
#include "httplib.h"

namespace cgforge::review {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, {{"error", {{"code", code}, {"message", message}}}}, status);
}

std::vector<std::string> item_texts(const patterns::Edit& e) {
  std::vector<std::string> out;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, patterns::SelectList> || std::is_same_v<T, patterns::ColumnList> ||
                      std::is_same_v<T, patterns::OrderList>) {
          for (const auto& i : p.items) out.push_back(sql::print(i));
        } else if constexpr (std::is_same_v<T, patterns::ConditionList>) {
          for (const auto& i : p.items) {
            if (i.kind == sql::Connective::kAnd) {
              for (const auto& c : i.children) out.push_back(sql::print(c));
            } else {
              out.push_back(sql::print(i));
            }
          }
        } else if constexpr (std::is_same_v<T, patterns::LimitValue>) {
          out.push_back("LIMIT " + std::to_string(p.value));
        } else {
          out.push_back(patterns::payload_sql(e));
        }
      },
      e.payload);
  return out;
}

}  // namespace

json candidate_card(const Candidate& c, const io::Catalog* catalog) {
  json card = to_json(c);
  json edits = json::array();
  json spans = json::array();
  std::string display = c.new_sql;
  if (catalog) {
    auto db = catalog->find(c.db_id);
    if (db != catalog->end()) {
      try {
        const auto prev = sql::parse_sql(c.base.prev_sql(), db->second);
        const auto next = sql::parse_sql(c.new_sql, db->second);
        display = sql::print_sql(next);
        auto diff = patterns::diff_asts(prev, next, db->second);
        if (auto* mod = std::get_if<patterns::Modification>(&diff)) {
          for (const auto& e : mod->edits) {
            edits.push_back({{"clause", patterns::to_string(e.clause)},
                             {"action", patterns::to_string(e.action)},
                             {"sql", patterns::payload_sql(e)}});
            if (e.action == patterns::EditAction::kRemove) continue;
            for (const auto& text : item_texts(e)) {
              const auto pos = display.find(text);
              if (pos != std::string::npos) spans.push_back({{"start", pos}, {"end", pos + text.size()}});
            }
          }
        }
      } catch (const Error&) {
      }
    }
  }
  card["prev_sql"] = c.base.prev_sql();
  card["display_sql"] = display;
  card["edits"] = edits;
  card["highlight"] = spans;
  return card;
}

ReviewServer::ReviewServer(ReviewStore& store, const io::Catalog* catalog, ServeConfig config)
    : store_(store), catalog_(catalog), config_(std::move(config)), server_(std::make_unique<httplib::Server>()) {
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  routes();
}

ReviewServer::~ReviewServer() { stop(); }

void ReviewServer::routes() {
  auto& srv = *server_;
  srv.Get("/api/candidates", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<Status> status;
    if (req.has_param("status") && !req.get_param_value("status").empty()) {
      status = parse_status(req.get_param_value("status"));
      if (!status) return send_error(res, 400, "bad_request", "unknown status");
    }
    std::optional<std::string> reviewer;
    if (req.has_param("reviewer") && !req.get_param_value("reviewer").empty()) {
      reviewer = req.get_param_value("reviewer");
    }
    json out = json::array();
    for (const auto& c : store_.list(status, reviewer)) out.push_back(candidate_card(c, catalog_));
    send_json(res, out);
  });
  srv.Get(R"(/api/candidates/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    auto c = store_.get(req.matches[1]);
    if (!c) return send_error(res, 404, "not_found", "unknown candidate " + std::string(req.matches[1]));
    send_json(res, candidate_card(*c, catalog_));
  });
  srv.Post(R"(/api/candidates/([^/]+)/decisions)", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error& e) {
      return send_error(res, 400, "bad_request", std::string("malformed JSON: ") + e.what());
    }
    if (!body.is_object()) return send_error(res, 400, "bad_request", "expected a JSON object");
    Decision d;
    d.candidate_id = id;
    d.reviewer = body.value("reviewer", "");
    const auto action = parse_action(body.value("action", ""));
    if (!action) return send_error(res, 422, "invalid_decision", "action must be accept, reject or revise");
    d.action = *action;
    if (body.contains("revised_utterance") && body["revised_utterance"].is_string()) {
      d.revised_utterance = body["revised_utterance"].get<std::string>();
    }
    try {
      send_json(res, candidate_card(store_.record_decision(d), catalog_));
    } catch (const UnknownCandidate&) {
      send_error(res, 404, "not_found", "unknown candidate " + id);
    } catch (const InvalidDecision& e) {
      send_error(res, 422, "invalid_decision", e.what());
    } catch (const StoreError& e) {
      send_error(res, 500, "store_error", e.what());
    }
  });
  srv.Get("/api/stats", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, store_.stats().to_json());
  });
  srv.Get("/api/export", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, export_benchmark(store_.all()));
  });
  if (!config_.static_dir.empty()) srv.set_mount_point("/", config_.static_dir.string());
}

int ReviewServer::start() {
  int port = config_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(config_.host);
  } else if (!server_->bind_to_port(config_.host, port)) {
    port = -1;
  }
  if (port < 0) throw BindError("cannot bind " + config_.host + ":" + std::to_string(config_.port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void ReviewServer::run() {
  if (!server_->bind_to_port(config_.host, config_.port)) {
    throw BindError("cannot bind " + config_.host + ":" + std::to_string(config_.port));
  }
  server_->listen_after_bind();
}

void ReviewServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace cgforge::review
