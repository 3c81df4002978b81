#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <thread>

#include "cgforge/review/store.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace cgforge::review {

struct ServeConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path static_dir;  // review UI assets; optional
};

// Candidate as served to the UI: the stored record plus the edit between
// its base and new query and the character spans of display_sql (canonical
// print of new_sql) touched by
// added or replaced items.
nlohmann::json candidate_card(const Candidate& c, const io::Catalog* catalog);

// JSON API over a ReviewStore:
//   GET  /api/candidates?status=&reviewer=
//   GET  /api/candidates/{id}
//   POST /api/candidates/{id}/decisions  {reviewer, action, revised_utterance?}
//   GET  /api/stats
//   GET  /api/export
// Errors are {"error": {"code", "message"}} with status 400/404/422/500.
class ReviewServer {
 public:
  ReviewServer(ReviewStore& store, const io::Catalog* catalog, ServeConfig config);
  ~ReviewServer();

  // Binds and serves on a background thread; returns the bound port.
  // Throws BindError.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();

 private:
  void routes();

  ReviewStore& store_;
  const io::Catalog* catalog_;
  ServeConfig config_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace cgforge::review
