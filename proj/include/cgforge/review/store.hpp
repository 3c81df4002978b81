#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cgforge/io/dataset.hpp"
#include "cgforge/io/records.hpp"
#include "json.hpp"

namespace cgforge::review {

struct Resolution {
  Status status = Status::kPending;
  std::optional<std::string> final_utterance;
};

// Double-review rule over the effective decisions (latest per reviewer):
// fewer than two -> pending; rejects are a strict majority -> rejected;
// non-rejects are a strict majority -> revised if any effective decision
// is a revise (final text = the latest revision), else accepted (final
// text = the draft); otherwise disputed. `decisions` are in log order.
Resolution resolve_status(const Candidate& candidate, const std::vector<Decision>& decisions);

struct StatusCounts {
  std::map<Status, std::size_t> counts;
  std::size_t total = 0;
  nlohmann::json to_json() const;
};

struct EnqueueResult {
  std::size_t added = 0;
  std::size_t already_present = 0;
  std::vector<std::pair<std::string, std::string>> rejected;  // (id, reason)
  nlohmann::json to_json() const;
};

// Review queue persisted as <dir>/candidates.jsonl (append-only candidate
// records, never rewritten) and <dir>/decisions.log (append-only decision
// records). Statuses are derived by replaying the log. All mutations are
// serialized and flushed to disk (fsync) before they return.
class ReviewStore {
 public:
  // Creates the directory when missing. A torn final log line left by a
  // crash is ignored (it was never acknowledged). When `catalog` is given,
  // enqueued candidates must parse against their database.
  explicit ReviewStore(std::filesystem::path dir, const io::Catalog* catalog = nullptr);
  ~ReviewStore();
  ReviewStore(const ReviewStore&) = delete;
  ReviewStore& operator=(const ReviewStore&) = delete;

  EnqueueResult enqueue(const std::vector<Candidate>& candidates);

  // Throws UnknownCandidate or InvalidDecision. An empty timestamp is set
  // to the current UTC time.
  Candidate record_decision(Decision d);

  std::optional<Candidate> get(const std::string& id) const;
  // Sorted by id. With `reviewer`, only candidates that reviewer has not
  // decided yet.
  std::vector<Candidate> list(std::optional<Status> status = std::nullopt,
                              const std::optional<std::string>& reviewer = std::nullopt) const;
  StatusCounts stats() const;
  std::vector<Candidate> all() const { return list(); }

  const std::filesystem::path& dir() const { return dir_; }
  std::size_t torn_lines() const { return torn_lines_; }

  // Statuses recomputed from the files on disk alone.
  static std::map<std::string, Status> replay(const std::filesystem::path& dir);

 private:
  void append(int fd, const std::string& line);
  void refresh(Candidate& c) const;

  std::filesystem::path dir_;
  const io::Catalog* catalog_;
  mutable std::mutex mu_;
  std::map<std::string, Candidate> candidates_;
  int candidates_fd_ = -1;
  int decisions_fd_ = -1;
  std::size_t torn_lines_ = 0;
};

// Accepted and revised candidates, each as its base prefix plus a final
// turn (final utterance, new SQL), in the upstream dialogue-array shape,
// sorted by candidate id.
nlohmann::json export_benchmark(const std::vector<Candidate>& candidates);

std::string utc_timestamp();

}  // namespace cgforge::review
