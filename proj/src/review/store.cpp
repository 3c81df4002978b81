#include "cgforge/review/store.hpp"

#include <algorithm>
#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>

#include "cgforge/core/error.hpp"
#include "cgforge/sql/parser.hpp"

namespace cgforge::review {

using nlohmann::json;

namespace {

const char* kCandidates = "candidates.jsonl";
const char* kDecisions = "decisions.log";

// Complete lines of a line-delimited JSON file; a final line without a
// trailing newline, or one that does not parse, is counted as torn.
std::vector<json> read_log(const std::filesystem::path& path, std::size_t* torn) {
  std::vector<json> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t start = 0;
  while (start < content.size()) {
    const auto end = content.find('\n', start);
    const bool complete = end != std::string::npos;
    const std::string line = content.substr(start, complete ? end - start : std::string::npos);
    start = complete ? end + 1 : content.size();
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      if (!complete) throw std::runtime_error("torn");
      out.push_back(json::parse(line));
    } catch (const std::exception&) {
      if (complete && start < content.size()) {
        throw StoreError("corrupt record in '" + path.string() + "'");
      }
      if (torn) ++*torn;
    }
  }
  return out;
}

int open_append(const std::filesystem::path& path) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw StoreError("cannot open '" + path.string() + "': " + std::strerror(errno));
  return fd;
}

std::vector<Decision> decisions_of(const Candidate& c) { return c.reviews; }

}  // namespace

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  ::gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

Resolution resolve_status(const Candidate& candidate, const std::vector<Decision>& decisions) {
  // Latest decision per reviewer, ordered by when it was made.
  std::map<std::string, std::size_t> latest;
  for (std::size_t i = 0; i < decisions.size(); ++i) latest[decisions[i].reviewer] = i;
  std::vector<std::size_t> effective;
  for (const auto& [_, i] : latest) effective.push_back(i);
  std::sort(effective.begin(), effective.end());

  const std::size_t n = effective.size();
  if (n < 2) return {};
  std::size_t rejects = 0;
  std::optional<std::size_t> last_revise;
  for (std::size_t i : effective) {
    if (decisions[i].action == Action::kReject) ++rejects;
    if (decisions[i].action == Action::kRevise) last_revise = i;
  }
  if (rejects * 2 > n) return {Status::kRejected, std::nullopt};
  if ((n - rejects) * 2 > n) {
    if (last_revise) return {Status::kRevised, decisions[*last_revise].revised_utterance};
    return {Status::kAccepted, candidate.draft_utterance};
  }
  return {Status::kDisputed, std::nullopt};
}

json StatusCounts::to_json() const {
  json j = json::object();
  for (Status s : {Status::kPending, Status::kAccepted, Status::kRevised, Status::kRejected, Status::kDisputed}) {
    auto it = counts.find(s);
    j[std::string(cgforge::to_string(s))] = it == counts.end() ? 0 : it->second;
  }
  j["total"] = total;
  return j;
}

json EnqueueResult::to_json() const {
  json rej = json::array();
  for (const auto& [id, reason] : rejected) rej.push_back({{"id", id}, {"reason", reason}});
  return {{"added", added}, {"already_present", already_present}, {"rejected", rej}};
}

ReviewStore::ReviewStore(std::filesystem::path dir, const io::Catalog* catalog)
    : dir_(std::move(dir)), catalog_(catalog) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw StoreError("cannot create '" + dir_.string() + "': " + ec.message());
  std::size_t torn_candidates = 0;
  for (const auto& j : read_log(dir_ / kCandidates, &torn_candidates)) {
    Candidate c = candidate_from_json(j);
    c.status = Status::kPending;
    c.final_utterance.reset();
    c.reviews.clear();
    candidates_.emplace(c.id, std::move(c));
  }
  for (const auto& j : read_log(dir_ / kDecisions, &torn_lines_)) {
    Decision d = decision_from_json(j);
    auto it = candidates_.find(d.candidate_id);
    if (it == candidates_.end()) throw StoreError("decision for unknown candidate " + d.candidate_id);
    it->second.reviews.push_back(std::move(d));
  }
  torn_lines_ += torn_candidates;
  for (auto& [_, c] : candidates_) refresh(c);
  candidates_fd_ = open_append(dir_ / kCandidates);
  decisions_fd_ = open_append(dir_ / kDecisions);
}

ReviewStore::~ReviewStore() {
  if (candidates_fd_ >= 0) ::close(candidates_fd_);
  if (decisions_fd_ >= 0) ::close(decisions_fd_);
}

void ReviewStore::append(int fd, const std::string& line) {
  std::size_t done = 0;
  while (done < line.size()) {
    const ssize_t w = ::write(fd, line.data() + done, line.size() - done);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw StoreError(std::string("write failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(w);
  }
  if (::fsync(fd) != 0) throw StoreError(std::string("fsync failed: ") + std::strerror(errno));
}

void ReviewStore::refresh(Candidate& c) const {
  const auto r = resolve_status(c, decisions_of(c));
  c.status = r.status;
  c.final_utterance = r.final_utterance;
}

EnqueueResult ReviewStore::enqueue(const std::vector<Candidate>& candidates) {
  std::lock_guard lock(mu_);
  EnqueueResult out;
  for (Candidate c : candidates) {
    c.status = Status::kPending;
    c.final_utterance.reset();
    c.reviews.clear();
    std::optional<std::string> problem = check_record(c);
    if (!problem && c.draft_utterance.empty()) problem = "empty draft utterance";
    if (!problem && catalog_) {
      auto db = catalog_->find(c.db_id);
      if (db == catalog_->end()) {
        problem = "unknown database " + c.db_id;
      } else {
        try {
          sql::parse_sql(c.new_sql, db->second);
        } catch (const Error& e) {
          problem = std::string("new_sql: ") + e.what();
        }
      }
    }
    if (problem) {
      out.rejected.emplace_back(c.id, *problem);
      continue;
    }
    if (candidates_.count(c.id)) {
      ++out.already_present;
      continue;
    }
    append(candidates_fd_, to_json(c).dump() + "\n");
    candidates_.emplace(c.id, std::move(c));
    ++out.added;
  }
  return out;
}

Candidate ReviewStore::record_decision(Decision d) {
  if (auto problem = check_record(d)) throw InvalidDecision(*problem);
  if (d.action != Action::kRevise) d.revised_utterance.reset();
  if (d.timestamp.empty()) d.timestamp = utc_timestamp();
  std::lock_guard lock(mu_);
  auto it = candidates_.find(d.candidate_id);
  if (it == candidates_.end()) throw UnknownCandidate(d.candidate_id);
  append(decisions_fd_, to_json(d).dump() + "\n");
  it->second.reviews.push_back(std::move(d));
  refresh(it->second);
  return it->second;
}

std::optional<Candidate> ReviewStore::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = candidates_.find(id);
  if (it == candidates_.end()) return std::nullopt;
  return it->second;
}

std::vector<Candidate> ReviewStore::list(std::optional<Status> status,
                                         const std::optional<std::string>& reviewer) const {
  std::lock_guard lock(mu_);
  std::vector<Candidate> out;
  for (const auto& [_, c] : candidates_) {
    if (status && c.status != *status) continue;
    if (reviewer && std::any_of(c.reviews.begin(), c.reviews.end(),
                                [&](const Decision& d) { return d.reviewer == *reviewer; })) {
      continue;
    }
    out.push_back(c);
  }
  return out;
}

StatusCounts ReviewStore::stats() const {
  std::lock_guard lock(mu_);
  StatusCounts s;
  for (const auto& [_, c] : candidates_) s.counts[c.status] += 1;
  s.total = candidates_.size();
  return s;
}

std::map<std::string, Status> ReviewStore::replay(const std::filesystem::path& dir) {
  std::map<std::string, Candidate> cands;
  for (const auto& j : read_log(dir / kCandidates, nullptr)) {
    Candidate c = candidate_from_json(j);
    cands[c.id] = c;
  }
  std::map<std::string, std::vector<Decision>> log;
  for (const auto& j : read_log(dir / kDecisions, nullptr)) {
    Decision d = decision_from_json(j);
    log[d.candidate_id].push_back(d);
  }
  std::map<std::string, Status> out;
  for (const auto& [id, c] : cands) out[id] = resolve_status(c, log[id]).status;
  return out;
}

json export_benchmark(const std::vector<Candidate>& candidates) {
  std::vector<const Candidate*> kept;
  for (const auto& c : candidates) {
    if ((c.status == Status::kAccepted || c.status == Status::kRevised) && c.final_utterance) {
      kept.push_back(&c);
    }
  }
  std::sort(kept.begin(), kept.end(), [](const Candidate* a, const Candidate* b) { return a->id < b->id; });
  json out = json::array();
  for (const Candidate* c : kept) {
    json turns = json::array();
    for (std::size_t i = 0; i < c->base.utterances.size(); ++i) {
      turns.push_back({{"utterance", c->base.utterances[i]}, {"query", c->base.sqls.at(i)}});
    }
    turns.push_back({{"utterance", *c->final_utterance}, {"query", c->new_sql}});
    out.push_back({{"id", c->id},
                   {"database_id", c->db_id},
                   {"source_interaction", c->base.interaction_id},
                   {"interaction", turns},
                   {"final", {{"utterance", *c->final_utterance}, {"query", c->new_sql}}}});
  }
  return out;
}

}  // namespace cgforge::review
