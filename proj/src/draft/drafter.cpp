#include "cgforge/draft/drafter.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>

#include "cgforge/core/error.hpp"
#include "cgforge/core/text.hpp"
#include "cgforge/patterns/diff.hpp"
#include "cgforge/sql/parser.hpp"

namespace cgforge::draft {

using nlohmann::json;

json to_json(const DraftRequest& req) {
  json edits = json::array();
  for (const auto& e : req.modification.edits) {
    edits.push_back({{"clause", patterns::to_string(e.clause)},
                     {"action", patterns::to_string(e.action)},
                     {"sql", patterns::payload_sql(e)}});
  }
  return {{"modification", edits}, {"prev_sql", req.prev_sql}, {"prev_utterance", req.prev_utterance}};
}

namespace {

struct Pipe {
  int fd[2] = {-1, -1};
  Pipe() {
    if (::pipe2(fd, O_CLOEXEC) != 0) throw ExternalFailure(std::string("pipe: ") + std::strerror(errno));
  }
  ~Pipe() {
    close(0);
    close(1);
  }
  void close(int i) {
    if (fd[i] >= 0) ::close(fd[i]);
    fd[i] = -1;
  }
};

struct ChildOutput {
  int status = 0;
  bool timed_out = false;
  std::string out;
};

ChildOutput run_child(const std::vector<std::string>& argv, const std::string& input,
                      std::chrono::milliseconds timeout) {
  if (argv.empty()) throw ExternalFailure("empty command");
  Pipe in, out;
  const pid_t pid = ::fork();
  if (pid < 0) throw ExternalFailure(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(in.fd[0], STDIN_FILENO);
    ::dup2(out.fd[1], STDOUT_FILENO);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  in.close(0);
  out.close(1);
  ::fcntl(in.fd[1], F_SETFL, O_NONBLOCK);

  ChildOutput result;
  std::size_t written = 0;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  char buf[4096];
  while (out.fd[0] >= 0) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      result.timed_out = true;
      break;
    }
    pollfd fds[2] = {{out.fd[0], POLLIN, 0}, {in.fd[1], POLLOUT, 0}};
    const nfds_t n = in.fd[1] >= 0 ? 2 : 1;
    if (::poll(fds, n, static_cast<int>(left.count())) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t w = ::write(in.fd[1], input.data() + written, input.size() - written);
      if (w > 0) written += static_cast<std::size_t>(w);
      if (w < 0 && errno != EAGAIN) written = input.size();
      if (written == input.size()) in.close(1);
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      const ssize_t r = ::read(out.fd[0], buf, sizeof buf);
      if (r > 0) {
        result.out.append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || errno != EAGAIN) {
        out.close(0);
      }
    }
  }
  if (result.timed_out) ::kill(pid, SIGKILL);
  ::waitpid(pid, &result.status, 0);
  return result;
}

}  // namespace

std::string draft_external(const DraftRequest& req, const ExternalCommand& command) {
  static std::once_flag ignore_sigpipe;
  std::call_once(ignore_sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });
  const auto r = run_child(command.argv, to_json(req).dump() + "\n", command.timeout);
  if (r.timed_out) {
    throw ExternalFailure("generator timed out after " + std::to_string(command.timeout.count()) + " ms");
  }
  if (!WIFEXITED(r.status) || WEXITSTATUS(r.status) != 0) {
    throw ExternalFailure("generator exited with status " +
                          std::to_string(WIFEXITED(r.status) ? WEXITSTATUS(r.status) : -1));
  }
  json doc;
  try {
    doc = json::parse(r.out);
  } catch (const json::parse_error& e) {
    throw ExternalFailure(std::string("malformed generator output: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("utterance") || !doc["utterance"].is_string()) {
    throw ExternalFailure("malformed generator output: expected {\"utterance\": string}");
  }
  const std::string utterance = text::trim(doc["utterance"].get<std::string>());
  if (utterance.empty()) throw ExternalFailure("generator returned an empty utterance");
  return utterance;
}

DraftRequest request_for(const Candidate& c, const io::Catalog& catalog) {
  auto it = catalog.find(c.db_id);
  if (it == catalog.end()) throw UnknownDatabase(c.db_id);
  const Schema& schema = it->second;
  const auto prev = sql::parse_sql(c.base.prev_sql(), schema);
  const auto next = sql::parse_sql(c.new_sql, schema);
  auto diff = patterns::diff_asts(prev, next, schema);
  auto* mod = std::get_if<patterns::Modification>(&diff);
  if (!mod) {
    throw InvariantError("candidate " + c.id + " is not an incremental edit of its base: " +
                         std::get<patterns::NotIncremental>(diff).reason);
  }
  return {*mod, c.base.prev_sql(), c.base.utterances.empty() ? "" : c.base.utterances.back()};
}

json DraftResult::report() const {
  return {{"drafted", candidates.size()}, {"sources", sources}, {"failures", failures}};
}

DraftResult draft_candidates(std::vector<Candidate> candidates, const io::Catalog& catalog,
                             const DraftOptions& options) {
  DraftResult out;
  std::vector<std::string> failure(candidates.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < candidates.size(); i = next++) {
      Candidate& c = candidates[i];
      const auto req = request_for(c, catalog);
      const Schema& schema = catalog.at(c.db_id);
      if (options.external) {
        try {
          c.draft_utterance = draft_external(req, options.command);
          c.draft_source = "external";
          continue;
        } catch (const ExternalFailure& e) {
          failure[i] = c.id + ": " + e.what();
        }
      }
      c.draft_utterance = draft_rule_based(req, schema);
      c.draft_source = options.external ? "rule-fallback" : "rule";
    }
  };
  const std::size_t threads =
      options.external ? std::max<std::size_t>(1, std::min(options.max_concurrency, candidates.size())) : 1;
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      try {
        worker();
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = candidates.size();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out.sources[candidates[i].draft_source] += 1;
    if (!failure[i].empty()) out.failures.push_back(failure[i]);
  }
  out.candidates = std::move(candidates);
  return out;
}

}  // namespace cgforge::draft
