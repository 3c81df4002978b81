#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cgforge/io/dataset.hpp"
#include "cgforge/io/records.hpp"
#include "cgforge/patterns/modification.hpp"
#include "json.hpp"

namespace cgforge::draft {

struct DraftRequest {
  patterns::Modification modification;
  std::string prev_sql;
  std::string prev_utterance;
};

// {"modification": [{clause, action, sql}], "prev_sql", "prev_utterance"}
nlohmann::json to_json(const DraftRequest& req);

// Deterministic English realization, one sentence per edit, joined with
// "and also". Column and table phrases use display names when the schema
// has them.
std::string draft_rule_based(const DraftRequest& req, const Schema& schema);

struct ExternalCommand {
  std::vector<std::string> argv;  // argv[0] is resolved through PATH
  std::chrono::milliseconds timeout{10000};
};

// Runs the command, writes the request as one JSON object to its stdin and
// reads {"utterance": ...} from its stdout. Throws ExternalFailure on a
// nonzero exit, timeout, or malformed output.
std::string draft_external(const DraftRequest& req, const ExternalCommand& command);

struct DraftOptions {
  bool external = false;
  ExternalCommand command;
  std::size_t max_concurrency = 4;
};

struct DraftResult {
  std::vector<Candidate> candidates;
  std::map<std::string, std::size_t> sources;  // draft_source -> count
  std::vector<std::string> failures;           // external failures, by candidate
  nlohmann::json report() const;
};

// Request for a candidate: the edit between its base query and new query.
DraftRequest request_for(const Candidate& c, const io::Catalog& catalog);

// Fills draft_utterance/draft_source for every candidate. External failures
// fall back to the rule-based realizer ("rule-fallback").
DraftResult draft_candidates(std::vector<Candidate> candidates, const io::Catalog& catalog,
                             const DraftOptions& options = {});

}  // namespace cgforge::draft
