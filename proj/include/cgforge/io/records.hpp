#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace cgforge {

enum class Status { kPending, kAccepted, kRejected, kRevised, kDisputed };
enum class Action { kAccept, kReject, kRevise };

std::string_view to_string(Status s);
std::optional<Status> parse_status(std::string_view s);
std::string_view to_string(Action a);
std::optional<Action> parse_action(std::string_view s);

struct Decision {
  std::string candidate_id;
  std::string reviewer;
  Action action = Action::kAccept;
  std::optional<std::string> revised_utterance;
  std::string timestamp;  // ISO-8601 UTC

  friend bool operator==(const Decision&, const Decision&) = default;
};

// The dialogue prefix a candidate extends: utterances up to and including
// the base turn, plus that turn's gold SQL.
struct CandidateBase {
  std::string interaction_id;
  std::size_t turn_index = 0;  // 1-based index of the base turn
  std::vector<std::string> utterances;
  std::vector<std::string> sqls;  // gold SQL of every prefix turn
  std::string prev_sql() const { return sqls.empty() ? std::string() : sqls.back(); }

  friend bool operator==(const CandidateBase&, const CandidateBase&) = default;
};

struct Candidate {
  std::string id;
  std::string db_id;
  CandidateBase base;
  std::string new_sql;
  std::string base_template_hash;
  std::string modification_template_hash;
  std::string draft_utterance;
  std::string draft_source;  // "rule", "external" or "rule-fallback"
  Status status = Status::kPending;
  std::optional<std::string> final_utterance;
  std::vector<Decision> reviews;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// Content hash of (db_id, base prefix, new_sql).
std::string candidate_id(std::string_view db_id, const CandidateBase& base,
                         std::string_view new_sql);

nlohmann::json to_json(const Decision& d);
Decision decision_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Candidate& c);
Candidate candidate_from_json(const nlohmann::json& j);

// Returns a reason when the record-level invariants fail (status/final
// utterance agreement, id matches content, revise carries text).
std::optional<std::string> check_record(const Candidate& c);
std::optional<std::string> check_record(const Decision& d);

}  // namespace cgforge
