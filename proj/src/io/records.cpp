#include "cgforge/io/records.hpp"

#include "cgforge/core/error.hpp"
#include "cgforge/core/hash.hpp"

namespace cgforge {

using nlohmann::json;

std::string_view to_string(Status s) {
  switch (s) {
    case Status::kPending: return "pending";
    case Status::kAccepted: return "accepted";
    case Status::kRejected: return "rejected";
    case Status::kRevised: return "revised";
    case Status::kDisputed: return "disputed";
  }
  return "pending";
}

std::optional<Status> parse_status(std::string_view s) {
  for (Status st : {Status::kPending, Status::kAccepted, Status::kRejected, Status::kRevised,
                    Status::kDisputed}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::kAccept: return "accept";
    case Action::kReject: return "reject";
    case Action::kRevise: return "revise";
  }
  return "accept";
}

std::optional<Action> parse_action(std::string_view s) {
  for (Action a : {Action::kAccept, Action::kReject, Action::kRevise}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

std::string candidate_id(std::string_view db_id, const CandidateBase& base,
                         std::string_view new_sql) {
  std::string key(db_id);
  key += '\x1e';
  for (std::size_t i = 0; i < base.utterances.size(); ++i) {
    key += base.utterances[i];
    key += '\x1f';
    if (i < base.sqls.size()) key += base.sqls[i];
    key += '\x1e';
  }
  key += new_sql;
  return "c" + stable_hash(key);
}

namespace {

template <typename T>
T field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw FormatError(std::string("missing field '") + name + "'");
  }
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("field '") + name + "': " + e.what());
  }
}

}  // namespace

json to_json(const Decision& d) {
  json j = {{"candidate_id", d.candidate_id},
            {"reviewer", d.reviewer},
            {"action", std::string(to_string(d.action))},
            {"timestamp", d.timestamp}};
  if (d.revised_utterance) j["revised_utterance"] = *d.revised_utterance;
  return j;
}

Decision decision_from_json(const json& j) {
  Decision d;
  d.candidate_id = field<std::string>(j, "candidate_id");
  d.reviewer = field<std::string>(j, "reviewer");
  const auto action = field<std::string>(j, "action");
  auto parsed = parse_action(action);
  if (!parsed) throw FormatError("unknown action '" + action + "'");
  d.action = *parsed;
  if (j.contains("revised_utterance") && !j["revised_utterance"].is_null()) {
    d.revised_utterance = field<std::string>(j, "revised_utterance");
  }
  if (j.contains("timestamp")) d.timestamp = field<std::string>(j, "timestamp");
  return d;
}

json to_json(const Candidate& c) {
  json reviews = json::array();
  for (const auto& d : c.reviews) reviews.push_back(to_json(d));
  json j = {{"id", c.id},
            {"db_id", c.db_id},
            {"base",
             {{"interaction_id", c.base.interaction_id},
              {"turn_index", c.base.turn_index},
              {"utterances", c.base.utterances},
              {"sqls", c.base.sqls}}},
            {"new_sql", c.new_sql},
            {"base_template_hash", c.base_template_hash},
            {"modification_template_hash", c.modification_template_hash},
            {"draft_utterance", c.draft_utterance},
            {"draft_source", c.draft_source},
            {"status", std::string(to_string(c.status))},
            {"final_utterance", c.final_utterance ? json(*c.final_utterance) : json(nullptr)},
            {"reviews", reviews}};
  return j;
}

Candidate candidate_from_json(const json& j) {
  Candidate c;
  c.id = field<std::string>(j, "id");
  c.db_id = field<std::string>(j, "db_id");
  const json& base = j.at("base");
  c.base.interaction_id = field<std::string>(base, "interaction_id");
  c.base.turn_index = field<std::size_t>(base, "turn_index");
  c.base.utterances = field<std::vector<std::string>>(base, "utterances");
  c.base.sqls = field<std::vector<std::string>>(base, "sqls");
  c.new_sql = field<std::string>(j, "new_sql");
  c.base_template_hash = field<std::string>(j, "base_template_hash");
  c.modification_template_hash = field<std::string>(j, "modification_template_hash");
  c.draft_utterance = j.value("draft_utterance", std::string());
  c.draft_source = j.value("draft_source", std::string());
  const auto status = j.value("status", std::string("pending"));
  auto parsed = parse_status(status);
  if (!parsed) throw FormatError("unknown status '" + status + "'");
  c.status = *parsed;
  if (j.contains("final_utterance") && !j["final_utterance"].is_null()) {
    c.final_utterance = field<std::string>(j, "final_utterance");
  }
  if (j.contains("reviews")) {
    for (const auto& d : j["reviews"]) c.reviews.push_back(decision_from_json(d));
  }
  return c;
}

std::optional<std::string> check_record(const Candidate& c) {
  if (c.id.empty()) return "empty candidate id";
  if (c.id != candidate_id(c.db_id, c.base, c.new_sql)) return "id does not match content";
  if (c.base.utterances.empty()) return "empty base prefix";
  if (c.base.utterances.size() != c.base.sqls.size()) return "base utterances and sqls differ";
  if (c.new_sql.empty()) return "empty new_sql";
  if ((c.status == Status::kAccepted || c.status == Status::kRevised) &&
      (!c.final_utterance || c.final_utterance->empty())) {
    return "accepted/revised candidate without final utterance";
  }
  return std::nullopt;
}

std::optional<std::string> check_record(const Decision& d) {
  if (d.candidate_id.empty()) return "empty candidate id";
  if (d.reviewer.empty()) return "empty reviewer";
  if (d.action == Action::kRevise && (!d.revised_utterance || d.revised_utterance->empty())) {
    return "revise requires a non-empty revised_utterance";
  }
  return std::nullopt;
}

}  // namespace cgforge
