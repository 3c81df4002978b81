#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cgforge/sql/ast.hpp"
#include "cgforge/sql/schema.hpp"
#include "json.hpp"

namespace cgforge::io {

using Catalog = std::map<std::string, Schema>;

// Spider-format tables.json. Throws FormatError (with record index and field
// name) or DuplicateDbId. Self-referencing foreign keys are dropped; see
// CatalogStats.
struct CatalogStats {
  std::size_t dropped_self_foreign_keys = 0;
};
Catalog parse_schema_catalog(const nlohmann::json& doc, CatalogStats* stats = nullptr);
Catalog load_schema_catalog(const std::filesystem::path& path, CatalogStats* stats = nullptr);

struct Turn {
  std::string utterance;
  std::string gold_sql;
  QueryAst ast;
};

struct Interaction {
  std::string id;
  std::string db_id;
  std::vector<Turn> turns;
};

struct RejectedRecord {
  std::size_t index = 0;
  std::string id;
  std::string reason;
};

struct DialogueSet {
  std::vector<Interaction> interactions;
  std::vector<RejectedRecord> rejects;
  // Turns without a gold query (e.g. clarification acts) that were skipped.
  std::size_t skipped_turns = 0;
};

// SParC/CoSQL dialogue array: records with `database_id` and an `interaction`
// array of {utterance, query}. Records whose queries fail to parse are
// routed to `rejects`. Throws FormatError or UnknownDatabase.
DialogueSet parse_dialogues(const nlohmann::json& doc, const Catalog& catalog);
DialogueSet load_dialogues(const std::filesystem::path& path, const Catalog& catalog);

// Question ids are `<interaction id>:<1-based turn>`.
std::string question_id(const Interaction& interaction, std::size_t turn_index);

struct PrefixAlignedExample {
  std::string interaction_id;
  std::size_t turn_index = 0;  // 1-based
  std::vector<std::string> prefix_utterances;
  std::string target_sql;
  friend bool operator==(const PrefixAlignedExample&, const PrefixAlignedExample&) = default;
};

std::vector<PrefixAlignedExample> export_palign_pairs(const std::vector<Interaction>& dialogues);

nlohmann::json to_json(const PrefixAlignedExample& e);
PrefixAlignedExample palign_from_json(const nlohmann::json& j);

struct Prediction {
  std::string question_id;
  std::string predicted_sql;
  friend bool operator==(const Prediction&, const Prediction&) = default;
};

// Line-delimited JSON helpers. Blank lines are ignored on read.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& records);
nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

std::vector<Prediction> load_predictions(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& preds);

}  // namespace cgforge::io
