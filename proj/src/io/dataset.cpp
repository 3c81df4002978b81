#include "cgforge/io/dataset.hpp"

#include <fstream>
#include <sstream>

#include "cgforge/core/error.hpp"
#include "cgforge/sql/parser.hpp"
#include "cgforge/sql/printer.hpp"

namespace cgforge::io {

using nlohmann::json;

namespace {

[[noreturn]] void bad_field(std::size_t index, const std::string& name, const std::string& why) {
  throw FormatError("record " + std::to_string(index) + ", field '" + name + "': " + why);
}

const json& require(const json& rec, std::size_t index, const char* name) {
  if (!rec.contains(name)) bad_field(index, name, "missing");
  return rec.at(name);
}

Schema parse_schema_record(const json& rec, std::size_t index, CatalogStats* stats) {
  if (!rec.is_object()) throw FormatError("record " + std::to_string(index) + ": not an object");
  Schema s;
  const json& db = require(rec, index, "db_id");
  if (!db.is_string()) bad_field(index, "db_id", "expected string");
  s.db_id = db.get<std::string>();

  const json& tables = require(rec, index, "table_names_original");
  if (!tables.is_array()) bad_field(index, "table_names_original", "expected array");
  for (const auto& t : tables) {
    if (!t.is_string()) bad_field(index, "table_names_original", "expected strings");
    s.tables.push_back(t.get<std::string>());
  }
  if (rec.contains("table_names") && rec["table_names"].is_array() &&
      rec["table_names"].size() == s.tables.size()) {
    for (const auto& t : rec["table_names"]) {
      s.table_display_names.push_back(t.is_string() ? t.get<std::string>() : std::string());
    }
  }

  const json& cols = require(rec, index, "column_names_original");
  const json& types = require(rec, index, "column_types");
  if (!cols.is_array()) bad_field(index, "column_names_original", "expected array");
  if (!types.is_array() || types.size() != cols.size()) {
    bad_field(index, "column_types", "expected array parallel to column_names_original");
  }
  const json* display = nullptr;
  if (rec.contains("column_names") && rec["column_names"].is_array() &&
      rec["column_names"].size() == cols.size()) {
    display = &rec["column_names"];
  }
  // File index -> internal index (-1 for the "*" pseudo column).
  std::vector<int> remap;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const json& c = cols[i];
    if (!c.is_array() || c.size() != 2 || !c[0].is_number_integer() || !c[1].is_string()) {
      bad_field(index, "column_names_original", "entry " + std::to_string(i) + " malformed");
    }
    const int table = c[0].get<int>();
    if (table < 0) {
      remap.push_back(-1);
      continue;
    }
    if (table >= static_cast<int>(s.tables.size())) {
      bad_field(index, "column_names_original", "table index out of range");
    }
    if (!types[i].is_string()) bad_field(index, "column_types", "expected strings");
    auto type = parse_column_type(types[i].get<std::string>());
    if (!type) bad_field(index, "column_types", "unknown type '" + types[i].get<std::string>() + "'");
    SchemaColumn col;
    col.table = table;
    col.name = c[1].get<std::string>();
    col.type = *type;
    if (display && (*display)[i].is_array() && (*display)[i].size() == 2 &&
        (*display)[i][1].is_string()) {
      col.display_name = (*display)[i][1].get<std::string>();
    }
    remap.push_back(static_cast<int>(s.columns.size()));
    s.columns.push_back(std::move(col));
  }
  auto column_at = [&](const json& v, const char* name) {
    if (!v.is_number_integer()) bad_field(index, name, "expected integer column index");
    const long long raw = v.get<long long>();
    if (raw < 0 || raw >= static_cast<long long>(remap.size()) ||
        remap[static_cast<std::size_t>(raw)] < 0) {
      bad_field(index, name, "column index " + std::to_string(raw) + " out of range");
    }
    return remap[static_cast<std::size_t>(raw)];
  };

  const json& pks = require(rec, index, "primary_keys");
  if (!pks.is_array()) bad_field(index, "primary_keys", "expected array");
  for (const auto& pk : pks) {
    // Composite keys appear as nested arrays in some catalog revisions.
    if (pk.is_array()) {
      for (const auto& part : pk) s.primary_keys.push_back(column_at(part, "primary_keys"));
    } else {
      s.primary_keys.push_back(column_at(pk, "primary_keys"));
    }
  }

  const json& fks = require(rec, index, "foreign_keys");
  if (!fks.is_array()) bad_field(index, "foreign_keys", "expected array");
  for (const auto& fk : fks) {
    if (!fk.is_array() || fk.size() != 2) bad_field(index, "foreign_keys", "expected pairs");
    ForeignKey edge{column_at(fk[0], "foreign_keys"), column_at(fk[1], "foreign_keys")};
    if (s.columns[static_cast<std::size_t>(edge.column)].table ==
        s.columns[static_cast<std::size_t>(edge.referenced)].table) {
      if (stats) ++stats->dropped_self_foreign_keys;
      continue;
    }
    if (!s.has_fk(edge.column, edge.referenced)) s.foreign_keys.push_back(edge);
  }

  try {
    s.validate();
  } catch (const FormatError& e) {
    throw FormatError("record " + std::to_string(index) + ": " + e.what());
  }
  return s;
}

}  // namespace

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw FormatError("'" + path.string() + "' line " + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
  return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (const auto& r : records) out << r.dump() << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Catalog parse_schema_catalog(const json& doc, CatalogStats* stats) {
  if (!doc.is_array()) throw FormatError("schema catalog must be a JSON array");
  Catalog catalog;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    Schema s = parse_schema_record(doc[i], i, stats);
    const std::string id = s.db_id;
    if (!catalog.emplace(id, std::move(s)).second) {
      throw DuplicateDbId("record " + std::to_string(i) + ": duplicate db_id '" + id + "'");
    }
  }
  return catalog;
}

Catalog load_schema_catalog(const std::filesystem::path& path, CatalogStats* stats) {
  return parse_schema_catalog(read_json(path), stats);
}

DialogueSet parse_dialogues(const json& doc, const Catalog& catalog) {
  if (!doc.is_array()) throw FormatError("dialogue file must be a JSON array");
  DialogueSet set;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& rec = doc[i];
    if (!rec.is_object()) throw FormatError("record " + std::to_string(i) + ": not an object");
    const json& db = require(rec, i, "database_id");
    if (!db.is_string()) bad_field(i, "database_id", "expected string");
    auto schema_it = catalog.find(db.get<std::string>());
    if (schema_it == catalog.end()) {
      throw UnknownDatabase("record " + std::to_string(i) + ": unknown database '" +
                            db.get<std::string>() + "'");
    }
    Interaction inter;
    inter.db_id = schema_it->first;
    if (rec.contains("id") && rec["id"].is_string()) {
      inter.id = rec["id"].get<std::string>();
    } else {
      inter.id = std::to_string(i);
    }
    const json& turns = require(rec, i, "interaction");
    if (!turns.is_array()) bad_field(i, "interaction", "expected array");

    std::optional<std::string> failure;
    for (std::size_t t = 0; t < turns.size(); ++t) {
      const json& turn = turns[t];
      if (!turn.is_object()) bad_field(i, "interaction", "turn " + std::to_string(t) + " malformed");
      const std::string query = turn.contains("query") && turn["query"].is_string()
                                    ? turn["query"].get<std::string>()
                                    : std::string();
      if (query.find_first_not_of(" \t\r\n") == std::string::npos) {
        ++set.skipped_turns;
        continue;
      }
      Turn parsed;
      parsed.utterance = turn.value("utterance", std::string());
      parsed.gold_sql = query;
      try {
        parsed.ast = sql::parse_sql(query, schema_it->second);
      } catch (const Error& e) {
        failure = "turn " + std::to_string(t + 1) + ": " + e.what();
        break;
      }
      inter.turns.push_back(std::move(parsed));
    }
    if (failure) {
      set.rejects.push_back({i, inter.id, *failure});
    } else if (inter.turns.empty()) {
      set.rejects.push_back({i, inter.id, "no turns with a gold query"});
    } else {
      set.interactions.push_back(std::move(inter));
    }
  }
  return set;
}

DialogueSet load_dialogues(const std::filesystem::path& path, const Catalog& catalog) {
  return parse_dialogues(read_json(path), catalog);
}

std::string question_id(const Interaction& interaction, std::size_t turn_index) {
  return interaction.id + ":" + std::to_string(turn_index);
}

std::vector<PrefixAlignedExample> export_palign_pairs(const std::vector<Interaction>& dialogues) {
  std::vector<PrefixAlignedExample> out;
  for (const auto& inter : dialogues) {
    std::vector<std::string> prefix;
    for (std::size_t i = 0; i < inter.turns.size(); ++i) {
      prefix.push_back(inter.turns[i].utterance);
      out.push_back({inter.id, i + 1, prefix, sql::print_sql(inter.turns[i].ast)});
    }
  }
  return out;
}

json to_json(const PrefixAlignedExample& e) {
  return {{"interaction_id", e.interaction_id},
          {"turn_index", e.turn_index},
          {"prefix_utterances", e.prefix_utterances},
          {"target_sql", e.target_sql}};
}

PrefixAlignedExample palign_from_json(const json& j) {
  try {
    return {j.at("interaction_id").get<std::string>(), j.at("turn_index").get<std::size_t>(),
            j.at("prefix_utterances").get<std::vector<std::string>>(),
            j.at("target_sql").get<std::string>()};
  } catch (const json::exception& e) {
    throw FormatError(std::string("p-align record: ") + e.what());
  }
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> out;
  for (const auto& j : read_jsonl(path)) {
    if (!j.is_object() || !j.contains("question_id") || !j["question_id"].is_string()) {
      throw FormatError("prediction record without string question_id");
    }
    Prediction p;
    p.question_id = j["question_id"].get<std::string>();
    if (j.contains("predicted_sql") && j["predicted_sql"].is_string()) {
      p.predicted_sql = j["predicted_sql"].get<std::string>();
    }
    out.push_back(std::move(p));
  }
  return out;
}

void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& preds) {
  std::vector<json> records;
  for (const auto& p : preds) {
    records.push_back({{"question_id", p.question_id}, {"predicted_sql", p.predicted_sql}});
  }
  write_jsonl(path, records);
}

}  // namespace cgforge::io
