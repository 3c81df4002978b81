#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cgforge/patterns/modification.hpp"
#include "json.hpp"

namespace cgforge::patterns {

struct TableSlot {
  std::string name;  // tab1, tab2, ...
  // Whether the table occurs in the base query's FROM. Unset when the
  // template was built without a base.
  std::optional<bool> in_base;
  friend bool operator==(const TableSlot&, const TableSlot&) = default;
};

struct ColumnSlot {
  std::string name;        // col1, col2, ...
  std::string table_slot;  // owning table slot
  ColumnType type = ColumnType::kText;
  bool primary_key = false;
  friend bool operator==(const ColumnSlot&, const ColumnSlot&) = default;
};

// Anonymized modification. Payload column refs read {tabN, colN}, literals
// are placeholders named valN, LIMIT counts are kept but excluded from the
// identity text. Constraints render as
//   base(tabN) / new(tabN)   table is / is not in the base FROM
//   colof(colN,tabM)         column belongs to table
//   type(colN)=text          column type
//   pk(colN)                 column is a primary key (absent: it is not)
//   fk(colA,colB)            colA references colB
struct ModificationTemplate {
  Modification mod;
  std::vector<TableSlot> tables;
  std::vector<ColumnSlot> columns;
  std::vector<std::pair<std::string, std::string>> foreign_keys;
  std::vector<std::string> values;  // val1, val2, ...
  std::vector<std::string> constraints;
  std::string text;
  std::string hash;
  std::size_t support = 1;
  std::string example;  // concrete edits of the first occurrence

  const ColumnSlot* column(const std::string& name) const;
  const TableSlot* table(const std::string& name) const;
};

// `base`, when given, is the query the modification applies to; it
// determines the base()/new() table constraints.
ModificationTemplate anonymize(const Modification& mod, const Schema& schema,
                               const QueryAst* base = nullptr);

// Concrete assignment of a template's slots.
struct SlotFill {
  std::map<std::string, std::string> tables;
  std::map<std::string, sql::ColumnRef> columns;
  // Literals bound by matching against the base; unbound value slots are
  // filled with the placeholder.
  std::map<std::string, sql::Value> values;
  friend bool operator==(const SlotFill&, const SlotFill&) = default;
  friend auto operator<=>(const SlotFill&, const SlotFill&) = default;
};

Modification instantiate(const ModificationTemplate& t, const SlotFill& fill);

// Checks `fill` against every constraint of `t` under `schema` (and `base`
// for base()/new()). Returns the first violated constraint.
std::optional<std::string> check_fill(const ModificationTemplate& t, const SlotFill& fill,
                                      const Schema& schema, const QueryAst* base);

nlohmann::json to_json(const Modification& m);
Modification modification_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModificationTemplate& t);
ModificationTemplate template_from_json(const nlohmann::json& j);

}  // namespace cgforge::patterns
