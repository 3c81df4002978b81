#include "cgforge/sql/schema.hpp"

#include <algorithm>
#include <set>

#include "cgforge/core/error.hpp"
#include "cgforge/core/text.hpp"

namespace cgforge {

std::string_view to_string(ColumnType t) {
  switch (t) {
    case ColumnType::kText: return "text";
    case ColumnType::kNumber: return "number";
    case ColumnType::kTime: return "time";
    case ColumnType::kBoolean: return "boolean";
    case ColumnType::kOthers: return "others";
  }
  return "others";
}

std::optional<ColumnType> parse_column_type(std::string_view s) {
  const std::string lower = text::to_lower(s);
  if (lower == "text") return ColumnType::kText;
  if (lower == "number") return ColumnType::kNumber;
  if (lower == "time") return ColumnType::kTime;
  if (lower == "boolean") return ColumnType::kBoolean;
  if (lower == "others") return ColumnType::kOthers;
  return std::nullopt;
}

std::optional<int> Schema::find_table(std::string_view name) const {
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (text::iequals(tables[i], name)) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::optional<int> Schema::find_column(int table, std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].table == table && text::iequals(columns[i].name, name)) {
      return static_cast<int>(i);
    }
  }
  return std::nullopt;
}

std::vector<int> Schema::columns_of(int table) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].table == table) out.push_back(static_cast<int>(i));
  }
  return out;
}

bool Schema::is_primary_key(int column) const {
  return std::find(primary_keys.begin(), primary_keys.end(), column) != primary_keys.end();
}

bool Schema::has_fk(int from, int to) const {
  return std::find(foreign_keys.begin(), foreign_keys.end(), ForeignKey{from, to}) !=
         foreign_keys.end();
}

bool Schema::is_fk_edge(int a, int b) const { return has_fk(a, b) || has_fk(b, a); }

void Schema::validate() const {
  const int ncols = static_cast<int>(columns.size());
  const int ntables = static_cast<int>(tables.size());
  std::set<std::string> seen_tables;
  for (const auto& t : tables) {
    if (!seen_tables.insert(text::to_lower(t)).second) {
      throw FormatError("db '" + db_id + "': duplicate table name '" + t + "'");
    }
  }
  std::set<std::pair<int, std::string>> seen_columns;
  for (const auto& c : columns) {
    if (c.table < 0 || c.table >= ntables) {
      throw FormatError("db '" + db_id + "': column '" + c.name + "' has invalid table index");
    }
    if (!seen_columns.insert({c.table, text::to_lower(c.name)}).second) {
      throw FormatError("db '" + db_id + "': duplicate column '" + c.name + "' in table '" +
                        tables[static_cast<std::size_t>(c.table)] + "'");
    }
  }
  for (int pk : primary_keys) {
    if (pk < 0 || pk >= ncols) {
      throw FormatError("db '" + db_id + "': primary key index out of range");
    }
  }
  for (const auto& fk : foreign_keys) {
    if (fk.column < 0 || fk.column >= ncols || fk.referenced < 0 || fk.referenced >= ncols) {
      throw FormatError("db '" + db_id + "': foreign key column index out of range");
    }
    if (columns[static_cast<std::size_t>(fk.column)].table ==
        columns[static_cast<std::size_t>(fk.referenced)].table) {
      throw FormatError("db '" + db_id + "': foreign key within a single table");
    }
  }
}

std::string describe(const SchemaItem& item, const Schema& schema) {
  const std::string& table = schema.tables.at(static_cast<std::size_t>(item.table));
  if (item.kind == SchemaItem::Kind::kTable) return table;
  return table + "." + schema.columns.at(static_cast<std::size_t>(item.column)).name;
}

}  // namespace cgforge
