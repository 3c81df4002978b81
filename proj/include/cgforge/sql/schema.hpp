#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cgforge {

enum class ColumnType { kText, kNumber, kTime, kBoolean, kOthers };

std::string_view to_string(ColumnType t);
std::optional<ColumnType> parse_column_type(std::string_view s);

struct SchemaColumn {
  int table = 0;
  std::string name;          // original identifier
  std::string display_name;  // natural-language name; empty when absent
  ColumnType type = ColumnType::kText;
};

struct ForeignKey {
  int column = 0;  // referencing column
  int referenced = 0;
  friend bool operator==(const ForeignKey&, const ForeignKey&) = default;
};

// Database schema catalog entry. Column indices are 0-based over real
// columns; the Spider "*" pseudo-column is not stored.
class Schema {
 public:
  std::string db_id;
  std::vector<std::string> tables;
  std::vector<std::string> table_display_names;
  std::vector<SchemaColumn> columns;
  std::vector<int> primary_keys;
  std::vector<ForeignKey> foreign_keys;

  // Case-insensitive lookups.
  std::optional<int> find_table(std::string_view name) const;
  std::optional<int> find_column(int table, std::string_view name) const;
  std::vector<int> columns_of(int table) const;

  bool is_primary_key(int column) const;
  // True when a FK edge links the two columns in either direction.
  bool is_fk_edge(int a, int b) const;
  bool has_fk(int from, int to) const;

  // Throws FormatError describing the first violated invariant.
  void validate() const;
};

// A table or column of a particular schema; columns carry their table.
struct SchemaItem {
  enum class Kind { kTable, kColumn };
  Kind kind = Kind::kTable;
  int table = 0;
  int column = -1;

  static SchemaItem of_table(int t) { return {Kind::kTable, t, -1}; }
  static SchemaItem of_column(int t, int c) { return {Kind::kColumn, t, c}; }

  friend bool operator==(const SchemaItem&, const SchemaItem&) = default;
  friend auto operator<=>(const SchemaItem&, const SchemaItem&) = default;
};

std::string describe(const SchemaItem& item, const Schema& schema);

}  // namespace cgforge
