#pragma once

#include <string>

#include "cgforge/sql/ast.hpp"

namespace cgforge::sql {

struct PrintOptions {
  // Replace every table/column name with a fixed token and every literal
  // with `?`. Produces the name-independent shape used for canonical
  // ordering.
  bool erase_names = false;
  // Print LIMIT counts as the slot token `lim` (template rendering).
  bool limit_as_slot = false;
};

// Canonical rendering. Keywords upper-case, aggregates lower-case, columns
// fully qualified, placeholders as `?`.
std::string print_sql(const Query& q, PrintOptions opts = {});

std::string print(const ColumnRef& c, PrintOptions opts = {});
std::string print(const AggExpr& e, PrintOptions opts = {});
std::string print(const Value& v, PrintOptions opts = {});
std::string print(const Condition& c, PrintOptions opts = {});
std::string print(const Predicate& p, PrintOptions opts = {});
std::string print(const FromClause& f, PrintOptions opts = {});
std::string print(const OrderItem& o, PrintOptions opts = {});

}  // namespace cgforge::sql
