#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "cgforge/sql/ast.hpp"
#include "cgforge/sql/schema.hpp"

namespace cgforge::sql {

// Parses a query of the Spider-family subset and binds it to `schema`.
// The result is canonical: aliases resolved to table names, columns fully
// qualified with the schema's spelling, predicates in canonical order.
//
// Throws ParseError for malformed or out-of-subset SQL and ResolutionError
// for unknown or ambiguous tables/columns.
Query parse_sql(std::string_view text, const Schema& schema);

// Checks the structural invariants of a bound query: every column belongs
// to a table in scope, HAVING implies GROUP BY, set-op operands have equal
// arity, subquery/BETWEEN operand shapes. Returns a description of the
// first violation.
std::optional<std::string> find_violation(const Query& q, const Schema& schema);

}  // namespace cgforge::sql
