#pragma once

#include <variant>

#include "cgforge/patterns/modification.hpp"

namespace cgforge::patterns {

using DiffResult = std::variant<Modification, NotIncremental>;

// Top-down clause diff. Each differing clause contributes its minimal edit
// (appended/removed list items, added/removed conjuncts, else a whole-clause
// replace). Returns NotIncremental for identical queries, for more than two
// differing clauses, and when both the FROM table set and the select list
// change. A returned Modification always reproduces `cur` when applied to
// `prev`.
DiffResult diff_asts(const QueryAst& prev, const QueryAst& cur, const Schema& schema);

}  // namespace cgforge::patterns
