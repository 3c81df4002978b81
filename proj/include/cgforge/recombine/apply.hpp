#pragma once

#include "cgforge/patterns/modification.hpp"
#include "cgforge/sql/ast.hpp"
#include "cgforge/sql/schema.hpp"

namespace cgforge::recombine {

// Applies the edits in order and returns the canonical result. Throws
// ApplyError when an edit does not fit the base (removing an absent clause
// or item, replacing a missing clause, adding a LIMIT that already exists)
// or the result violates the query invariants under `schema` (e.g. HAVING
// left without GROUP BY, columns from tables outside FROM).
QueryAst apply_modification(const QueryAst& base, const patterns::Modification& mod,
                            const Schema& schema);

}  // namespace cgforge::recombine
