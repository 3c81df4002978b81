#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cgforge/sql/ast.hpp"
#include "json.hpp"

namespace cgforge::recombine {

struct Violation {
  std::string rule_id;
  std::string location;  // clause name
  friend bool operator==(const Violation&, const Violation&) = default;
};

// A rule reports the location of its first violation in a query, if any.
struct LintRule {
  std::string id;
  std::string description;
  std::function<std::optional<std::string>(const QueryAst&)> matcher;
};

// agg-select-with-orderby-no-groupby, duplicate-and-condition,
// orderby-fixed-by-equality, having-without-groupby.
std::vector<LintRule> default_rules();

// Rule set from configuration:
//   {"rules": ["<built-in id>", ...,
//              {"id": "...", "description": "...",
//               "present": [features...], "absent": [features...]}]}
// A feature rule fires when every `present` feature holds and no `absent`
// feature does. Features: select_aggregate, distinct, join, where, or,
// like, group_by, having, order_by, limit, set_op, nested. A missing
// "rules" key yields the defaults. Throws FormatError on unknown ids or
// features.
std::vector<LintRule> rules_from_json(const nlohmann::json& config);

// Checks the query and the right operands of set operations.
std::vector<Violation> lint(const QueryAst& ast, const std::vector<LintRule>& rules);

}  // namespace cgforge::recombine
