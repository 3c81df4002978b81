#include "cgforge/recombine/lint.hpp"

#include <algorithm>
#include <map>

#include "cgforge/core/error.hpp"

namespace cgforge::recombine {

namespace {

bool has_duplicate_conjunct(const sql::Predicate& p) {
  if (p.kind == sql::Connective::kLeaf) return false;
  if (p.kind == sql::Connective::kAnd) {
    for (std::size_t i = 0; i < p.children.size(); ++i) {
      for (std::size_t j = i + 1; j < p.children.size(); ++j) {
        if (p.children[i] == p.children[j]) return true;
      }
    }
  }
  for (const auto& c : p.children) {
    if (has_duplicate_conjunct(c)) return true;
  }
  return false;
}

bool plain_column(const sql::AggExpr& e) {
  return e.agg == sql::Agg::kNone && !e.value.op && e.value.left.agg == sql::Agg::kNone;
}

std::optional<std::string> agg_select_orderby(const QueryAst& q) {
  if (q.order_by.empty() || !q.group_by.empty()) return std::nullopt;
  for (const auto& item : q.select) {
    if (item.agg != sql::Agg::kNone || item.value.left.agg != sql::Agg::kNone) return "order_by";
  }
  return std::nullopt;
}

std::optional<std::string> duplicate_condition(const QueryAst& q) {
  if (q.where && has_duplicate_conjunct(*q.where)) return "where";
  if (q.having && has_duplicate_conjunct(*q.having)) return "having";
  return std::nullopt;
}

std::optional<std::string> orderby_fixed(const QueryAst& q) {
  if (!q.where || q.order_by.empty()) return std::nullopt;
  for (const auto& c : sql::conjuncts(*q.where)) {
    if (c.kind != sql::Connective::kLeaf) continue;
    const auto& cond = c.condition;
    if (cond.op != sql::CompareOp::kEq || !std::holds_alternative<sql::Value>(cond.right) ||
        !plain_column(cond.left)) {
      continue;
    }
    for (const auto& o : q.order_by) {
      if (plain_column(o.expr) && o.expr.value.left.column == cond.left.value.left.column) {
        return "order_by";
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> having_no_groupby(const QueryAst& q) {
  if (q.having && q.group_by.empty()) return "having";
  return std::nullopt;
}

bool has_nested(const sql::Predicate& p) {
  if (p.kind == sql::Connective::kLeaf) return p.condition.has_subquery();
  for (const auto& c : p.children) {
    if (has_nested(c)) return true;
  }
  return false;
}

bool has_connective(const sql::Predicate& p, sql::Connective k) {
  if (p.kind == k) return true;
  for (const auto& c : p.children) {
    if (has_connective(c, k)) return true;
  }
  return false;
}

bool has_like(const sql::Predicate& p) {
  if (p.kind == sql::Connective::kLeaf) {
    return p.condition.op == sql::CompareOp::kLike || p.condition.op == sql::CompareOp::kNotLike;
  }
  for (const auto& c : p.children) {
    if (has_like(c)) return true;
  }
  return false;
}

using Feature = std::function<bool(const QueryAst&)>;

const std::map<std::string, Feature>& features() {
  static const std::map<std::string, Feature> kFeatures = {
      {"select_aggregate",
       [](const QueryAst& q) {
         for (const auto& i : q.select) {
           if (i.agg != sql::Agg::kNone || i.value.left.agg != sql::Agg::kNone) return true;
         }
         return false;
       }},
      {"distinct", [](const QueryAst& q) { return q.distinct; }},
      {"join", [](const QueryAst& q) { return q.from.tables.size() > 1; }},
      {"where", [](const QueryAst& q) { return q.where.has_value(); }},
      {"or", [](const QueryAst& q) { return q.where && has_connective(*q.where, sql::Connective::kOr); }},
      {"like", [](const QueryAst& q) { return q.where && has_like(*q.where); }},
      {"group_by", [](const QueryAst& q) { return !q.group_by.empty(); }},
      {"having", [](const QueryAst& q) { return q.having.has_value(); }},
      {"order_by", [](const QueryAst& q) { return !q.order_by.empty(); }},
      {"limit", [](const QueryAst& q) { return q.limit.has_value(); }},
      {"set_op", [](const QueryAst& q) { return q.set_op.has_value(); }},
      {"nested",
       [](const QueryAst& q) {
         for (const auto& t : q.from.tables) {
           if (t.is_subquery()) return true;
         }
         return (q.where && has_nested(*q.where)) || (q.having && has_nested(*q.having));
       }},
  };
  return kFeatures;
}

LintRule feature_rule(const nlohmann::json& spec) {
  LintRule rule;
  rule.id = spec.at("id").get<std::string>();
  rule.description = spec.value("description", "");
  std::vector<Feature> present, absent;
  std::string location;
  for (const auto& [key, out] : {std::pair{"present", &present}, std::pair{"absent", &absent}}) {
    for (const auto& name : spec.value(key, nlohmann::json::array())) {
      auto it = features().find(name.get<std::string>());
      if (it == features().end()) {
        throw FormatError("lint rule '" + rule.id + "': unknown feature '" + name.get<std::string>() + "'");
      }
      out->push_back(it->second);
      if (location.empty() && out == &present) location = it->first;
    }
  }
  if (present.empty()) throw FormatError("lint rule '" + rule.id + "' needs a present feature");
  rule.matcher = [present, absent, location](const QueryAst& q) -> std::optional<std::string> {
    for (const auto& f : present) {
      if (!f(q)) return std::nullopt;
    }
    for (const auto& f : absent) {
      if (f(q)) return std::nullopt;
    }
    return location;
  };
  return rule;
}

}  // namespace

std::vector<LintRule> default_rules() {
  return {
      {"agg-select-with-orderby-no-groupby",
       "aggregate in SELECT combined with ORDER BY but no GROUP BY", agg_select_orderby},
      {"duplicate-and-condition", "the same condition appears twice under AND",
       duplicate_condition},
      {"orderby-fixed-by-equality", "ORDER BY a column already fixed by an equality in WHERE",
       orderby_fixed},
      {"having-without-groupby", "HAVING without GROUP BY", having_no_groupby},
  };
}

std::vector<LintRule> rules_from_json(const nlohmann::json& config) {
  if (!config.is_object() || !config.contains("rules")) return default_rules();
  const auto builtins = default_rules();
  std::vector<LintRule> out;
  for (const auto& entry : config.at("rules")) {
    if (entry.is_string()) {
      const auto id = entry.get<std::string>();
      auto it = std::find_if(builtins.begin(), builtins.end(),
                             [&](const LintRule& r) { return r.id == id; });
      if (it == builtins.end()) throw FormatError("unknown lint rule '" + id + "'");
      out.push_back(*it);
    } else {
      try {
        out.push_back(feature_rule(entry));
      } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("lint rule: ") + e.what());
      }
    }
  }
  return out;
}

std::vector<Violation> lint(const QueryAst& ast, const std::vector<LintRule>& rules) {
  std::vector<Violation> out;
  for (const QueryAst* q = &ast; q; q = q->set_op ? &*q->set_op->right : nullptr) {
    for (const auto& rule : rules) {
      if (auto where = rule.matcher(*q)) out.push_back({rule.id, *where});
    }
  }
  return out;
}

}  // namespace cgforge::recombine
