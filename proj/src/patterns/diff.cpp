#include "cgforge/patterns/diff.hpp"

#include <algorithm>
#include <set>

#include "cgforge/core/error.hpp"
#include "cgforge/recombine/apply.hpp"

namespace cgforge::patterns {
namespace {

template <typename T>
bool is_prefix(const std::vector<T>& p, const std::vector<T>& c) {
  return p.size() < c.size() && std::equal(p.begin(), p.end(), c.begin());
}

// Items of `p` left over after removing one occurrence of each item of `c`,
// or nullopt when `c` is not a sub-multiset of `p`.
template <typename T>
std::optional<std::vector<T>> minus(const std::vector<T>& p, const std::vector<T>& c) {
  std::vector<T> rest = p;
  for (const auto& item : c) {
    auto it = std::find(rest.begin(), rest.end(), item);
    if (it == rest.end()) return std::nullopt;
    rest.erase(it);
  }
  return rest;
}

template <typename Wrap, typename T>
std::vector<Edit> list_edits(Clause clause, const std::vector<T>& p, const std::vector<T>& c) {
  if (c.empty()) return {{clause, EditAction::kRemove, Wrap{p}}};
  if (p.empty() || is_prefix(p, c)) {
    return {{clause, EditAction::kAdd, Wrap{std::vector<T>(c.begin() + static_cast<long>(p.size()), c.end())}}};
  }
  if (c.size() < p.size()) {
    if (auto removed = minus(p, c)) return {{clause, EditAction::kRemove, Wrap{*removed}}};
  }
  return {{clause, EditAction::kReplace, Wrap{c}}};
}

std::vector<Edit> select_edits(const QueryAst& p, const QueryAst& c) {
  if (p.distinct != c.distinct) {
    return {{Clause::kSelect, EditAction::kReplace, SelectList{c.distinct, c.select}}};
  }
  if (is_prefix(p.select, c.select)) {
    std::vector<sql::AggExpr> rest(c.select.begin() + static_cast<long>(p.select.size()), c.select.end());
    return {{Clause::kSelect, EditAction::kAdd, SelectList{c.distinct, rest}}};
  }
  if (c.select.size() < p.select.size()) {
    if (auto removed = minus(p.select, c.select)) {
      return {{Clause::kSelect, EditAction::kRemove, SelectList{p.distinct, *removed}}};
    }
  }
  return {{Clause::kSelect, EditAction::kReplace, SelectList{c.distinct, c.select}}};
}

std::vector<Edit> predicate_edits(Clause clause, const std::optional<sql::Predicate>& p,
                                  const std::optional<sql::Predicate>& c) {
  if (!p) return {{clause, EditAction::kAdd, ConditionList{sql::conjuncts(*c)}}};
  if (!c) return {{clause, EditAction::kRemove, ConditionList{sql::conjuncts(*p)}}};
  const auto pc = sql::conjuncts(*p);
  const auto cc = sql::conjuncts(*c);
  std::vector<sql::Predicate> removed, added, shared;
  std::vector<sql::Predicate> pool = cc;
  for (const auto& item : pc) {
    auto it = std::find(pool.begin(), pool.end(), item);
    if (it == pool.end()) {
      removed.push_back(item);
    } else {
      shared.push_back(item);
      pool.erase(it);
    }
  }
  added = pool;
  if (shared.empty()) return {{clause, EditAction::kReplace, ConditionList{{*c}}}};
  std::vector<Edit> edits;
  if (!removed.empty()) edits.push_back({clause, EditAction::kRemove, ConditionList{removed}});
  if (!added.empty()) edits.push_back({clause, EditAction::kAdd, ConditionList{added}});
  return edits;
}

std::vector<Edit> optional_edits(Clause clause, bool had, bool has, Payload prev, Payload cur) {
  if (!had) return {{clause, EditAction::kAdd, std::move(cur)}};
  if (!has) return {{clause, EditAction::kRemove, std::move(prev)}};
  return {{clause, EditAction::kReplace, std::move(cur)}};
}

std::set<std::string> table_set(const sql::FromClause& f) {
  std::set<std::string> out;
  for (const auto& t : f.tables) out.insert(t.is_subquery() ? "(subquery)" : t.table);
  return out;
}

std::vector<Edit> clause_edits(Clause clause, const QueryAst& p, const QueryAst& c) {
  switch (clause) {
    case Clause::kSelect:
      return select_edits(p, c);
    case Clause::kFrom:
      return {{Clause::kFrom, EditAction::kReplace, c.from}};
    case Clause::kWhere:
      return predicate_edits(clause, p.where, c.where);
    case Clause::kGroupBy:
      return list_edits<ColumnList>(clause, p.group_by, c.group_by);
    case Clause::kHaving:
      return predicate_edits(clause, p.having, c.having);
    case Clause::kOrderBy:
      return list_edits<OrderList>(clause, p.order_by, c.order_by);
    case Clause::kLimit:
      return optional_edits(clause, p.limit.has_value(), c.limit.has_value(),
                            LimitValue{p.limit.value_or(0)}, LimitValue{c.limit.value_or(0)});
    case Clause::kSetOp:
      return optional_edits(clause, p.set_op.has_value(), c.set_op.has_value(),
                            p.set_op.value_or(sql::SetOp{}), c.set_op.value_or(sql::SetOp{}));
  }
  return {};
}

std::vector<Edit> replace_edit(Clause clause, const QueryAst& p, const QueryAst& c) {
  switch (clause) {
    case Clause::kSelect:
      return {{clause, EditAction::kReplace, SelectList{c.distinct, c.select}}};
    case Clause::kWhere:
      if (p.where && c.where) return {{clause, EditAction::kReplace, ConditionList{{*c.where}}}};
      break;
    case Clause::kHaving:
      if (p.having && c.having) return {{clause, EditAction::kReplace, ConditionList{{*c.having}}}};
      break;
    case Clause::kGroupBy:
      if (!p.group_by.empty() && !c.group_by.empty()) {
        return {{clause, EditAction::kReplace, ColumnList{c.group_by}}};
      }
      break;
    case Clause::kOrderBy:
      if (!p.order_by.empty() && !c.order_by.empty()) {
        return {{clause, EditAction::kReplace, OrderList{c.order_by}}};
      }
      break;
    default:
      break;
  }
  return clause_edits(clause, p, c);
}

bool differs(Clause clause, const QueryAst& p, const QueryAst& c) {
  switch (clause) {
    case Clause::kSelect: return p.distinct != c.distinct || p.select != c.select;
    case Clause::kFrom: return p.from != c.from;
    case Clause::kWhere: return p.where != c.where;
    case Clause::kGroupBy: return p.group_by != c.group_by;
    case Clause::kHaving: return p.having != c.having;
    case Clause::kOrderBy: return p.order_by != c.order_by;
    case Clause::kLimit: return p.limit != c.limit;
    case Clause::kSetOp: return p.set_op != c.set_op;
  }
  return false;
}

bool reproduces(const QueryAst& prev, const Modification& mod, const QueryAst& cur,
                const Schema& schema) {
  try {
    return recombine::apply_modification(prev, mod, schema) == cur;
  } catch (const Error&) {
    return false;
  }
}

constexpr Clause kClauses[] = {Clause::kSelect,  Clause::kFrom,    Clause::kWhere,
                               Clause::kGroupBy, Clause::kHaving,  Clause::kOrderBy,
                               Clause::kLimit,   Clause::kSetOp};

}  // namespace

DiffResult diff_asts(const QueryAst& prev, const QueryAst& cur, const Schema& schema) {
  std::vector<Clause> changed;
  for (Clause clause : kClauses) {
    if (differs(clause, prev, cur)) changed.push_back(clause);
  }
  if (changed.empty()) return NotIncremental{"identical queries"};
  if (changed.size() > 2) {
    return NotIncremental{std::to_string(changed.size()) + " clauses differ"};
  }
  const bool select_changed =
      std::find(changed.begin(), changed.end(), Clause::kSelect) != changed.end();
  if (select_changed && table_set(prev.from) != table_set(cur.from)) {
    return NotIncremental{"whole-query replacement"};
  }

  Modification mod;
  for (Clause clause : changed) {
    auto edits = clause_edits(clause, prev, cur);
    mod.edits.insert(mod.edits.end(), edits.begin(), edits.end());
  }
  sort_edits(mod.edits);
  if (reproduces(prev, mod, cur, schema)) return mod;

  mod.edits.clear();
  for (Clause clause : changed) {
    auto edits = replace_edit(clause, prev, cur);
    mod.edits.insert(mod.edits.end(), edits.begin(), edits.end());
  }
  sort_edits(mod.edits);
  if (reproduces(prev, mod, cur, schema)) return mod;
  return NotIncremental{"edits do not reproduce the current query"};
}

}  // namespace cgforge::patterns
