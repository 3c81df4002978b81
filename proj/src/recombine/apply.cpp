#include "cgforge/recombine/apply.hpp"

#include <algorithm>

#include "cgforge/core/error.hpp"
#include "cgforge/sql/parser.hpp"

namespace cgforge::recombine {

using namespace patterns;

namespace {

template <typename T>
void remove_items(std::vector<T>& list, const std::vector<T>& items, Clause clause) {
  for (const auto& item : items) {
    auto it = std::find(list.begin(), list.end(), item);
    if (it == list.end()) {
      throw ApplyError(std::string("cannot remove absent item from ") +
                       std::string(to_string(clause)));
    }
    list.erase(it);
  }
}

template <typename T>
const T& payload_as(const Edit& e) {
  const T* p = std::get_if<T>(&e.payload);
  if (!p) {
    throw ApplyError(std::string("payload does not match clause ") +
                     std::string(to_string(e.clause)));
  }
  return *p;
}

template <typename T>
void apply_list(std::vector<T>& list, const Edit& e, const std::vector<T>& items) {
  switch (e.action) {
    case EditAction::kAdd:
      list.insert(list.end(), items.begin(), items.end());
      break;
    case EditAction::kRemove:
      remove_items(list, items, e.clause);
      break;
    case EditAction::kReplace:
      if (list.empty()) {
        throw ApplyError(std::string("cannot replace absent ") + std::string(to_string(e.clause)));
      }
      list = items;
      break;
  }
}

void apply_predicate(std::optional<sql::Predicate>& slot, const Edit& e) {
  const auto& items = payload_as<ConditionList>(e).items;
  switch (e.action) {
    case EditAction::kAdd: {
      std::vector<sql::Predicate> parts = slot ? sql::conjuncts(*slot) : std::vector<sql::Predicate>{};
      parts.insert(parts.end(), items.begin(), items.end());
      slot = sql::conjoin(std::move(parts));
      break;
    }
    case EditAction::kRemove: {
      if (!slot) {
        throw ApplyError(std::string("cannot remove from absent ") +
                         std::string(to_string(e.clause)));
      }
      std::vector<sql::Predicate> parts = sql::conjuncts(*slot);
      remove_items(parts, items, e.clause);
      slot = sql::conjoin(std::move(parts));
      break;
    }
    case EditAction::kReplace:
      if (!slot) {
        throw ApplyError(std::string("cannot replace absent ") + std::string(to_string(e.clause)));
      }
      slot = sql::conjoin(items);
      break;
  }
}

void apply_edit(QueryAst& q, const Edit& e) {
  switch (e.clause) {
    case Clause::kSelect: {
      const auto& p = payload_as<SelectList>(e);
      apply_list(q.select, e, p.items);
      if (e.action == EditAction::kReplace) q.distinct = p.distinct;
      break;
    }
    case Clause::kFrom:
      if (e.action != EditAction::kReplace) throw ApplyError("FROM supports replace only");
      q.from = payload_as<sql::FromClause>(e);
      break;
    case Clause::kWhere:
      apply_predicate(q.where, e);
      break;
    case Clause::kHaving:
      apply_predicate(q.having, e);
      break;
    case Clause::kGroupBy:
      apply_list(q.group_by, e, payload_as<ColumnList>(e).items);
      break;
    case Clause::kOrderBy:
      apply_list(q.order_by, e, payload_as<OrderList>(e).items);
      break;
    case Clause::kLimit: {
      const auto value = payload_as<LimitValue>(e).value;
      if (e.action == EditAction::kAdd) {
        if (q.limit) throw ApplyError("LIMIT already present");
        q.limit = value;
      } else if (!q.limit) {
        throw ApplyError("no LIMIT to change");
      } else if (e.action == EditAction::kRemove) {
        q.limit.reset();
      } else {
        q.limit = value;
      }
      break;
    }
    case Clause::kSetOp: {
      const auto& p = payload_as<sql::SetOp>(e);
      if (e.action == EditAction::kAdd) {
        if (q.set_op) throw ApplyError("set operation already present");
        q.set_op = p;
      } else if (!q.set_op) {
        throw ApplyError("no set operation to change");
      } else if (e.action == EditAction::kRemove) {
        if (!(*q.set_op == p)) throw ApplyError("cannot remove a different set operation");
        q.set_op.reset();
      } else {
        q.set_op = p;
      }
      break;
    }
  }
}

}  // namespace

QueryAst apply_modification(const QueryAst& base, const Modification& mod, const Schema& schema) {
  if (mod.edits.empty()) throw ApplyError("modification without edits");
  QueryAst q = base;
  for (const Edit& e : mod.edits) apply_edit(q, e);
  if (q.select.empty()) throw ApplyError("modification leaves an empty select list");
  sql::canonicalize(q);
  if (auto violation = sql::find_violation(q, schema)) throw ApplyError(*violation);
  return q;
}

}  // namespace cgforge::recombine
