#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cgforge/sql/ast.hpp"
#include "cgforge/sql/printer.hpp"
#include "cgforge/sql/walk.hpp"
#include "cgforge/sql/schema.hpp"

namespace cgforge::patterns {

// Clause kinds in application order.
enum class Clause { kSelect, kFrom, kWhere, kGroupBy, kHaving, kOrderBy, kLimit, kSetOp };
enum class EditAction { kAdd, kRemove, kReplace };

std::string_view to_string(Clause c);
std::string_view to_string(EditAction a);

struct SelectList {
  bool distinct = false;
  std::vector<sql::AggExpr> items;
  friend bool operator==(const SelectList&, const SelectList&) = default;
};
// WHERE/HAVING payload. add/remove carry conjuncts; replace carries the
// whole new predicate as its single element.
struct ConditionList {
  std::vector<sql::Predicate> items;
  friend bool operator==(const ConditionList&, const ConditionList&) = default;
};
struct ColumnList {
  std::vector<sql::ColumnRef> items;
  friend bool operator==(const ColumnList&, const ColumnList&) = default;
};
struct OrderList {
  std::vector<sql::OrderItem> items;
  friend bool operator==(const OrderList&, const OrderList&) = default;
};
struct LimitValue {
  std::int64_t value = 0;
  friend bool operator==(const LimitValue&, const LimitValue&) = default;
};

using Payload =
    std::variant<SelectList, sql::FromClause, ConditionList, ColumnList, OrderList, LimitValue, sql::SetOp>;

// One clause-level edit. Semantics, per clause:
//   list clauses (select, group by, order by): add appends, remove deletes
//     the listed items (first equal occurrence), replace swaps the list;
//   where/having: add conjoins, remove deletes conjuncts, replace swaps the
//     whole predicate;
//   from: replace only;
//   limit/set-op: add requires the clause absent, remove and replace
//     require it present.
// Remove edits keep the removed subtree as payload.
struct Edit {
  Clause clause = Clause::kWhere;
  EditAction action = EditAction::kAdd;
  Payload payload;
  friend bool operator==(const Edit&, const Edit&) = default;
};

struct Modification {
  std::vector<Edit> edits;
  friend bool operator==(const Modification&, const Modification&) = default;
};

struct NotIncremental {
  std::string reason;
};

// SQL text of an edit's payload ("AIRLINES.Country = 'USA'", "LIMIT 5", ...).
// With `limit_as_slot` LIMIT counts print as `lim`.
std::string payload_sql(const Edit& e, sql::PrintOptions opts = {});
// "where add AIRLINES.Country = 'USA'"
std::string describe(const Edit& e, sql::PrintOptions opts = {});
std::string describe(const Modification& m, sql::PrintOptions opts = {});

// Walks every table, column and literal of a payload in printing order
// (see sql/walk.hpp).
template <typename P, typename V>
void walk_payload(P& payload, V& v) {
  std::visit(
      [&](auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SelectList>) {
          for (auto& item : p.items) sql::walk::agg_expr(item, v);
        } else if constexpr (std::is_same_v<T, sql::FromClause>) {
          sql::walk::from_clause(p, v);
        } else if constexpr (std::is_same_v<T, ConditionList>) {
          for (auto& item : p.items) sql::walk::predicate(item, v);
        } else if constexpr (std::is_same_v<T, ColumnList>) {
          for (auto& item : p.items) sql::walk::detail::call_column(v, item);
        } else if constexpr (std::is_same_v<T, OrderList>) {
          for (auto& item : p.items) sql::walk::order_item(item, v);
        } else if constexpr (std::is_same_v<T, sql::SetOp>) {
          sql::walk::query(*p.right, v);
        }
      },
      payload);
}

// Edits sorted into application order: by clause, removes before adds.
void sort_edits(std::vector<Edit>& edits);

}  // namespace cgforge::patterns
