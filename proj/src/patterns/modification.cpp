#include "cgforge/patterns/modification.hpp"

#include <algorithm>

#include "cgforge/core/text.hpp"
#include "cgforge/sql/printer.hpp"

namespace cgforge::patterns {

std::string_view to_string(Clause c) {
  switch (c) {
    case Clause::kSelect: return "select";
    case Clause::kFrom: return "from";
    case Clause::kWhere: return "where";
    case Clause::kGroupBy: return "group_by";
    case Clause::kHaving: return "having";
    case Clause::kOrderBy: return "order_by";
    case Clause::kLimit: return "limit";
    case Clause::kSetOp: return "set_op";
  }
  return "where";
}

std::string_view to_string(EditAction a) {
  switch (a) {
    case EditAction::kAdd: return "add";
    case EditAction::kRemove: return "remove";
    case EditAction::kReplace: return "replace";
  }
  return "add";
}

std::string payload_sql(const Edit& e, sql::PrintOptions opts) {
  return std::visit(
      [&](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        std::vector<std::string> parts;
        if constexpr (std::is_same_v<T, SelectList>) {
          for (const auto& item : p.items) parts.push_back(sql::print(item, opts));
          return std::string(p.distinct ? "DISTINCT " : "") + text::join(parts, ", ");
        } else if constexpr (std::is_same_v<T, sql::FromClause>) {
          return sql::print(p, opts);
        } else if constexpr (std::is_same_v<T, ConditionList>) {
          for (const auto& item : p.items) {
            const bool wrap = item.kind == sql::Connective::kOr && p.items.size() > 1;
            parts.push_back(wrap ? "(" + sql::print(item, opts) + ")" : sql::print(item, opts));
          }
          return text::join(parts, " AND ");
        } else if constexpr (std::is_same_v<T, ColumnList>) {
          for (const auto& item : p.items) parts.push_back(sql::print(item, opts));
          return text::join(parts, ", ");
        } else if constexpr (std::is_same_v<T, OrderList>) {
          for (const auto& item : p.items) parts.push_back(sql::print(item, opts));
          return text::join(parts, ", ");
        } else if constexpr (std::is_same_v<T, LimitValue>) {
          return opts.limit_as_slot ? std::string("lim") : std::to_string(p.value);
        } else {
          return std::string(sql::to_string(p.kind)) + " " + sql::print_sql(*p.right, opts);
        }
      },
      e.payload);
}

std::string describe(const Edit& e, sql::PrintOptions opts) {
  return std::string(to_string(e.clause)) + " " + std::string(to_string(e.action)) + " " +
         payload_sql(e, opts);
}

std::string describe(const Modification& m, sql::PrintOptions opts) {
  std::vector<std::string> parts;
  for (const auto& e : m.edits) parts.push_back(describe(e, opts));
  return text::join(parts, "; ");
}

void sort_edits(std::vector<Edit>& edits) {
  auto rank = [](EditAction a) {
    switch (a) {
      case EditAction::kRemove: return 0;
      case EditAction::kReplace: return 1;
      case EditAction::kAdd: return 2;
    }
    return 0;
  };
  std::stable_sort(edits.begin(), edits.end(), [&](const Edit& a, const Edit& b) {
    if (a.clause != b.clause) return a.clause < b.clause;
    return rank(a.action) < rank(b.action);
  });
}

}  // namespace cgforge::patterns
