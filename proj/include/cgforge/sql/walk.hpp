#pragma once

#include <type_traits>
#include <variant>

#include "cgforge/sql/ast.hpp"

// Generic traversal over query trees and clause fragments. A visitor
// provides any subset of:
//   void table(S& name)            -- every FROM table name
//   void column(C& ref)            -- every column reference (incl. star)
//   void value(V& v)               -- every literal
//   void join(J& jc)               -- every join condition, before its columns
// where S/C/V/J are const-qualified when walking a const tree. The order
// of callbacks matches printing order, so slot numbering derived from a
// walk is deterministic and agrees with the rendered text.
namespace cgforge::sql::walk {

namespace detail {
template <typename V, typename T>
void call_table(V& v, T& name) {
  if constexpr (requires { v.table(name); }) v.table(name);
}
template <typename V, typename T>
void call_column(V& v, T& c) {
  if constexpr (requires { v.column(c); }) v.column(c);
}
template <typename V, typename T>
void call_value(V& v, T& x) {
  if constexpr (requires { v.value(x); }) v.value(x);
}
template <typename V, typename T>
bool call_join(V& v, T& j) {
  if constexpr (requires { { v.join(j) } -> std::same_as<bool>; }) {
    return v.join(j);
  } else if constexpr (requires { v.join(j); }) {
    v.join(j);
  }
  return false;
}
template <typename T, typename U>
using like_t = std::conditional_t<std::is_const_v<T>, const U, U>;
}  // namespace detail

template <typename Q, typename V>
void query(Q& q, V& v);

template <typename C, typename V>
void col_unit(C& c, V& v) {
  detail::call_column(v, c.column);
}

template <typename C, typename V>
void val_unit(C& u, V& v) {
  col_unit(u.left, v);
  if (u.op) col_unit(u.right, v);
}

template <typename E, typename V>
void agg_expr(E& e, V& v) {
  val_unit(e.value, v);
}

template <typename C, typename V>
void condition(C& c, V& v) {
  agg_expr(c.left, v);
  std::visit(
      [&](auto& operand) {
        using T = std::decay_t<decltype(operand)>;
        if constexpr (std::is_same_v<T, Value>) {
          detail::call_value(v, operand);
        } else if constexpr (std::is_same_v<T, ColumnRef>) {
          detail::call_column(v, operand);
        } else {
          query(*operand, v);
        }
      },
      c.right);
  if (c.upper) detail::call_value(v, *c.upper);
}

template <typename P, typename V>
void predicate(P& p, V& v) {
  if (p.kind == Connective::kLeaf) {
    condition(p.condition, v);
    return;
  }
  for (auto& child : p.children) predicate(child, v);
}

template <typename F, typename V>
void from_clause(F& f, V& v) {
  for (auto& t : f.tables) {
    if (t.subquery) {
      query(**t.subquery, v);
    } else {
      detail::call_table(v, t.table);
    }
  }
  for (auto& j : f.joins) {
    // A visitor's join() may return true to claim the condition's columns.
    if (!detail::call_join(v, j)) {
      detail::call_column(v, j.left);
      detail::call_column(v, j.right);
    }
  }
}

template <typename O, typename V>
void order_item(O& o, V& v) {
  agg_expr(o.expr, v);
}

template <typename Q, typename V>
void query(Q& q, V& v) {
  for (auto& item : q.select) agg_expr(item, v);
  from_clause(q.from, v);
  if (q.where) predicate(*q.where, v);
  for (auto& c : q.group_by) detail::call_column(v, c);
  if (q.having) predicate(*q.having, v);
  for (auto& o : q.order_by) order_item(o, v);
  if (q.set_op) query(*q.set_op->right, v);
}

}  // namespace cgforge::sql::walk
