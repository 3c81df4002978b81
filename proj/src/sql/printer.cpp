#include "cgforge/sql/printer.hpp"

#include <variant>

namespace cgforge::sql {

std::string_view to_string(Agg a) {
  switch (a) {
    case Agg::kNone: return "none";
    case Agg::kCount: return "count";
    case Agg::kSum: return "sum";
    case Agg::kAvg: return "avg";
    case Agg::kMin: return "min";
    case Agg::kMax: return "max";
  }
  return "none";
}

std::string_view to_string(ArithOp op) {
  switch (op) {
    case ArithOp::kAdd: return "+";
    case ArithOp::kSub: return "-";
    case ArithOp::kMul: return "*";
    case ArithOp::kDiv: return "/";
  }
  return "+";
}

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::kEq: return "=";
    case CompareOp::kNe: return "!=";
    case CompareOp::kGt: return ">";
    case CompareOp::kLt: return "<";
    case CompareOp::kGe: return ">=";
    case CompareOp::kLe: return "<=";
    case CompareOp::kLike: return "LIKE";
    case CompareOp::kNotLike: return "NOT LIKE";
    case CompareOp::kIn: return "IN";
    case CompareOp::kNotIn: return "NOT IN";
    case CompareOp::kBetween: return "BETWEEN";
  }
  return "=";
}

std::string_view to_string(SetOpKind k) {
  switch (k) {
    case SetOpKind::kUnion: return "UNION";
    case SetOpKind::kIntersect: return "INTERSECT";
    case SetOpKind::kExcept: return "EXCEPT";
  }
  return "UNION";
}

namespace {

std::string print_col_unit(const ColUnit& u, PrintOptions opts) {
  std::string col = print(u.column, opts);
  if (u.agg == Agg::kNone) return u.distinct ? "DISTINCT " + col : col;
  std::string out(to_string(u.agg));
  out += '(';
  if (u.distinct) out += "DISTINCT ";
  out += col;
  out += ')';
  return out;
}

std::string print_val_unit(const ValUnit& v, PrintOptions opts) {
  std::string out = print_col_unit(v.left, opts);
  if (v.op) {
    out += ' ';
    out += to_string(*v.op);
    out += ' ';
    out += print_col_unit(v.right, opts);
  }
  return out;
}

std::string quote(const std::string& raw) {
  std::string out = "'";
  for (char c : raw) {
    if (c == '\'') out += '\'';
    out += c;
  }
  out += '\'';
  return out;
}

}  // namespace

std::string print(const ColumnRef& c, PrintOptions opts) {
  if (c.is_star()) return "*";
  if (opts.erase_names) return "c";
  if (c.table.empty()) return c.column;
  return c.table + "." + c.column;
}

std::string print(const AggExpr& e, PrintOptions opts) {
  if (e.agg == Agg::kNone) return print_val_unit(e.value, opts);
  std::string out(to_string(e.agg));
  out += '(';
  if (e.distinct) out += "DISTINCT ";
  out += print_val_unit(e.value, opts);
  out += ')';
  return out;
}

std::string print(const Value& v, PrintOptions opts) {
  if (opts.erase_names) return "?";
  switch (v.kind) {
    case Value::Kind::kString: return quote(v.raw);
    case Value::Kind::kNumber: return v.raw;
    case Value::Kind::kPlaceholder: return v.raw.empty() ? "?" : v.raw;
  }
  return "?";
}

std::string print(const Condition& c, PrintOptions opts) {
  std::string out = print(c.left, opts);
  out += ' ';
  out += to_string(c.op);
  out += ' ';
  std::visit(
      [&](const auto& operand) {
        using T = std::decay_t<decltype(operand)>;
        if constexpr (std::is_same_v<T, Value>) {
          out += print(operand, opts);
        } else if constexpr (std::is_same_v<T, ColumnRef>) {
          out += print(operand, opts);
        } else {
          out += '(' + print_sql(*operand, opts) + ')';
        }
      },
      c.right);
  if (c.op == CompareOp::kBetween && c.upper) {
    out += " AND ";
    out += print(*c.upper, opts);
  }
  return out;
}

std::string print(const Predicate& p, PrintOptions opts) {
  if (p.kind == Connective::kLeaf) return print(p.condition, opts);
  const bool is_and = p.kind == Connective::kAnd;
  std::string out;
  for (std::size_t i = 0; i < p.children.size(); ++i) {
    if (i) out += is_and ? " AND " : " OR ";
    const auto& child = p.children[i];
    // OR binds looser than AND; AND under OR needs no parentheses.
    if (is_and && child.kind == Connective::kOr) {
      out += '(' + print(child, opts) + ')';
    } else {
      out += print(child, opts);
    }
  }
  return out;
}

std::string print(const FromClause& f, PrintOptions opts) {
  std::string out;
  for (std::size_t i = 0; i < f.tables.size(); ++i) {
    if (i) out += " JOIN ";
    const auto& t = f.tables[i];
    if (t.subquery) {
      out += '(' + print_sql(**t.subquery, opts) + ')';
    } else {
      out += opts.erase_names ? "t" : t.table;
    }
  }
  for (std::size_t i = 0; i < f.joins.size(); ++i) {
    out += i ? " AND " : " ON ";
    out += print(f.joins[i].left, opts) + " = " + print(f.joins[i].right, opts);
  }
  return out;
}

std::string print(const OrderItem& o, PrintOptions opts) {
  return print(o.expr, opts) + (o.descending ? " DESC" : " ASC");
}

std::string print_sql(const Query& q, PrintOptions opts) {
  std::string out = "SELECT ";
  if (q.distinct) out += "DISTINCT ";
  for (std::size_t i = 0; i < q.select.size(); ++i) {
    if (i) out += ", ";
    out += print(q.select[i], opts);
  }
  out += " FROM " + print(q.from, opts);
  if (q.where) out += " WHERE " + print(*q.where, opts);
  if (!q.group_by.empty()) {
    out += " GROUP BY ";
    for (std::size_t i = 0; i < q.group_by.size(); ++i) {
      if (i) out += ", ";
      out += print(q.group_by[i], opts);
    }
  }
  if (q.having) out += " HAVING " + print(*q.having, opts);
  if (!q.order_by.empty()) {
    out += " ORDER BY ";
    for (std::size_t i = 0; i < q.order_by.size(); ++i) {
      if (i) out += ", ";
      out += print(q.order_by[i], opts);
    }
  }
  if (q.limit) {
    out += " LIMIT ";
    out += opts.erase_names ? "?" : opts.limit_as_slot ? "lim" : std::to_string(*q.limit);
  }
  if (q.set_op) {
    out += ' ';
    out += to_string(q.set_op->kind);
    out += ' ';
    out += print_sql(*q.set_op->right, opts);
  }
  return out;
}

}  // namespace cgforge::sql
