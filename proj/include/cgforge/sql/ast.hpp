#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cgforge/core/box.hpp"

namespace cgforge::sql {

enum class Agg { kNone, kCount, kSum, kAvg, kMin, kMax };
enum class ArithOp { kAdd, kSub, kMul, kDiv };
enum class CompareOp { kEq, kNe, kGt, kLt, kGe, kLe, kLike, kNotLike, kIn, kNotIn, kBetween };
enum class Connective { kLeaf, kAnd, kOr };
enum class SetOpKind { kUnion, kIntersect, kExcept };

std::string_view to_string(Agg a);
std::string_view to_string(ArithOp op);
std::string_view to_string(CompareOp op);
std::string_view to_string(SetOpKind k);

// After resolution `table` holds the schema's spelling of the owning table
// and `column` the schema's spelling of the column. The star column has an
// empty table.
struct ColumnRef {
  std::string table;
  std::string column;

  bool is_star() const { return column == "*"; }
  static ColumnRef star() { return {"", "*"}; }
  friend bool operator==(const ColumnRef&, const ColumnRef&) = default;
  friend auto operator<=>(const ColumnRef&, const ColumnRef&) = default;
};

struct ColUnit {
  Agg agg = Agg::kNone;
  bool distinct = false;
  ColumnRef column;
  friend bool operator==(const ColUnit&, const ColUnit&) = default;
};

// A column unit or a single binary arithmetic over two column units.
struct ValUnit {
  ColUnit left;
  std::optional<ArithOp> op;
  ColUnit right;  // meaningful only when op is set
  friend bool operator==(const ValUnit&, const ValUnit&) = default;
};

// `agg(DISTINCT value)` or a bare value unit. Used for select items,
// condition left-hand sides and order-by keys.
struct AggExpr {
  Agg agg = Agg::kNone;
  bool distinct = false;
  ValUnit value;

  static AggExpr of(ColumnRef c, Agg agg = Agg::kNone) {
    AggExpr e;
    e.agg = agg;
    e.value.left.column = std::move(c);
    return e;
  }
  friend bool operator==(const AggExpr&, const AggExpr&) = default;
};

struct Value {
  enum class Kind { kString, kNumber, kPlaceholder };
  Kind kind = Kind::kPlaceholder;
  std::string raw;  // unquoted text for strings, literal text for numbers

  static Value string(std::string s) { return {Kind::kString, std::move(s)}; }
  static Value number(std::string s) { return {Kind::kNumber, std::move(s)}; }
  static Value placeholder() { return {Kind::kPlaceholder, {}}; }
  friend bool operator==(const Value&, const Value&) = default;
  friend auto operator<=>(const Value&, const Value&) = default;
};

struct Query;

using Operand = std::variant<Value, ColumnRef, Box<Query>>;

struct Condition {
  AggExpr left;
  CompareOp op = CompareOp::kEq;
  Operand right;
  std::optional<Value> upper;  // second bound of BETWEEN

  bool has_subquery() const { return std::holds_alternative<Box<Query>>(right); }
  friend bool operator==(const Condition&, const Condition&) = default;
};

// Boolean tree. Canonical form: AND/OR nodes are flattened (no child shares
// its parent's connective) and children are sorted by a name-independent
// shape key, then by printed text.
struct Predicate {
  Connective kind = Connective::kLeaf;
  Condition condition;              // kLeaf only
  std::vector<Predicate> children;  // kAnd / kOr only

  static Predicate leaf(Condition c) {
    Predicate p;
    p.condition = std::move(c);
    return p;
  }
  friend bool operator==(const Predicate&, const Predicate&) = default;
};

struct JoinCondition {
  ColumnRef left;
  ColumnRef right;
  friend bool operator==(const JoinCondition&, const JoinCondition&) = default;
};

struct TableRef {
  std::string table;  // empty for derived tables
  std::optional<Box<Query>> subquery;
  std::string alias;  // parse-time only; empty once resolved

  bool is_subquery() const { return subquery.has_value(); }
  friend bool operator==(const TableRef&, const TableRef&) = default;
};

struct FromClause {
  std::vector<TableRef> tables;
  std::vector<JoinCondition> joins;
  friend bool operator==(const FromClause&, const FromClause&) = default;
};

struct OrderItem {
  AggExpr expr;
  bool descending = false;
  friend bool operator==(const OrderItem&, const OrderItem&) = default;
};

struct SetOp {
  SetOpKind kind = SetOpKind::kUnion;
  Box<Query> right;
  friend bool operator==(const SetOp&, const SetOp&) = default;
};

struct Query {
  bool distinct = false;
  std::vector<AggExpr> select;
  FromClause from;
  std::optional<Predicate> where;
  std::vector<ColumnRef> group_by;
  std::optional<Predicate> having;
  std::vector<OrderItem> order_by;
  std::optional<std::int64_t> limit;
  std::optional<SetOp> set_op;

  friend bool operator==(const Query&, const Query&) = default;
};

// Conjuncts of a predicate: the children of a top-level AND, else the
// predicate itself.
std::vector<Predicate> conjuncts(const Predicate& p);
// Inverse of conjuncts(); returns nullopt for an empty list.
std::optional<Predicate> conjoin(std::vector<Predicate> parts);

// Flattens nested same-connective nodes and sorts children into canonical
// order, recursively (including nested queries).
void canonicalize(Predicate& p);
void canonicalize(Query& q);

}  // namespace cgforge::sql

namespace cgforge {
using QueryAst = sql::Query;
}
