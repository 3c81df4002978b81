#include "cgforge/sql/serialize.hpp"

namespace cgforge::sql {

using nlohmann::json;

namespace {

json col_unit_json(const ColUnit& u) {
  return {{"agg", u.agg}, {"distinct", u.distinct}, {"column", u.column}};
}

ColUnit col_unit_from(const json& j) {
  ColUnit u;
  u.agg = j.at("agg").get<Agg>();
  u.distinct = j.at("distinct").get<bool>();
  u.column = j.at("column").get<ColumnRef>();
  return u;
}

}  // namespace

void to_json(json& j, const ColumnRef& c) { j = json::array({c.table, c.column}); }

void from_json(const json& j, ColumnRef& c) {
  c.table = j.at(0).get<std::string>();
  c.column = j.at(1).get<std::string>();
}

void to_json(json& j, const AggExpr& e) {
  j = {{"agg", e.agg}, {"distinct", e.distinct}, {"left", col_unit_json(e.value.left)}};
  if (e.value.op) {
    j["op"] = *e.value.op;
    j["right"] = col_unit_json(e.value.right);
  }
}

void from_json(const json& j, AggExpr& e) {
  e.agg = j.at("agg").get<Agg>();
  e.distinct = j.at("distinct").get<bool>();
  e.value.left = col_unit_from(j.at("left"));
  if (j.contains("op")) {
    e.value.op = j.at("op").get<ArithOp>();
    e.value.right = col_unit_from(j.at("right"));
  }
}

void to_json(json& j, const Value& v) {
  static const char* kinds[] = {"string", "number", "placeholder"};
  j = {{"kind", kinds[static_cast<int>(v.kind)]}, {"raw", v.raw}};
}

void from_json(const json& j, Value& v) {
  const auto kind = j.at("kind").get<std::string>();
  v.kind = kind == "string"   ? Value::Kind::kString
           : kind == "number" ? Value::Kind::kNumber
                              : Value::Kind::kPlaceholder;
  v.raw = j.at("raw").get<std::string>();
}

void to_json(json& j, const Predicate& p) {
  if (p.kind != Connective::kLeaf) {
    j = {{"kind", p.kind}, {"children", p.children}};
    return;
  }
  const Condition& c = p.condition;
  j = {{"kind", p.kind}, {"left", c.left}, {"op", c.op}};
  if (auto* v = std::get_if<Value>(&c.right)) {
    j["value"] = *v;
  } else if (auto* col = std::get_if<ColumnRef>(&c.right)) {
    j["column"] = *col;
  } else {
    j["query"] = *std::get<Box<Query>>(c.right);
  }
  if (c.upper) j["upper"] = *c.upper;
}

void from_json(const json& j, Predicate& p) {
  p = Predicate{};
  p.kind = j.at("kind").get<Connective>();
  if (p.kind != Connective::kLeaf) {
    p.children = j.at("children").get<std::vector<Predicate>>();
    return;
  }
  Condition& c = p.condition;
  c.left = j.at("left").get<AggExpr>();
  c.op = j.at("op").get<CompareOp>();
  if (j.contains("value")) {
    c.right = j.at("value").get<Value>();
  } else if (j.contains("column")) {
    c.right = j.at("column").get<ColumnRef>();
  } else {
    c.right = Box<Query>(j.at("query").get<Query>());
  }
  if (j.contains("upper")) c.upper = j.at("upper").get<Value>();
}

void to_json(json& j, const FromClause& f) {
  json tables = json::array();
  for (const auto& t : f.tables) {
    if (t.subquery) {
      tables.push_back({{"query", **t.subquery}});
    } else {
      tables.push_back({{"table", t.table}});
    }
  }
  json joins = json::array();
  for (const auto& jc : f.joins) joins.push_back(json::array({jc.left, jc.right}));
  j = {{"tables", tables}, {"joins", joins}};
}

void from_json(const json& j, FromClause& f) {
  f = FromClause{};
  for (const auto& t : j.at("tables")) {
    TableRef ref;
    if (t.contains("query")) {
      ref.subquery = Box<Query>(t.at("query").get<Query>());
    } else {
      ref.table = t.at("table").get<std::string>();
    }
    f.tables.push_back(std::move(ref));
  }
  for (const auto& jc : j.at("joins")) {
    f.joins.push_back({jc.at(0).get<ColumnRef>(), jc.at(1).get<ColumnRef>()});
  }
}

void to_json(json& j, const OrderItem& o) { j = {{"expr", o.expr}, {"desc", o.descending}}; }

void from_json(const json& j, OrderItem& o) {
  o.expr = j.at("expr").get<AggExpr>();
  o.descending = j.at("desc").get<bool>();
}

void to_json(json& j, const SetOp& s) { j = {{"kind", s.kind}, {"right", *s.right}}; }

void from_json(const json& j, SetOp& s) {
  s.kind = j.at("kind").get<SetOpKind>();
  s.right = Box<Query>(j.at("right").get<Query>());
}

void to_json(json& j, const Query& q) {
  j = {{"distinct", q.distinct}, {"select", q.select}, {"from", q.from},
       {"group_by", q.group_by}, {"order_by", q.order_by}};
  if (q.where) j["where"] = *q.where;
  if (q.having) j["having"] = *q.having;
  if (q.limit) j["limit"] = *q.limit;
  if (q.set_op) j["set_op"] = *q.set_op;
}

void from_json(const json& j, Query& q) {
  q = Query{};
  q.distinct = j.at("distinct").get<bool>();
  q.select = j.at("select").get<std::vector<AggExpr>>();
  q.from = j.at("from").get<FromClause>();
  q.group_by = j.at("group_by").get<std::vector<ColumnRef>>();
  q.order_by = j.at("order_by").get<std::vector<OrderItem>>();
  if (j.contains("where")) q.where = j.at("where").get<Predicate>();
  if (j.contains("having")) q.having = j.at("having").get<Predicate>();
  if (j.contains("limit")) q.limit = j.at("limit").get<std::int64_t>();
  if (j.contains("set_op")) q.set_op = j.at("set_op").get<SetOp>();
}

}  // namespace cgforge::sql
