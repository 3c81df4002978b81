#include <algorithm>
#include <cctype>

#include "cgforge/core/error.hpp"
#include "cgforge/core/text.hpp"
#include "cgforge/draft/drafter.hpp"
#include "cgforge/sql/printer.hpp"

namespace cgforge::draft {

using patterns::Clause;
using patterns::EditAction;

namespace {

class Phrases {
 public:
  explicit Phrases(const Schema& schema) : schema_(schema) {}

  std::string table(const std::string& name) const {
    if (auto t = schema_.find_table(name)) {
      const auto i = static_cast<std::size_t>(*t);
      if (i < schema_.table_display_names.size() && !schema_.table_display_names[i].empty()) {
        return text::to_lower(schema_.table_display_names[i]);
      }
    }
    return humanize(name);
  }

  std::string column(const sql::ColumnRef& c) const {
    if (c.is_star()) return "records";
    if (auto t = schema_.find_table(c.table)) {
      if (auto col = schema_.find_column(*t, c.column)) {
        const auto& sc = schema_.columns[static_cast<std::size_t>(*col)];
        if (!sc.display_name.empty()) return text::to_lower(sc.display_name);
      }
    }
    return humanize(c.column);
  }

  std::string col_unit(const sql::ColUnit& u) const { return aggregate(u.agg, u.distinct, column(u.column)); }

  std::string expr(const sql::AggExpr& e) const {
    std::string inner = col_unit(e.value.left);
    if (e.value.op) {
      static const std::map<sql::ArithOp, std::string> ops = {{sql::ArithOp::kAdd, " plus "},
                                                              {sql::ArithOp::kSub, " minus "},
                                                              {sql::ArithOp::kMul, " times "},
                                                              {sql::ArithOp::kDiv, " divided by "}};
      inner += ops.at(*e.value.op) + col_unit(e.value.right);
    }
    return aggregate(e.agg, e.distinct, inner);
  }

  static std::string value(const sql::Value& v) {
    if (v.kind == sql::Value::Kind::kPlaceholder) return "a given value";
    std::string raw = v.raw;
    raw.erase(std::remove(raw.begin(), raw.end(), '%'), raw.end());
    return raw;
  }

  std::string condition(const sql::Condition& c) const {
    const std::string lhs = expr(c.left);
    std::string rhs;
    if (const auto* v = std::get_if<sql::Value>(&c.right)) {
      rhs = value(*v);
    } else if (const auto* col = std::get_if<sql::ColumnRef>(&c.right)) {
      rhs = column(*col);
    } else {
      rhs = query(*std::get<Box<sql::Query>>(c.right));
    }
    switch (c.op) {
      case sql::CompareOp::kEq: return lhs + " is " + rhs;
      case sql::CompareOp::kNe: return lhs + " is not " + rhs;
      case sql::CompareOp::kGt: return lhs + " is greater than " + rhs;
      case sql::CompareOp::kLt: return lhs + " is less than " + rhs;
      case sql::CompareOp::kGe: return lhs + " is at least " + rhs;
      case sql::CompareOp::kLe: return lhs + " is at most " + rhs;
      case sql::CompareOp::kLike: return lhs + " contains " + rhs;
      case sql::CompareOp::kNotLike: return lhs + " does not contain " + rhs;
      case sql::CompareOp::kIn: return lhs + " is among " + rhs;
      case sql::CompareOp::kNotIn: return lhs + " is not among " + rhs;
      case sql::CompareOp::kBetween:
        return lhs + " is between " + rhs + " and " + value(c.upper.value_or(sql::Value::placeholder()));
    }
    return lhs;
  }

  std::string predicate(const sql::Predicate& p) const {
    if (p.kind == sql::Connective::kLeaf) return condition(p.condition);
    std::vector<std::string> parts;
    for (const auto& c : p.children) parts.push_back(predicate(c));
    return text::join(parts, p.kind == sql::Connective::kAnd ? " and " : " or ");
  }

  std::string conditions(const std::vector<sql::Predicate>& items) const {
    std::vector<std::string> parts;
    for (const auto& p : items) parts.push_back(predicate(p));
    return text::join(parts, " and ");
  }

  std::string tables(const sql::FromClause& f) const {
    std::vector<std::string> parts;
    for (const auto& t : f.tables) parts.push_back(t.is_subquery() ? query(**t.subquery) : table(t.table));
    return list(parts);
  }

  // "the airline of airlines where country is USA"
  std::string query(const sql::Query& q) const {
    std::vector<std::string> cols;
    for (const auto& e : q.select) cols.push_back(expr(e));
    std::string out = "the " + list(cols) + " of " + tables(q.from);
    if (q.where) out += " where " + predicate(*q.where);
    return out;
  }

  std::string order(const sql::OrderItem& o) const {
    return expr(o.expr) + (o.descending ? " in descending order" : " in ascending order");
  }

  static std::string list(const std::vector<std::string>& parts) {
    if (parts.size() <= 1) return parts.empty() ? std::string() : parts[0];
    std::vector<std::string> head(parts.begin(), parts.end() - 1);
    return text::join(head, ", ") + " and " + parts.back();
  }

 private:
  static std::string humanize(std::string name) {
    std::replace(name.begin(), name.end(), '_', ' ');
    return text::to_lower(name);
  }

  static std::string aggregate(sql::Agg agg, bool distinct, const std::string& inner) {
    const std::string d = distinct ? "different " : "";
    switch (agg) {
      case sql::Agg::kNone: return d + inner;
      case sql::Agg::kCount: return "the number of " + d + inner;
      case sql::Agg::kSum: return "the total " + d + inner;
      case sql::Agg::kAvg: return "the average " + d + inner;
      case sql::Agg::kMin: return "the minimum " + d + inner;
      case sql::Agg::kMax: return "the maximum " + d + inner;
    }
    return inner;
  }

  const Schema& schema_;
};

template <typename T>
const T& payload(const patterns::Edit& e) {
  const T* p = std::get_if<T>(&e.payload);
  if (!p) throw UnrealizableEdit("payload does not match clause in " + patterns::describe(e));
  return *p;
}

std::string sentence(const patterns::Edit& e, const Phrases& ph) {
  const bool add = e.action == EditAction::kAdd;
  const bool remove = e.action == EditAction::kRemove;
  switch (e.clause) {
    case Clause::kSelect: {
      const auto& p = payload<patterns::SelectList>(e);
      std::vector<std::string> cols;
      for (const auto& item : p.items) cols.push_back(ph.expr(item));
      if (add) return "Also show their " + Phrases::list(cols) + ".";
      if (remove) return "Don't show their " + Phrases::list(cols) + ".";
      return std::string("Instead, show ") + (p.distinct ? "the different " : "") + Phrases::list(cols) + ".";
    }
    case Clause::kFrom:
      return "Look at " + ph.tables(payload<sql::FromClause>(e)) + " instead.";
    case Clause::kWhere: {
      const auto conds = ph.conditions(payload<patterns::ConditionList>(e).items);
      if (add) return "Only show the ones where " + conds + ".";
      if (remove) return "Don't require that " + conds + " anymore.";
      return "Instead, only show the ones where " + conds + ".";
    }
    case Clause::kGroupBy: {
      std::vector<std::string> cols;
      for (const auto& c : payload<patterns::ColumnList>(e).items) cols.push_back(ph.column(c));
      if (add) return "Group the results by " + Phrases::list(cols) + ".";
      if (remove) return "Stop grouping the results by " + Phrases::list(cols) + ".";
      return "Instead, group the results by " + Phrases::list(cols) + ".";
    }
    case Clause::kHaving: {
      const auto conds = ph.conditions(payload<patterns::ConditionList>(e).items);
      if (add) return "Only keep the groups where " + conds + ".";
      if (remove) return "Keep all groups, even those where " + conds + " does not hold.";
      return "Instead, only keep the groups where " + conds + ".";
    }
    case Clause::kOrderBy: {
      std::vector<std::string> items;
      for (const auto& o : payload<patterns::OrderList>(e).items) items.push_back(ph.order(o));
      if (add) return "Sort the results by " + Phrases::list(items) + ".";
      if (remove) return "Don't sort the results.";
      return "Instead, sort the results by " + Phrases::list(items) + ".";
    }
    case Clause::kLimit: {
      const auto n = std::to_string(payload<patterns::LimitValue>(e).value);
      if (add) return "Just show the top " + n + ".";
      if (remove) return "Show all of them, not just the top " + n + ".";
      return "Instead, just show the top " + n + ".";
    }
    case Clause::kSetOp: {
      const auto& s = payload<sql::SetOp>(e);
      if (remove) return "Drop the part about " + ph.query(*s.right) + ".";
      const std::string lead = add ? "" : "Instead, ";
      switch (s.kind) {
        case sql::SetOpKind::kUnion:
          return lead + (add ? "Also" : "also") + " include " + ph.query(*s.right) + ".";
        case sql::SetOpKind::kIntersect:
          return lead + (add ? "Only" : "only") + " keep the ones that also appear in " + ph.query(*s.right) + ".";
        case sql::SetOpKind::kExcept:
          return lead + (add ? "Exclude" : "exclude") + " the ones that appear in " + ph.query(*s.right) + ".";
      }
      break;
    }
  }
  throw UnrealizableEdit("no realization for " + patterns::describe(e));
}

}  // namespace

std::string draft_rule_based(const DraftRequest& req, const Schema& schema) {
  if (req.modification.edits.empty()) throw UnrealizableEdit("modification without edits");
  const Phrases ph(schema);
  std::string out;
  for (const auto& e : req.modification.edits) {
    std::string s = sentence(e, ph);
    if (out.empty()) {
      out = s;
      continue;
    }
    out.pop_back();  // trailing period
    if (!s.empty()) s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
    out += " and also " + s;
  }
  return out;
}

}  // namespace cgforge::draft
