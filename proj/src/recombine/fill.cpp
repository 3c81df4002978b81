#include "cgforge/recombine/fill.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <random>
#include <set>

#include "cgforge/core/error.hpp"
#include "cgforge/core/text.hpp"
#include "cgforge/sql/printer.hpp"

namespace cgforge::recombine {

using patterns::Clause;
using patterns::EditAction;
using patterns::ModificationTemplate;
using patterns::SlotFill;

namespace {

struct Leaf {
  enum class Kind { kTable, kColumn, kValue } kind;
  sql::ColumnRef column;  // table name in column.table for kTable
  sql::Value value;
};

struct LeafCollector {
  std::vector<Leaf> leaves;
  void table(const std::string& name) { leaves.push_back({Leaf::Kind::kTable, {name, ""}, {}}); }
  void column(const sql::ColumnRef& c) { leaves.push_back({Leaf::Kind::kColumn, c, {}}); }
  void value(const sql::Value& v) { leaves.push_back({Leaf::Kind::kValue, {}, v}); }
};

template <typename T>
std::vector<Leaf> leaves_of(const T& item) {
  LeafCollector c;
  if constexpr (std::is_same_v<T, sql::AggExpr>) {
    sql::walk::agg_expr(item, c);
  } else if constexpr (std::is_same_v<T, sql::Predicate>) {
    sql::walk::predicate(item, c);
  } else if constexpr (std::is_same_v<T, sql::ColumnRef>) {
    c.column(item);
  } else if constexpr (std::is_same_v<T, sql::OrderItem>) {
    sql::walk::order_item(item, c);
  } else {
    sql::walk::query(*item.right, c);
  }
  return c.leaves;
}

bool bind(std::map<std::string, std::string>& m, const std::string& key, const std::string& v) {
  auto [it, inserted] = m.emplace(key, v);
  return inserted || it->second == v;
}

// Binds the slots of template item `pattern` to concrete item `item`.
// Shape mismatches are caught later by the removal check.
template <typename T>
bool unify(const T& pattern, const T& item, SlotFill& fill) {
  const auto p = leaves_of(pattern);
  const auto c = leaves_of(item);
  if (p.size() != c.size()) return false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].kind != c[i].kind) return false;
    switch (p[i].kind) {
      case Leaf::Kind::kTable:
        if (!bind(fill.tables, p[i].column.table, c[i].column.table)) return false;
        break;
      case Leaf::Kind::kColumn: {
        if (p[i].column.is_star() || c[i].column.is_star()) {
          if (p[i].column.is_star() != c[i].column.is_star()) return false;
          break;
        }
        if (!bind(fill.tables, p[i].column.table, c[i].column.table)) return false;
        auto [it, inserted] = fill.columns.emplace(p[i].column.column, c[i].column);
        if (!inserted && !(it->second == c[i].column)) return false;
        break;
      }
      case Leaf::Kind::kValue: {
        auto [it, inserted] = fill.values.emplace(p[i].value.raw, c[i].value);
        if (!inserted && !(it->second == c[i].value)) return false;
        break;
      }
    }
  }
  return true;
}

// One matching problem: a template item that must be matched to some item
// of a base list.
struct Goal {
  std::function<bool(std::size_t, SlotFill&)> try_item;
  std::size_t options = 0;
};

template <typename T>
void add_goals(std::vector<Goal>& goals, const std::vector<T>& pattern, const std::vector<T>& base) {
  for (const auto& p : pattern) {
    goals.push_back({[&p, &base](std::size_t i, SlotFill& f) { return unify(p, base[i], f); },
                     base.size()});
  }
}

struct RemovalGoals {
  std::vector<Goal> goals;
  // Storage for lists materialized from the base (conjuncts).
  std::vector<std::unique_ptr<std::vector<sql::Predicate>>> conjunct_lists;
  std::vector<std::unique_ptr<std::vector<sql::SetOp>>> set_ops;
};

void collect_goals(const ModificationTemplate& t, const QueryAst& base, RemovalGoals& out) {
  for (const auto& e : t.mod.edits) {
    if (e.action != EditAction::kRemove) continue;
    switch (e.clause) {
      case Clause::kSelect:
        add_goals(out.goals, std::get<patterns::SelectList>(e.payload).items, base.select);
        break;
      case Clause::kWhere:
      case Clause::kHaving: {
        const auto& pred = e.clause == Clause::kWhere ? base.where : base.having;
        out.conjunct_lists.push_back(std::make_unique<std::vector<sql::Predicate>>(
            pred ? sql::conjuncts(*pred) : std::vector<sql::Predicate>{}));
        add_goals(out.goals, std::get<patterns::ConditionList>(e.payload).items,
                  *out.conjunct_lists.back());
        break;
      }
      case Clause::kGroupBy:
        add_goals(out.goals, std::get<patterns::ColumnList>(e.payload).items, base.group_by);
        break;
      case Clause::kOrderBy:
        add_goals(out.goals, std::get<patterns::OrderList>(e.payload).items, base.order_by);
        break;
      case Clause::kSetOp: {
        out.set_ops.push_back(std::make_unique<std::vector<sql::SetOp>>());
        if (base.set_op) out.set_ops.back()->push_back(*base.set_op);
        const auto& p = std::get<sql::SetOp>(e.payload);
        const auto& list = *out.set_ops.back();
        out.goals.push_back(
            {[&p, &list](std::size_t i, SlotFill& f) { return unify(p, list[i], f); },
             list.size()});
        break;
      }
      default:
        break;
    }
  }
}

class Enumerator {
 public:
  Enumerator(const ModificationTemplate& t, const QueryAst& base, const Schema& schema)
      : t_(t), base_(base), schema_(schema) {
    for (const auto& tt : base.from.tables) {
      if (!tt.is_subquery()) in_base_.insert(text::to_lower(tt.table));
    }
  }

  std::set<SlotFill> run() {
    RemovalGoals goals;
    collect_goals(t_, base_, goals);
    match(goals.goals, 0, SlotFill{});
    return out_;
  }

 private:
  void match(const std::vector<Goal>& goals, std::size_t k, SlotFill fill) {
    if (k == goals.size()) {
      extend_tables(fill, 0);
      return;
    }
    for (std::size_t i = 0; i < goals[k].options; ++i) {
      SlotFill next = fill;
      if (goals[k].try_item(i, next)) match(goals, k + 1, next);
    }
  }

  void extend_tables(SlotFill& fill, std::size_t k) {
    if (k == t_.tables.size()) {
      extend_columns(fill, 0);
      return;
    }
    const auto& slot = t_.tables[k];
    if (fill.tables.count(slot.name)) {
      extend_tables(fill, k + 1);
      return;
    }
    for (const auto& name : schema_.tables) {
      if (slot.in_base && *slot.in_base != (in_base_.count(text::to_lower(name)) > 0)) continue;
      bool used = false;
      for (const auto& [_, v] : fill.tables) used = used || v == name;
      if (used) continue;
      fill.tables[slot.name] = name;
      extend_tables(fill, k + 1);
      fill.tables.erase(slot.name);
    }
  }

  void extend_columns(SlotFill& fill, std::size_t k) {
    if (k == t_.columns.size()) {
      finish(fill);
      return;
    }
    const auto& slot = t_.columns[k];
    if (fill.columns.count(slot.name)) {
      extend_columns(fill, k + 1);
      return;
    }
    auto tbl = schema_.find_table(fill.tables.at(slot.table_slot));
    if (!tbl) return;
    for (int c : schema_.columns_of(*tbl)) {
      const auto& col = schema_.columns[static_cast<std::size_t>(c)];
      if (col.type != slot.type || schema_.is_primary_key(c) != slot.primary_key) continue;
      sql::ColumnRef ref{schema_.tables[static_cast<std::size_t>(*tbl)], col.name};
      bool used = false;
      for (const auto& [_, v] : fill.columns) used = used || v == ref;
      if (used) continue;
      fill.columns[slot.name] = ref;
      extend_columns(fill, k + 1);
      fill.columns.erase(slot.name);
    }
  }

  void finish(const SlotFill& fill) {
    if (patterns::check_fill(t_, fill, schema_, &base_)) return;
    if (!removals_present(patterns::instantiate(t_, fill), base_)) return;
    out_.insert(fill);
  }

  const ModificationTemplate& t_;
  const QueryAst& base_;
  const Schema& schema_;
  std::set<std::string> in_base_;
  std::set<SlotFill> out_;
};

template <typename T>
bool contains_all(std::vector<T> pool, const std::vector<T>& items) {
  for (const auto& item : items) {
    auto it = std::find(pool.begin(), pool.end(), item);
    if (it == pool.end()) return false;
    pool.erase(it);
  }
  return true;
}

}  // namespace

bool removals_present(const patterns::Modification& mod, const QueryAst& base) {
  for (const auto& e : mod.edits) {
    if (e.action != EditAction::kRemove) continue;
    bool ok = true;
    switch (e.clause) {
      case Clause::kSelect:
        ok = contains_all(base.select, std::get<patterns::SelectList>(e.payload).items);
        break;
      case Clause::kWhere:
      case Clause::kHaving: {
        const auto& pred = e.clause == Clause::kWhere ? base.where : base.having;
        ok = pred && contains_all(sql::conjuncts(*pred),
                                  std::get<patterns::ConditionList>(e.payload).items);
        break;
      }
      case Clause::kGroupBy:
        ok = contains_all(base.group_by, std::get<patterns::ColumnList>(e.payload).items);
        break;
      case Clause::kOrderBy:
        ok = contains_all(base.order_by, std::get<patterns::OrderList>(e.payload).items);
        break;
      case Clause::kLimit:
        ok = base.limit.has_value();
        break;
      case Clause::kSetOp:
        ok = base.set_op && *base.set_op == std::get<sql::SetOp>(e.payload);
        break;
      case Clause::kFrom:
        ok = false;
        break;
    }
    if (!ok) return false;
  }
  return true;
}

std::vector<SlotFill> enumerate_fills(const ModificationTemplate& t, const QueryAst& base,
                                      const Schema& schema, std::uint64_t seed,
                                      std::optional<std::size_t> cap) {
  const auto all = Enumerator(t, base, schema).run();
  if (all.empty()) throw NoFill("no fill satisfies template " + t.hash + " on " + schema.db_id);
  std::vector<SlotFill> fills(all.begin(), all.end());
  if (!cap || fills.size() <= *cap) return fills;
  // Partial Fisher-Yates over the sorted space.
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < *cap; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (fills.size() - i));
    std::swap(fills[i], fills[j]);
  }
  fills.resize(*cap);
  std::sort(fills.begin(), fills.end());
  return fills;
}

}  // namespace cgforge::recombine
