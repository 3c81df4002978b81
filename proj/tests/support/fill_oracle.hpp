#pragma once

#include <algorithm>
#include <functional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "cgforge/patterns/diff.hpp"
#include "cgforge/patterns/mod_template.hpp"
#include "cgforge/sql/printer.hpp"
#include "cgforge/sql/walk.hpp"

namespace cgforge::testing {

using patterns::ModificationTemplate;
using patterns::SlotFill;

// Independent oracle: every assignment of schema tables, columns and base
// literals to the template's slots, kept when it satisfies the constraint
// strings and every removed item (compared as printed SQL) is in the base.
struct FillOracle {
  const ModificationTemplate& t;
  const QueryAst& base;
  const Schema& s;
  mutable bool unparsed = false;

  std::set<std::string> base_tables() const {
    std::set<std::string> out;
    for (const auto& tr : base.from.tables) out.insert(tr.table);
    return out;
  }

  std::vector<sql::Value> base_literals() const {
    struct V {
      std::vector<sql::Value> out;
      void value(const sql::Value& v) { out.push_back(v); }
    } v;
    sql::walk::query(base, v);
    return v.out;
  }

  std::set<std::string> removed_value_slots() const {
    struct V {
      std::set<std::string> out;
      void value(const sql::Value& v) { out.insert(v.raw); }
    } v;
    for (const auto& e : t.mod.edits) {
      if (e.action == patterns::EditAction::kRemove) patterns::walk_payload(e.payload, v);
    }
    return v.out;
  }

  bool satisfies(const SlotFill& f) const {
    static const std::regex kRel(R"((\w+)\((\w+)(?:,(\w+))?\)(?:=(\w+))?)");
    std::set<std::string> pk_slots;
    std::set<std::pair<std::string, std::string>> fks;
    auto col_index = [&](const std::string& slot) {
      const auto& ref = f.columns.at(slot);
      return *s.find_column(*s.find_table(ref.table), ref.column);
    };
    for (const auto& c : t.constraints) {
      std::smatch m;
      if (!std::regex_match(c, m, kRel)) {
        unparsed = true;
        return false;
      }
      const std::string rel = m[1], a = m[2], b = m[3], val = m[4];
      if (rel == "base" && !base_tables().count(f.tables.at(a))) return false;
      if (rel == "new" && base_tables().count(f.tables.at(a))) return false;
      if (rel == "colof" && f.columns.at(a).table != f.tables.at(b)) return false;
      if (rel == "type" &&
          to_string(s.columns[static_cast<std::size_t>(col_index(a))].type) != val) {
        return false;
      }
      if (rel == "pk") pk_slots.insert(a);
      if (rel == "fk") fks.insert({a, b});
    }
    for (const auto& [slot, ref] : f.columns) {
      if (s.is_primary_key(col_index(slot)) != (pk_slots.count(slot) > 0)) return false;
      for (const auto& [other, _] : f.columns) {
        if (other != slot && s.has_fk(col_index(slot), col_index(other)) != (fks.count({slot, other}) > 0)) {
          return false;
        }
      }
    }
    return true;
  }

  static std::vector<std::string> printed_items(const patterns::Edit& e) {
    std::vector<std::string> out;
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, patterns::SelectList> || std::is_same_v<T, patterns::ConditionList> ||
                        std::is_same_v<T, patterns::ColumnList> || std::is_same_v<T, patterns::OrderList>) {
            for (const auto& i : p.items) out.push_back(sql::print(i));
          }
        },
        e.payload);
    return out;
  }

  std::vector<std::string> printed_base(patterns::Clause c) const {
    std::vector<std::string> out;
    using patterns::Clause;
    if (c == Clause::kSelect) for (const auto& i : base.select) out.push_back(sql::print(i));
    if (c == Clause::kWhere && base.where) for (const auto& i : sql::conjuncts(*base.where)) out.push_back(sql::print(i));
    if (c == Clause::kHaving && base.having) for (const auto& i : sql::conjuncts(*base.having)) out.push_back(sql::print(i));
    if (c == Clause::kGroupBy) for (const auto& i : base.group_by) out.push_back(sql::print(i));
    if (c == Clause::kOrderBy) for (const auto& i : base.order_by) out.push_back(sql::print(i));
    return out;
  }

  bool removals_in_base(const SlotFill& f) const {
    for (const auto& e : patterns::instantiate(t, f).edits) {
      if (e.action != patterns::EditAction::kRemove) continue;
      if (e.clause == patterns::Clause::kLimit) {
        if (!base.limit) return false;
        continue;
      }
      auto pool = printed_base(e.clause);
      for (const auto& item : printed_items(e)) {
        auto it = std::find(pool.begin(), pool.end(), item);
        if (it == pool.end()) return false;
        pool.erase(it);
      }
    }
    return true;
  }

  std::set<SlotFill> run() const {
    std::set<SlotFill> out;
    std::vector<sql::ColumnRef> all_columns;
    for (const auto& c : s.columns) {
      all_columns.push_back({s.tables[static_cast<std::size_t>(c.table)], c.name});
    }
    const auto literals = base_literals();
    const auto removed = removed_value_slots();
    const std::vector<std::string> value_slots(removed.begin(), removed.end());
    SlotFill f;
    std::function<void(std::size_t)> values = [&](std::size_t k) {
      if (k == value_slots.size()) {
        if (removals_in_base(f)) out.insert(f);
        return;
      }
      for (const auto& v : literals) {
        f.values[value_slots[k]] = v;
        values(k + 1);
      }
      f.values.erase(value_slots[k]);
    };
    std::function<void(std::size_t)> columns = [&](std::size_t k) {
      if (k == t.columns.size()) {
        std::set<sql::ColumnRef> distinct;
        for (const auto& [_, r] : f.columns) distinct.insert(r);
        if (distinct.size() == f.columns.size() && satisfies(f)) values(0);
        return;
      }
      for (const auto& c : all_columns) {
        f.columns[t.columns[k].name] = c;
        columns(k + 1);
      }
      f.columns.erase(t.columns[k].name);
    };
    std::function<void(std::size_t)> tables = [&](std::size_t k) {
      if (k == t.tables.size()) {
        std::set<std::string> distinct;
        for (const auto& [_, n] : f.tables) distinct.insert(n);
        if (distinct.size() == f.tables.size()) columns(0);
        return;
      }
      for (const auto& name : s.tables) {
        f.tables[t.tables[k].name] = name;
        tables(k + 1);
      }
      f.tables.erase(t.tables[k].name);
    };
    tables(0);
    return out;
  }
};

}  // namespace cgforge::testing
