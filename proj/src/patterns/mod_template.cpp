#include "cgforge/patterns/mod_template.hpp"

#include <set>

#include "cgforge/core/error.hpp"
#include "cgforge/core/hash.hpp"
#include "cgforge/core/text.hpp"
#include "cgforge/sql/serialize.hpp"

namespace cgforge::patterns {

using nlohmann::json;

namespace {

std::set<std::string> base_tables(const QueryAst* base) {
  std::set<std::string> out;
  if (!base) return out;
  for (const auto& t : base->from.tables) {
    if (!t.is_subquery()) out.insert(text::to_lower(t.table));
  }
  return out;
}

class Anonymizer {
 public:
  Anonymizer(ModificationTemplate& t, const Schema& schema, const QueryAst* base)
      : t_(t), schema_(schema), base_(base), in_base_(base_tables(base)) {}

  void table(std::string& name) { name = table_slot(name); }

  void column(sql::ColumnRef& c) {
    if (c.is_star()) return;
    auto key = std::make_pair(text::to_lower(c.table), text::to_lower(c.column));
    auto it = columns_.find(key);
    if (it == columns_.end()) {
      ColumnSlot slot;
      slot.name = "col" + std::to_string(t_.columns.size() + 1);
      slot.table_slot = table_slot(c.table);
      slot.type = ColumnType::kOthers;
      std::optional<int> index;
      if (auto tbl = schema_.find_table(c.table)) {
        index = schema_.find_column(*tbl, c.column);
      }
      if (index) {
        slot.type = schema_.columns[static_cast<std::size_t>(*index)].type;
        slot.primary_key = schema_.is_primary_key(*index);
      }
      t_.columns.push_back(slot);
      indices_.push_back(index);
      it = columns_.emplace(key, slot.name).first;
    }
    c.table = table_slot(c.table);
    c.column = it->second;
  }

  void value(sql::Value& v) {
    v = sql::Value{sql::Value::Kind::kPlaceholder, "val" + std::to_string(t_.values.size() + 1)};
    t_.values.push_back(v.raw);
  }

  const std::vector<std::optional<int>>& indices() const { return indices_; }

 private:
  std::string table_slot(const std::string& name) {
    const std::string key = text::to_lower(name);
    auto it = tables_.find(key);
    if (it == tables_.end()) {
      TableSlot slot{"tab" + std::to_string(t_.tables.size() + 1), std::nullopt};
      if (base_) slot.in_base = in_base_.count(key) > 0;
      t_.tables.push_back(slot);
      it = tables_.emplace(key, slot.name).first;
    }
    return it->second;
  }

  ModificationTemplate& t_;
  const Schema& schema_;
  const QueryAst* base_;
  std::set<std::string> in_base_;
  std::map<std::string, std::string> tables_;
  std::map<std::pair<std::string, std::string>, std::string> columns_;
  std::vector<std::optional<int>> indices_;
};

class Instantiator {
 public:
  explicit Instantiator(const SlotFill& fill) : fill_(fill) {}

  void table(std::string& name) {
    auto it = fill_.tables.find(name);
    if (it == fill_.tables.end()) throw NoFill("table slot " + name + " is unfilled");
    name = it->second;
  }
  void column(sql::ColumnRef& c) {
    if (c.is_star()) return;
    auto it = fill_.columns.find(c.column);
    if (it == fill_.columns.end()) throw NoFill("column slot " + c.column + " is unfilled");
    c = it->second;
  }
  void value(sql::Value& v) {
    auto it = fill_.values.find(v.raw);
    v = it == fill_.values.end() ? sql::Value::placeholder() : it->second;
  }

 private:
  const SlotFill& fill_;
};

std::vector<std::string> render_constraints(const ModificationTemplate& t) {
  std::vector<std::string> out;
  for (const auto& s : t.tables) {
    if (s.in_base) out.push_back((*s.in_base ? "base(" : "new(") + s.name + ")");
  }
  for (const auto& c : t.columns) {
    out.push_back("colof(" + c.name + "," + c.table_slot + ")");
    out.push_back("type(" + c.name + ")=" + std::string(to_string(c.type)));
    if (c.primary_key) out.push_back("pk(" + c.name + ")");
  }
  for (const auto& [from, to] : t.foreign_keys) out.push_back("fk(" + from + "," + to + ")");
  return out;
}

void finish(ModificationTemplate& t) {
  t.constraints = render_constraints(t);
  t.text = describe(t.mod, {.limit_as_slot = true}) + " | " + text::join(t.constraints, ", ");
  t.hash = stable_hash(t.text);
}

}  // namespace

const ColumnSlot* ModificationTemplate::column(const std::string& name) const {
  for (const auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const TableSlot* ModificationTemplate::table(const std::string& name) const {
  for (const auto& t : tables) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

ModificationTemplate anonymize(const Modification& mod, const Schema& schema,
                               const QueryAst* base) {
  ModificationTemplate t;
  t.example = describe(mod);
  t.mod = mod;
  Anonymizer anon(t, schema, base);
  for (auto& e : t.mod.edits) walk_payload(e.payload, anon);
  const auto& idx = anon.indices();
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = 0; b < idx.size(); ++b) {
      if (a != b && idx[a] && idx[b] && schema.has_fk(*idx[a], *idx[b])) {
        t.foreign_keys.emplace_back(t.columns[a].name, t.columns[b].name);
      }
    }
  }
  finish(t);
  return t;
}

Modification instantiate(const ModificationTemplate& t, const SlotFill& fill) {
  Modification m = t.mod;
  Instantiator inst(fill);
  for (auto& e : m.edits) walk_payload(e.payload, inst);
  return m;
}

std::optional<std::string> check_fill(const ModificationTemplate& t, const SlotFill& fill,
                                      const Schema& schema, const QueryAst* base) {
  const auto in_base = base_tables(base);
  std::map<std::string, int> table_index;
  std::set<int> used_tables;
  for (const auto& s : t.tables) {
    auto it = fill.tables.find(s.name);
    if (it == fill.tables.end()) return "unfilled(" + s.name + ")";
    auto idx = schema.find_table(it->second);
    if (!idx) return "unknown table for " + s.name;
    if (!used_tables.insert(*idx).second) return "distinct(" + s.name + ")";
    table_index[s.name] = *idx;
    if (base && s.in_base && *s.in_base != (in_base.count(text::to_lower(it->second)) > 0)) {
      return (*s.in_base ? "base(" : "new(") + s.name + ")";
    }
  }
  std::map<std::string, int> column_index;
  std::set<int> used_columns;
  for (const auto& c : t.columns) {
    auto it = fill.columns.find(c.name);
    if (it == fill.columns.end()) return "unfilled(" + c.name + ")";
    const auto tbl = table_index.at(c.table_slot);
    if (schema.find_table(it->second.table) != tbl) return "colof(" + c.name + "," + c.table_slot + ")";
    auto idx = schema.find_column(tbl, it->second.column);
    if (!idx) return "colof(" + c.name + "," + c.table_slot + ")";
    if (!used_columns.insert(*idx).second) return "distinct(" + c.name + ")";
    const auto& col = schema.columns[static_cast<std::size_t>(*idx)];
    if (col.type != c.type) return "type(" + c.name + ")=" + std::string(to_string(c.type));
    if (schema.is_primary_key(*idx) != c.primary_key) return "pk(" + c.name + ")";
    column_index[c.name] = *idx;
  }
  std::set<std::pair<std::string, std::string>> declared(t.foreign_keys.begin(),
                                                         t.foreign_keys.end());
  for (const auto& a : t.columns) {
    for (const auto& b : t.columns) {
      if (a.name == b.name) continue;
      const bool fk = schema.has_fk(column_index.at(a.name), column_index.at(b.name));
      if (fk != (declared.count({a.name, b.name}) > 0)) return "fk(" + a.name + "," + b.name + ")";
    }
  }
  return std::nullopt;
}

namespace {

const Clause kAllClauses[] = {Clause::kSelect,  Clause::kFrom,   Clause::kWhere,
                              Clause::kGroupBy, Clause::kHaving, Clause::kOrderBy,
                              Clause::kLimit,   Clause::kSetOp};

Clause parse_clause(const std::string& s) {
  for (Clause c : kAllClauses) {
    if (to_string(c) == s) return c;
  }
  throw FormatError("unknown clause '" + s + "'");
}

EditAction parse_action(const std::string& s) {
  for (EditAction a : {EditAction::kAdd, EditAction::kRemove, EditAction::kReplace}) {
    if (to_string(a) == s) return a;
  }
  throw FormatError("unknown edit action '" + s + "'");
}

json payload_json(const Payload& payload) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SelectList>) {
          return {{"distinct", p.distinct}, {"items", p.items}};
        } else if constexpr (std::is_same_v<T, LimitValue>) {
          return p.value;
        } else if constexpr (std::is_same_v<T, sql::FromClause> || std::is_same_v<T, sql::SetOp>) {
          return p;
        } else {
          return p.items;
        }
      },
      payload);
}

Payload payload_from(Clause clause, const json& j) {
  switch (clause) {
    case Clause::kSelect:
      return SelectList{j.at("distinct").get<bool>(), j.at("items").get<std::vector<sql::AggExpr>>()};
    case Clause::kFrom:
      return j.get<sql::FromClause>();
    case Clause::kWhere:
    case Clause::kHaving:
      return ConditionList{j.get<std::vector<sql::Predicate>>()};
    case Clause::kGroupBy:
      return ColumnList{j.get<std::vector<sql::ColumnRef>>()};
    case Clause::kOrderBy:
      return OrderList{j.get<std::vector<sql::OrderItem>>()};
    case Clause::kLimit:
      return LimitValue{j.get<std::int64_t>()};
    case Clause::kSetOp:
      return j.get<sql::SetOp>();
  }
  return LimitValue{};
}

}  // namespace

json to_json(const Modification& m) {
  json edits = json::array();
  for (const auto& e : m.edits) {
    edits.push_back({{"clause", to_string(e.clause)},
                     {"action", to_string(e.action)},
                     {"payload", payload_json(e.payload)}});
  }
  return edits;
}

Modification modification_from_json(const json& j) {
  Modification m;
  for (const auto& e : j) {
    const Clause clause = parse_clause(e.at("clause").get<std::string>());
    m.edits.push_back({clause, parse_action(e.at("action").get<std::string>()),
                       payload_from(clause, e.at("payload"))});
  }
  return m;
}

json to_json(const ModificationTemplate& t) {
  json tables = json::array();
  for (const auto& s : t.tables) {
    json entry = {{"slot", s.name}};
    if (s.in_base) entry["in_base"] = *s.in_base;
    tables.push_back(entry);
  }
  json columns = json::array();
  for (const auto& c : t.columns) {
    columns.push_back({{"slot", c.name},
                       {"table", c.table_slot},
                       {"type", to_string(c.type)},
                       {"pk", c.primary_key}});
  }
  return {{"hash", t.hash},         {"text", t.text},
          {"support", t.support},   {"example", t.example},
          {"edits", to_json(t.mod)}, {"tables", tables},
          {"columns", columns},     {"foreign_keys", t.foreign_keys},
          {"values", t.values},     {"constraints", t.constraints}};
}

ModificationTemplate template_from_json(const json& j) {
  ModificationTemplate t;
  t.mod = modification_from_json(j.at("edits"));
  for (const auto& s : j.at("tables")) {
    TableSlot slot{s.at("slot").get<std::string>(), std::nullopt};
    if (s.contains("in_base")) slot.in_base = s.at("in_base").get<bool>();
    t.tables.push_back(slot);
  }
  for (const auto& c : j.at("columns")) {
    auto type = parse_column_type(c.at("type").get<std::string>());
    if (!type) throw FormatError("unknown column type in template");
    t.columns.push_back({c.at("slot").get<std::string>(), c.at("table").get<std::string>(), *type,
                         c.at("pk").get<bool>()});
  }
  t.foreign_keys = j.at("foreign_keys").get<std::vector<std::pair<std::string, std::string>>>();
  t.values = j.at("values").get<std::vector<std::string>>();
  t.support = j.at("support").get<std::size_t>();
  t.example = j.at("example").get<std::string>();
  finish(t);
  if (t.hash != j.at("hash").get<std::string>()) {
    throw FormatError("template hash does not match its content");
  }
  return t;
}

}  // namespace cgforge::patterns
