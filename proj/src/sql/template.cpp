#include "cgforge/sql/template.hpp"

#include <map>

#include "cgforge/core/hash.hpp"
#include "cgforge/core/text.hpp"
#include "cgforge/sql/printer.hpp"
#include "cgforge/sql/walk.hpp"

namespace cgforge::sql {
namespace {

class Anonymizer {
 public:
  explicit Anonymizer(const Schema& schema) : schema_(schema) {}

  void table(std::string& name) { name = table_slot(name); }

  void column(ColumnRef& c) {
    if (c.is_star()) return;
    auto key = std::make_pair(text::to_lower(c.table), text::to_lower(c.column));
    auto it = columns_.find(key);
    if (it == columns_.end()) {
      std::string type = "text";
      if (auto t = schema_.find_table(c.table)) {
        if (auto col = schema_.find_column(*t, c.column)) {
          type = std::string(to_string(schema_.columns[static_cast<std::size_t>(*col)].type));
        }
      }
      it = columns_.emplace(key, "col" + std::to_string(columns_.size() + 1) + ":" + type).first;
    }
    const std::string slot = it->second;
    c.table = table_slot(c.table);
    c.column = slot;
  }

  void value(Value& v) { v = Value{Value::Kind::kPlaceholder, "val" + std::to_string(++values_)}; }

  bool join(JoinCondition& j) {
    auto lt = schema_.find_table(j.left.table);
    auto rt = schema_.find_table(j.right.table);
    if (!lt || !rt) return false;
    auto lc = schema_.find_column(*lt, j.left.column);
    auto rc = schema_.find_column(*rt, j.right.column);
    if (!lc || !rc || !schema_.is_fk_edge(*lc, *rc)) return false;
    const bool left_refers = schema_.has_fk(*lc, *rc);
    std::string from = table_slot(left_refers ? j.left.table : j.right.table);
    std::string to = table_slot(left_refers ? j.right.table : j.left.table);
    j.left = ColumnRef{std::move(from), "fk"};
    j.right = ColumnRef{std::move(to), "fk"};
    return true;
  }

 private:
  std::string table_slot(const std::string& name) {
    const std::string key = text::to_lower(name);
    auto it = tables_.find(key);
    if (it == tables_.end()) {
      it = tables_.emplace(key, "tab" + std::to_string(tables_.size() + 1)).first;
    }
    return it->second;
  }

  const Schema& schema_;
  std::map<std::string, std::string> tables_;
  std::map<std::pair<std::string, std::string>, std::string> columns_;
  int values_ = 0;
};

void clear_limits(Query& q) {
  if (q.limit) q.limit = 0;
  if (q.set_op) clear_limits(*q.set_op->right);
  for (auto& t : q.from.tables) {
    if (t.subquery) clear_limits(**t.subquery);
  }
  struct Nested {
    void visit(Predicate& p) {
      if (p.kind != Connective::kLeaf) {
        for (auto& c : p.children) visit(c);
      } else if (auto* sub = std::get_if<Box<Query>>(&p.condition.right)) {
        clear_limits(**sub);
      }
    }
  } nested;
  if (q.where) nested.visit(*q.where);
  if (q.having) nested.visit(*q.having);
}

}  // namespace

QueryTemplate template_of(const Query& q, const Schema& schema) {
  QueryTemplate t;
  t.skeleton = q;
  Anonymizer anon(schema);
  walk::query(t.skeleton, anon);
  clear_limits(t.skeleton);
  t.text = print_sql(t.skeleton, {.limit_as_slot = true});
  t.hash = stable_hash(t.text);
  return t;
}

}  // namespace cgforge::sql
