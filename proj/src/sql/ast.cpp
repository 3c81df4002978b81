#include "cgforge/sql/ast.hpp"

#include <algorithm>

#include "cgforge/sql/printer.hpp"

namespace cgforge::sql {

std::vector<Predicate> conjuncts(const Predicate& p) {
  if (p.kind == Connective::kAnd) return p.children;
  return {p};
}

std::optional<Predicate> conjoin(std::vector<Predicate> parts) {
  if (parts.empty()) return std::nullopt;
  if (parts.size() == 1) {
    Predicate only = std::move(parts.front());
    canonicalize(only);
    return only;
  }
  Predicate p;
  p.kind = Connective::kAnd;
  p.children = std::move(parts);
  canonicalize(p);
  return p;
}

namespace {

void canonicalize_operand(Condition& c) {
  if (auto* sub = std::get_if<Box<Query>>(&c.right)) canonicalize(**sub);
}

}  // namespace

void canonicalize(Predicate& p) {
  if (p.kind == Connective::kLeaf) {
    canonicalize_operand(p.condition);
    return;
  }
  std::vector<Predicate> flat;
  for (auto& child : p.children) {
    canonicalize(child);
    if (child.kind == p.kind) {
      for (auto& grandchild : child.children) flat.push_back(std::move(grandchild));
    } else {
      flat.push_back(std::move(child));
    }
  }
  if (flat.size() == 1) {
    p = std::move(flat.front());
    return;
  }
  std::vector<std::pair<std::pair<std::string, std::string>, Predicate>> keyed;
  keyed.reserve(flat.size());
  for (auto& child : flat) {
    auto key = std::make_pair(print(child, {.erase_names = true}), print(child));
    keyed.emplace_back(std::move(key), std::move(child));
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  p.children.clear();
  p.condition = Condition{};
  for (auto& [key, child] : keyed) p.children.push_back(std::move(child));
}

void canonicalize(Query& q) {
  for (auto& t : q.from.tables) {
    t.alias.clear();
    if (t.subquery) canonicalize(**t.subquery);
  }
  for (auto& j : q.from.joins) {
    if (j.right < j.left) std::swap(j.left, j.right);
  }
  std::sort(q.from.joins.begin(), q.from.joins.end(),
            [](const JoinCondition& a, const JoinCondition& b) {
              return std::tie(a.left, a.right) < std::tie(b.left, b.right);
            });
  q.from.joins.erase(std::unique(q.from.joins.begin(), q.from.joins.end()), q.from.joins.end());
  if (q.where) canonicalize(*q.where);
  if (q.having) canonicalize(*q.having);
  if (q.set_op) canonicalize(*q.set_op->right);
}

}  // namespace cgforge::sql
