#include "cgforge/patterns/library.hpp"

#include "cgforge/core/error.hpp"
#include "cgforge/core/text.hpp"
#include "cgforge/patterns/diff.hpp"
#include "cgforge/sql/template.hpp"

namespace cgforge::patterns {

using nlohmann::json;

namespace {

// Keeps a representative that does not depend on insertion order.
void absorb(ModificationTemplate& into, const ModificationTemplate& t) {
  const std::size_t support = into.support + t.support;
  if (t.example < into.example) into = t;
  into.support = support;
}

}  // namespace

void PatternLibrary::add(const ModificationTemplate& t, const std::string& base_hash) {
  auto [it, inserted] = templates.emplace(t.hash, t);
  if (!inserted) absorb(it->second, t);
  combos_seen.emplace(base_hash, t.hash);
}

void PatternLibrary::add_base(const std::string& base_hash, std::size_t count) {
  base_hashes[base_hash] += count;
}

void PatternLibrary::merge(const PatternLibrary& other) {
  for (const auto& [hash, t] : other.templates) {
    auto [it, inserted] = templates.emplace(hash, t);
    if (!inserted) absorb(it->second, t);
  }
  for (const auto& [hash, count] : other.base_hashes) base_hashes[hash] += count;
  combos_seen.insert(other.combos_seen.begin(), other.combos_seen.end());
}

bool operator==(const PatternLibrary& a, const PatternLibrary& b) {
  if (a.base_hashes != b.base_hashes || a.combos_seen != b.combos_seen) return false;
  if (a.templates.size() != b.templates.size()) return false;
  for (const auto& [hash, t] : a.templates) {
    auto it = b.templates.find(hash);
    if (it == b.templates.end() || it->second.text != t.text || it->second.support != t.support ||
        it->second.example != t.example || !(it->second.mod == t.mod)) {
      return false;
    }
  }
  return true;
}

json to_json(const PatternLibrary& lib) {
  json templates = json::array();
  for (const auto& [hash, t] : lib.templates) templates.push_back(to_json(t));
  json combos = json::array();
  for (const auto& [b, m] : lib.combos_seen) combos.push_back(json::array({b, m}));
  return {{"templates", templates}, {"base_hashes", lib.base_hashes}, {"combos_seen", combos}};
}

PatternLibrary library_from_json(const json& j) {
  PatternLibrary lib;
  try {
    for (const auto& t : j.at("templates")) {
      auto tmpl = template_from_json(t);
      lib.templates.emplace(tmpl.hash, std::move(tmpl));
    }
    lib.base_hashes = j.at("base_hashes").get<std::map<std::string, std::size_t>>();
    for (const auto& c : j.at("combos_seen")) {
      lib.combos_seen.emplace(c.at(0).get<std::string>(), c.at(1).get<std::string>());
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("pattern library: ") + e.what());
  }
  for (const auto& [b, m] : lib.combos_seen) {
    if (!lib.has_template(m) || !lib.has_base(b)) {
      throw FormatError("pattern library: combination references an unknown template");
    }
  }
  return lib;
}

json CollectResult::report() const {
  std::map<std::string, std::size_t> tags;
  for (const auto& [hash, t] : library.templates) {
    for (const auto& tag : component_tags(t)) tags[tag] += 1;
  }
  return {{"modifications", modifications},
          {"templates", library.templates.size()},
          {"base_templates", library.base_hashes.size()},
          {"combinations", library.combos_seen.size()},
          {"not_incremental", not_incremental},
          {"tag_counts", tags}};
}

CollectResult collect_patterns(const std::vector<io::Interaction>& dialogues,
                               const std::vector<link::TurnRef>& dependent,
                               const io::Catalog& catalog) {
  CollectResult out;
  for (const auto& interaction : dialogues) {
    const Schema& schema = catalog.at(interaction.db_id);
    for (const auto& turn : interaction.turns) {
      out.library.add_base(sql::template_of(turn.ast, schema).hash);
    }
  }
  for (const auto& ref : dependent) {
    const auto& interaction = dialogues.at(ref.interaction);
    if (ref.turn_index < 2 || ref.turn_index > interaction.turns.size()) {
      throw InvariantError("dependent turn reference out of range");
    }
    const Schema& schema = catalog.at(interaction.db_id);
    const QueryAst& prev = interaction.turns[ref.turn_index - 2].ast;
    const QueryAst& cur = interaction.turns[ref.turn_index - 1].ast;
    auto result = diff_asts(prev, cur, schema);
    if (auto* ni = std::get_if<NotIncremental>(&result)) {
      out.not_incremental[ni->reason] += 1;
      continue;
    }
    const auto& mod = std::get<Modification>(result);
    out.library.add(anonymize(mod, schema, &prev), sql::template_of(prev, schema).hash);
    out.modifications += 1;
  }
  return out;
}

std::set<std::string> component_tags(const ModificationTemplate& t) {
  static const std::pair<Clause, const char*> order[] = {
      {Clause::kWhere, "where"},   {Clause::kGroupBy, "groupby"}, {Clause::kHaving, "having"},
      {Clause::kOrderBy, "orderby"}, {Clause::kLimit, "limit"},   {Clause::kSetOp, "iue"},
      {Clause::kFrom, "from"}};
  std::vector<std::string> parts;
  for (const auto& [clause, name] : order) {
    for (const auto& e : t.mod.edits) {
      if (e.clause == clause) {
        parts.push_back(name);
        break;
      }
    }
  }
  if (parts.empty()) return {};
  return {text::join(parts, "-")};
}

}  // namespace cgforge::patterns
