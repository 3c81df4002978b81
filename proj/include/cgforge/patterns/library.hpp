#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cgforge/io/dataset.hpp"
#include "cgforge/link/linker.hpp"
#include "cgforge/patterns/mod_template.hpp"
#include "json.hpp"

namespace cgforge::patterns {

struct PatternLibrary {
  std::map<std::string, ModificationTemplate> templates;  // by hash
  std::map<std::string, std::size_t> base_hashes;         // query template hash -> occurrences
  std::set<std::pair<std::string, std::string>> combos_seen;  // (base hash, template hash)

  // Adds one occurrence of `t` applied to a base with template hash `base_hash`.
  void add(const ModificationTemplate& t, const std::string& base_hash);
  void add_base(const std::string& base_hash, std::size_t count = 1);
  // Multiset union; associative and commutative.
  void merge(const PatternLibrary& other);

  bool has_template(const std::string& hash) const { return templates.count(hash) > 0; }
  bool has_base(const std::string& hash) const { return base_hashes.count(hash) > 0; }

  friend bool operator==(const PatternLibrary& a, const PatternLibrary& b);
};

nlohmann::json to_json(const PatternLibrary& lib);
PatternLibrary library_from_json(const nlohmann::json& j);

struct CollectResult {
  PatternLibrary library;
  std::size_t modifications = 0;
  std::map<std::string, std::size_t> not_incremental;  // reason -> count
  nlohmann::json report() const;
};

// Diffs every dependent turn against its predecessor. Base hashes are
// recorded for every turn of `dialogues`, so that bases seen only in
// context-independent turns still count as seen in training.
CollectResult collect_patterns(const std::vector<io::Interaction>& dialogues,
                               const std::vector<link::TurnRef>& dependent,
                               const io::Catalog& catalog);

// Clause-combination tag: edited clauses other than select, in the order
// where, groupby, having, orderby, limit, iue, from, joined with '-'.
// Select-only templates get no tag.
std::set<std::string> component_tags(const ModificationTemplate& t);

}  // namespace cgforge::patterns
