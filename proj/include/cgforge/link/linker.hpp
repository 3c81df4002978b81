#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cgforge/io/dataset.hpp"
#include "cgforge/sql/schema.hpp"
#include "json.hpp"

namespace cgforge::link {

// Matching rules. Every tunable of the context-dependence filter lives here.
struct LinkerConfig {
  // Minimum (stemmed) token length for a single-token partial match.
  std::size_t min_partial_token_length = 4;
  // Also match the catalog's natural-language names.
  bool use_display_names = true;
};

struct Mention {
  enum class Kind { kExact, kPartial };
  SchemaItem item;
  std::size_t start = 0;  // token span [start, end) in the question
  std::size_t end = 0;
  Kind kind = Kind::kExact;
  friend bool operator==(const Mention&, const Mention&) = default;
};

using ItemSet = std::set<SchemaItem>;

// Lower-cases and splits on anything that is not a letter or digit.
std::vector<std::string> tokenize(std::string_view text);
// Strips plural suffixes: -ies -> -y; -sses/-shes/-ches/-xes/-zes lose "es";
// otherwise a trailing "s" is dropped unless the word ends in ss/us/is.
// Words shorter than four characters are left alone.
std::string stem(std::string_view token);
// Name variants of a schema item as stemmed token lists (identifier split on
// underscores and case boundaries, plus the display name when enabled).
std::vector<std::vector<std::string>> name_variants(const SchemaItem& item, const Schema& schema,
                                                    const LinkerConfig& config = {});

ItemSet all_items(const Schema& schema);
// Tables and columns used anywhere in the query (star excluded).
ItemSet items_of(const QueryAst& q, const Schema& schema);

std::vector<Mention> link_mentions(std::string_view question, const Schema& schema,
                                   const ItemSet& restrict_to, const LinkerConfig& config = {});

struct DependenceVerdict {
  ItemSet target;   // S
  ItemSet current;  // S_c
  ItemSet history;  // S_p
  bool dependent = false;
};

// turn_index is 1-based.
DependenceVerdict classify_dependence(std::size_t turn_index, const io::Interaction& interaction,
                                      const Schema& schema, const LinkerConfig& config = {});

struct TurnRef {
  std::size_t interaction = 0;  // index into the dialogue list
  std::size_t turn_index = 0;   // 1-based
  friend bool operator==(const TurnRef&, const TurnRef&) = default;
  friend auto operator<=>(const TurnRef&, const TurnRef&) = default;
};

struct FilterResult {
  std::vector<TurnRef> dependent;
  std::vector<TurnRef> independent;  // includes every first turn
  nlohmann::json report;             // {dependent_count, independent_count, per_db}
};

FilterResult filter_dataset(const std::vector<io::Interaction>& dialogues,
                            const io::Catalog& catalog, const LinkerConfig& config = {});

}  // namespace cgforge::link
