#include "cgforge/link/linker.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "cgforge/core/text.hpp"
#include "cgforge/sql/walk.hpp"

namespace cgforge::link {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string stem(std::string_view token) {
  std::string t(token);
  if (t.size() < 4) return t;
  auto ends_with = [&](std::string_view suffix) {
    return t.size() >= suffix.size() && t.compare(t.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with("ies")) return t.substr(0, t.size() - 3) + "y";
  for (std::string_view s : {"sses", "shes", "ches", "xes", "zes"}) {
    if (ends_with(s)) return t.substr(0, t.size() - 2);
  }
  if (ends_with("s") && !ends_with("ss") && !ends_with("us") && !ends_with("is")) {
    return t.substr(0, t.size() - 1);
  }
  return t;
}

namespace {

// Splits an identifier on non-alphanumerics and case boundaries
// ("AirportCode" -> airport code, "LName" -> l name).
std::vector<std::string> split_identifier(std::string_view name) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(text::to_lower(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < name.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(name[i]);
    if (!std::isalnum(c)) {
      flush();
      continue;
    }
    if (!cur.empty() && std::isupper(c)) {
      const unsigned char prev = static_cast<unsigned char>(cur.back());
      const bool next_lower = i + 1 < name.size() &&
                              std::islower(static_cast<unsigned char>(name[i + 1]));
      if (std::islower(prev) || std::isdigit(prev) || (std::isupper(prev) && next_lower)) flush();
    }
    cur += static_cast<char>(c);
  }
  flush();
  return out;
}

std::vector<std::string> stems(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(stem(t));
  return out;
}

}  // namespace

std::vector<std::vector<std::string>> name_variants(const SchemaItem& item, const Schema& schema,
                                                    const LinkerConfig& config) {
  std::vector<std::vector<std::string>> out;
  auto add = [&](std::vector<std::string> tokens) {
    if (tokens.empty()) return;
    tokens = stems(tokens);
    if (std::find(out.begin(), out.end(), tokens) == out.end()) out.push_back(std::move(tokens));
  };
  const auto t = static_cast<std::size_t>(item.table);
  if (item.kind == SchemaItem::Kind::kTable) {
    add(split_identifier(schema.tables.at(t)));
    if (config.use_display_names && t < schema.table_display_names.size()) {
      add(tokenize(schema.table_display_names[t]));
    }
  } else {
    const auto& col = schema.columns.at(static_cast<std::size_t>(item.column));
    add(split_identifier(col.name));
    if (config.use_display_names && !col.display_name.empty()) add(tokenize(col.display_name));
  }
  return out;
}

ItemSet all_items(const Schema& schema) {
  ItemSet out;
  for (std::size_t t = 0; t < schema.tables.size(); ++t) {
    out.insert(SchemaItem::of_table(static_cast<int>(t)));
  }
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    out.insert(SchemaItem::of_column(schema.columns[c].table, static_cast<int>(c)));
  }
  return out;
}

ItemSet items_of(const QueryAst& q, const Schema& schema) {
  struct Collector {
    const Schema& schema;
    ItemSet items;
    void table(const std::string& name) {
      if (auto t = schema.find_table(name)) items.insert(SchemaItem::of_table(*t));
    }
    void column(const sql::ColumnRef& c) {
      if (c.is_star()) return;
      auto t = schema.find_table(c.table);
      if (!t) return;
      if (auto col = schema.find_column(*t, c.column)) {
        items.insert(SchemaItem::of_column(*t, *col));
      }
    }
  } collector{schema, {}};
  sql::walk::query(q, collector);
  return std::move(collector.items);
}

std::vector<Mention> link_mentions(std::string_view question, const Schema& schema,
                                   const ItemSet& restrict_to, const LinkerConfig& config) {
  std::vector<Mention> out;
  if (restrict_to.empty()) return out;
  const std::vector<std::string> q = stems(tokenize(question));

  for (const SchemaItem& item : restrict_to) {
    const auto variants = name_variants(item, schema, config);
    bool exact = false;
    for (const auto& v : variants) {
      if (v.size() > q.size()) continue;
      for (std::size_t start = 0; start + v.size() <= q.size(); ++start) {
        if (std::equal(v.begin(), v.end(), q.begin() + static_cast<std::ptrdiff_t>(start))) {
          out.push_back({item, start, start + v.size(), Mention::Kind::kExact});
          exact = true;
        }
      }
    }
    if (exact) continue;
    std::set<std::size_t> hits;
    for (const auto& v : variants) {
      for (const auto& token : v) {
        if (token.size() < config.min_partial_token_length) continue;
        for (std::size_t i = 0; i < q.size(); ++i) {
          if (q[i] == token) hits.insert(i);
        }
      }
    }
    for (std::size_t i : hits) out.push_back({item, i, i + 1, Mention::Kind::kPartial});
  }
  std::sort(out.begin(), out.end(), [](const Mention& a, const Mention& b) {
    return std::tie(a.start, a.end, a.item, a.kind) < std::tie(b.start, b.end, b.item, b.kind);
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

ItemSet matched(std::string_view question, const Schema& schema, const ItemSet& target,
                const LinkerConfig& config) {
  ItemSet out;
  for (const auto& m : link_mentions(question, schema, target, config)) out.insert(m.item);
  return out;
}

}  // namespace

DependenceVerdict classify_dependence(std::size_t turn_index, const io::Interaction& interaction,
                                      const Schema& schema, const LinkerConfig& config) {
  DependenceVerdict v;
  if (turn_index == 0 || turn_index > interaction.turns.size()) return v;
  const auto& turn = interaction.turns[turn_index - 1];
  v.target = items_of(turn.ast, schema);
  v.current = matched(turn.utterance, schema, v.target, config);
  for (std::size_t i = 0; i + 1 < turn_index; ++i) {
    auto hist = matched(interaction.turns[i].utterance, schema, v.target, config);
    v.history.insert(hist.begin(), hist.end());
  }
  v.dependent = std::any_of(v.history.begin(), v.history.end(),
                            [&](const SchemaItem& s) { return v.current.count(s) == 0; });
  return v;
}

FilterResult filter_dataset(const std::vector<io::Interaction>& dialogues,
                            const io::Catalog& catalog, const LinkerConfig& config) {
  FilterResult result;
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_db;
  for (std::size_t i = 0; i < dialogues.size(); ++i) {
    const auto& inter = dialogues[i];
    const Schema& schema = catalog.at(inter.db_id);
    auto& counts = per_db[inter.db_id];
    for (std::size_t t = 1; t <= inter.turns.size(); ++t) {
      const bool dependent = t >= 2 && classify_dependence(t, inter, schema, config).dependent;
      if (dependent) {
        result.dependent.push_back({i, t});
        ++counts.first;
      } else {
        result.independent.push_back({i, t});
        ++counts.second;
      }
    }
  }
  nlohmann::json by_db = nlohmann::json::object();
  for (const auto& [db, counts] : per_db) {
    by_db[db] = {{"dependent", counts.first}, {"independent", counts.second}};
  }
  result.report = {{"dependent_count", result.dependent.size()},
                   {"independent_count", result.independent.size()},
                   {"per_db", by_db}};
  return result;
}

}  // namespace cgforge::link
