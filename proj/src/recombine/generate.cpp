#include "cgforge/recombine/generate.hpp"

#include <algorithm>

#include "cgforge/core/error.hpp"
#include "cgforge/core/hash.hpp"
#include "cgforge/patterns/diff.hpp"
#include "cgforge/recombine/apply.hpp"
#include "cgforge/recombine/fill.hpp"
#include "cgforge/sql/printer.hpp"
#include "cgforge/sql/template.hpp"

namespace cgforge::recombine {

bool is_novel(const std::string& base_hash, const std::string& mod_hash,
              const patterns::PatternLibrary& library) {
  if (!library.has_base(base_hash)) throw UnknownTemplate("base template " + base_hash);
  if (!library.has_template(mod_hash)) throw UnknownTemplate("modification template " + mod_hash);
  return library.combos_seen.count({base_hash, mod_hash}) == 0;
}

nlohmann::json GenerationResult::report() const {
  return {{"candidates", candidates.size()},
          {"base_turns", base_turns},
          {"pool_turns", pool_turns},
          {"pairs", pairs},
          {"rejections", rejections}};
}

GenerationResult generate_candidates(const patterns::PatternLibrary& library,
                                     const std::vector<io::Interaction>& base_pool,
                                     const io::Catalog& catalog, const GenerationConfig& config) {
  GenerationResult out;
  std::map<std::string, Candidate> by_id;
  auto reject = [&](const std::string& reason) { out.rejections[reason] += 1; };

  for (const auto& interaction : base_pool) {
    const Schema& schema = catalog.at(interaction.db_id);
    CandidateBase prefix{interaction.id, 0, {}, {}};
    for (std::size_t i = 0; i < interaction.turns.size(); ++i) {
      const auto& turn = interaction.turns[i];
      prefix.turn_index = i + 1;
      prefix.utterances.push_back(turn.utterance);
      prefix.sqls.push_back(turn.gold_sql);
      ++out.base_turns;
      const QueryAst& base = turn.ast;
      const std::string base_hash = sql::template_of(base, schema).hash;
      if (!library.has_base(base_hash)) continue;
      ++out.pool_turns;

      for (const auto& [mod_hash, t] : library.templates) {
        if (!is_novel(base_hash, mod_hash, library)) {
          reject("seen-combination");
          continue;
        }
        ++out.pairs;
        const std::uint64_t pair_seed =
            fnv1a64(std::to_string(config.seed) + "|" + interaction.id + "|" +
                    std::to_string(i + 1) + "|" + mod_hash);
        std::vector<patterns::SlotFill> fills;
        try {
          fills = enumerate_fills(t, base, schema, pair_seed, config.cap_per_pair);
        } catch (const NoFill&) {
          reject("no-fill");
          continue;
        }
        for (const auto& fill : fills) {
          QueryAst next;
          try {
            next = apply_modification(base, patterns::instantiate(t, fill), schema);
          } catch (const ApplyError&) {
            reject("apply-error");
            continue;
          }
          if (next == base) {
            reject("no-op");
            continue;
          }
          if (const auto v = lint(next, config.rules); !v.empty()) {
            reject("lint:" + v.front().rule_id);
            continue;
          }
          // The realized edit must anonymize back to the template it came from.
          auto diff = patterns::diff_asts(base, next, schema);
          const auto* mod = std::get_if<patterns::Modification>(&diff);
          if (!mod || patterns::anonymize(*mod, schema, &base).hash != mod_hash) {
            reject("template-drift");
            continue;
          }
          Candidate c;
          c.db_id = interaction.db_id;
          c.base = prefix;
          c.new_sql = sql::print_sql(next);
          c.id = candidate_id(c.db_id, c.base, c.new_sql);
          c.base_template_hash = base_hash;
          c.modification_template_hash = mod_hash;
          if (!by_id.emplace(c.id, std::move(c)).second) reject("duplicate");
        }
      }
    }
  }
  for (auto& [id, c] : by_id) out.candidates.push_back(std::move(c));
  return out;
}

}  // namespace cgforge::recombine
