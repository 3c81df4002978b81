#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cgforge/io/dataset.hpp"
#include "cgforge/io/records.hpp"
#include "cgforge/patterns/library.hpp"
#include "cgforge/recombine/lint.hpp"

namespace cgforge::recombine {

// True iff the combination was never observed in training. Throws
// UnknownTemplate when either template is absent from the library.
bool is_novel(const std::string& base_hash, const std::string& mod_hash,
              const patterns::PatternLibrary& library);

struct GenerationConfig {
  std::uint64_t seed = 0;
  std::size_t cap_per_pair = 3;
  std::vector<LintRule> rules = default_rules();
};

struct GenerationResult {
  std::vector<Candidate> candidates;  // sorted by id
  std::size_t base_turns = 0;         // dev turns considered
  std::size_t pool_turns = 0;         // of which the base template is known
  std::size_t pairs = 0;              // (base turn, template) pairs tried
  std::map<std::string, std::size_t> rejections;  // reason -> count
  nlohmann::json report() const;
};

// Every turn of every dev interaction whose query template was seen in
// training is a base; each is combined with every library template whose
// combination with it is novel. Fills are sampled per pair with a seed
// derived from (seed, base, template), so results do not depend on
// iteration order.
GenerationResult generate_candidates(const patterns::PatternLibrary& library,
                                     const std::vector<io::Interaction>& base_pool,
                                     const io::Catalog& catalog,
                                     const GenerationConfig& config = {});

}  // namespace cgforge::recombine
