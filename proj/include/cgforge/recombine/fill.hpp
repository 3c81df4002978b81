#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "cgforge/patterns/mod_template.hpp"

namespace cgforge::recombine {

// Every removed item of `mod` occurs in `base` (as a select item, WHERE or
// HAVING conjunct, GROUP BY column, ORDER BY item or the set operation).
bool removals_present(const patterns::Modification& mod, const QueryAst& base);

// Slot fills of `t` for `base` that satisfy every template constraint and
// whose removals are present in `base`. Slots of removed items are bound by
// matching against the base; the remaining slots range over the schema.
// With a cap, returns a uniform sample of at most `cap` fills determined by
// `seed`. Result is sorted. Throws NoFill when no fill exists.
std::vector<patterns::SlotFill> enumerate_fills(const patterns::ModificationTemplate& t,
                                                const QueryAst& base, const Schema& schema,
                                                std::uint64_t seed,
                                                std::optional<std::size_t> cap);

}  // namespace cgforge::recombine
