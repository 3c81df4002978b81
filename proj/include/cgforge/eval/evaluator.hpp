#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cgforge/io/dataset.hpp"
#include "cgforge/link/linker.hpp"
#include "cgforge/patterns/library.hpp"
#include "json.hpp"

namespace cgforge::eval {

// Exact-set-match decomposition. Items are canonical printed fragments with
// every literal erased; multisets are sorted vectors.
struct ComponentSets {
  std::vector<std::string> select;         // agg(distinct value)
  std::vector<std::string> select_no_agg;  // value units only
  std::vector<std::string> where;          // lhs op rhs-shape
  std::vector<std::string> where_no_op;    // lhs only
  std::vector<std::string> group_by;       // group columns + having skeletons
  std::vector<std::string> group_by_no_having;
  std::vector<std::string> order_by;       // items with direction, plus limit presence
  std::set<std::string> and_or;            // connectives used in where/having
  std::set<std::string> keywords;
  std::vector<std::string> from;           // table names / derived-table shapes
  std::vector<std::string> iuen;           // set operation kind + right-hand shape

  friend bool operator==(const ComponentSets&, const ComponentSets&) = default;
};

// Component names in report order.
const std::vector<std::string>& component_names();

ComponentSets decompose(const QueryAst& ast);

struct MatchResult {
  bool exact = false;
  std::map<std::string, bool> per_component;
};

// Never throws on a bad prediction: an unparsable prediction is a miss on
// every component. Throws ParseError when the gold query does not parse.
MatchResult question_match(const std::string& pred_sql, const std::string& gold_sql, const Schema& schema);
MatchResult question_match(const QueryAst& pred, const QueryAst& gold);

enum class Difficulty { kEasy, kMedium, kHard, kExtra };
std::string_view to_string(Difficulty d);

struct HardnessCounts {
  int comp1 = 0;   // where, group by, order by, limit, joins, or, like
  int comp2 = 0;   // nested queries and set operations
  int others = 0;  // multi-agg, multi-select, multi-condition, multi-group
};
HardnessCounts hardness_counts(const QueryAst& ast);
Difficulty difficulty(const QueryAst& ast);

enum class SplitTag { kCG, kNonCG, kOther };
std::string_view to_string(SplitTag t);

// Tags every turn by question id. A turn is tagged only when it is listed
// in `dependent` and diffs against its predecessor into a modification:
// CG when the base and modification templates are both in the library but
// their pairing is not; NonCG when the pairing is; other otherwise.
std::map<std::string, SplitTag> tag_splits(const std::vector<io::Interaction>& dialogues,
                                           const std::vector<link::TurnRef>& dependent,
                                           const io::Catalog& catalog,
                                           const patterns::PatternLibrary& library);

enum class ErrorCategory { kCorrect, kContextInfo, kModificationInfo, kBoth };
std::string_view to_string(ErrorCategory c);

// Component atoms are (component, item) pairs over the decomposition. The
// modification atoms are those gold_cur adds to or drops from gold_prev; the
// context atoms are those the two share. A wrong prediction misses
// modification info when it lacks an added atom or keeps a dropped one, and
// misses context info when it lacks a shared atom. Wrong predictions with
// neither, first turns and non-incremental gold pairs count as
// modification_info.
ErrorCategory categorize_error(const std::optional<QueryAst>& pred, const QueryAst& gold_cur,
                               const QueryAst* gold_prev, const Schema& schema);

struct QuestionScore {
  std::string question_id;
  std::size_t turn_index = 0;
  bool predicted = true;  // false when the prediction was missing
  MatchResult match;
  Difficulty difficulty = Difficulty::kEasy;
  SplitTag split = SplitTag::kOther;
  ErrorCategory category = ErrorCategory::kCorrect;
};

struct Report {
  std::vector<QuestionScore> questions;
  std::vector<std::string> missing_predictions;
  nlohmann::json to_json() const;
};

// Scores one prediction per gold question id. `splits` may be empty.
Report evaluate(const std::vector<io::Interaction>& gold, const std::vector<io::Prediction>& predictions,
                const io::Catalog& catalog, const std::map<std::string, SplitTag>& splits = {},
                unsigned threads = 0);

// Count tables. split_table: per-database and total question counts by
// split tag. tag_distribution: modification templates and their support by
// clause-combination tag (select-only templates carry no tag and are not
// counted).
nlohmann::json split_table(const std::vector<io::Interaction>& dialogues,
                           const std::map<std::string, SplitTag>& splits);
nlohmann::json tag_distribution(const patterns::PatternLibrary& library);
// Renders an array of flat objects as CSV with the given columns.
std::string to_csv(const nlohmann::json& rows, const std::vector<std::string>& columns);

}  // namespace cgforge::eval
