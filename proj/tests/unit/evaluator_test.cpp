#include <gtest/gtest.h>

#include <random>

#include "cgforge/core/error.hpp"
#include "cgforge/eval/evaluator.hpp"
#include "cgforge/link/linker.hpp"
#include "cgforge/patterns/diff.hpp"
#include "cgforge/sql/template.hpp"
#include "cgforge/sql/walk.hpp"
#include "test_support.hpp"

namespace cgforge {
namespace {

using nlohmann::json;
using testing::parse;
using testing::schema;

eval::MatchResult qm(const std::string& pred, const std::string& gold) {
  return eval::question_match(pred, gold, schema("flight_2"));
}

std::vector<std::string> false_components(const eval::MatchResult& r) {
  std::vector<std::string> out;
  for (const auto& [name, ok] : r.per_component) {
    if (!ok) out.push_back(name);
  }
  return out;
}

TEST(Decompose, Examples) {
  const auto d = eval::decompose(parse("SELECT count(*) FROM AIRLINES"));
  EXPECT_EQ(d.select, std::vector<std::string>{"count(*)"});
  EXPECT_EQ(d.select_no_agg, std::vector<std::string>{"*"});
  EXPECT_EQ(d.keywords, std::set<std::string>{"select"});

  EXPECT_EQ(eval::decompose(parse("SELECT Airline FROM AIRLINES WHERE Country = 'USA'")),
            eval::decompose(parse("SELECT Airline FROM AIRLINES WHERE Country = 'UK'")));

  const auto two = eval::decompose(parse("SELECT Airline FROM AIRLINES WHERE uid > 1 AND Country < 2"));
  EXPECT_EQ(two.and_or, std::set<std::string>{"and"});
  EXPECT_EQ(two.where.size(), 2u);
}

TEST(QuestionMatch, Examples) {
  const std::string gold = "SELECT Airline FROM AIRLINES WHERE Country = 'USA' ORDER BY Airline";
  auto same = qm(gold, gold);
  EXPECT_TRUE(same.exact);
  EXPECT_TRUE(false_components(same).empty());

  // The ORDER BY keyword is also part of the keyword component.
  auto missing_order = qm("SELECT Airline FROM AIRLINES WHERE Country = 'USA'", gold);
  EXPECT_FALSE(missing_order.exact);
  EXPECT_EQ(false_components(missing_order), (std::vector<std::string>{"keywords", "order_by"}));

  EXPECT_TRUE(qm("SELECT Airline FROM AIRLINES WHERE Country = 'France' ORDER BY Airline", gold).exact);

  auto garbage = qm("SELEC nonsense", gold);
  EXPECT_FALSE(garbage.exact);
  EXPECT_EQ(false_components(garbage).size(), eval::component_names().size());
  EXPECT_THROW(qm(gold, "SELECT nope FROM AIRLINES"), Error);
}

TEST(QuestionMatch, ComponentsAreOrderInsensitive) {
  EXPECT_TRUE(qm("SELECT Country, Airline FROM AIRLINES WHERE Country = 'a' AND uid = 1",
                 "SELECT Airline, Country FROM AIRLINES WHERE uid = 3 AND Country = 'b'")
                  .exact);
  auto op = qm("SELECT Airline FROM AIRLINES WHERE uid > 1", "SELECT Airline FROM AIRLINES WHERE uid < 1");
  EXPECT_EQ(false_components(op), std::vector<std::string>{"where"});
  auto agg = qm("SELECT max(uid) FROM AIRLINES", "SELECT min(uid) FROM AIRLINES");
  EXPECT_EQ(false_components(agg), std::vector<std::string>{"select"});
}

TEST(Difficulty, Examples) {
  EXPECT_EQ(eval::difficulty(parse("SELECT Airline FROM AIRLINES")), eval::Difficulty::kEasy);
  EXPECT_EQ(eval::difficulty(parse("SELECT Airline FROM AIRLINES WHERE Country = 'USA'")), eval::Difficulty::kEasy);
  const auto set_op = eval::difficulty(
      parse("SELECT Airline FROM AIRLINES INTERSECT SELECT Airline FROM AIRLINES WHERE Country = 'USA'"));
  EXPECT_TRUE(set_op == eval::Difficulty::kHard || set_op == eval::Difficulty::kExtra);
  EXPECT_EQ(eval::difficulty(parse("SELECT Airline FROM AIRLINES WHERE uid IN (SELECT Airline FROM FLIGHTS) "
                                   "AND Country = 'USA' ORDER BY Airline LIMIT 3")),
            eval::Difficulty::kExtra);
}

TEST(Difficulty, RuleTableAgainstCounts) {
  // Direct transcription of the table, checked over every small count triple.
  auto table = [](int c1, int c2, int o) {
    if (c1 <= 1 && c2 == 0 && o == 0) return eval::Difficulty::kEasy;
    if (c2 == 0 && ((o <= 2 && c1 <= 1) || (o == 0 && c1 <= 2))) return eval::Difficulty::kMedium;
    if ((c2 <= 1 && o <= 2 && c1 <= 2) || (c2 == 0 && c1 <= 3 && o <= 2)) return eval::Difficulty::kHard;
    return eval::Difficulty::kExtra;
  };
  const std::vector<std::string> corpus = {
      "SELECT Airline FROM AIRLINES",
      "SELECT Airline, Country FROM AIRLINES WHERE uid = 1 OR Country = 'x'",
      "SELECT count(*), max(uid) FROM AIRLINES GROUP BY Country ORDER BY Country LIMIT 1",
      "SELECT T1.Airline FROM AIRLINES AS T1 JOIN FLIGHTS AS T2 ON T1.uid = T2.Airline WHERE T1.Airline LIKE '%a%'",
      "SELECT Airline FROM AIRLINES EXCEPT SELECT Airline FROM AIRLINES WHERE Country = 'USA'",
  };
  for (const auto& sql : corpus) {
    const auto ast = parse(sql);
    const auto h = eval::hardness_counts(ast);
    EXPECT_EQ(eval::difficulty(ast), table(h.comp1, h.comp2, h.others)) << sql;
  }
  auto h = eval::hardness_counts(parse(corpus[2]));
  EXPECT_EQ(h.comp1, 3);
  EXPECT_EQ(h.others, 2);
  h = eval::hardness_counts(parse(corpus[3]));
  EXPECT_EQ(h.comp1, 3);  // where, join, like
}

io::DialogueSet load(const std::string& name) {
  return io::load_dialogues(testing::fixture(name), testing::catalog());
}

TEST(Report, HandScoredFixture) {
  const auto gold = load("eval_gold.json");
  const auto preds = io::load_predictions(testing::fixture("eval_pred.jsonl"));
  const auto expected = io::read_json(testing::fixture("eval_expected.json"));
  const auto report = eval::evaluate(gold.interactions, preds, testing::catalog());
  const auto j = report.to_json();
  for (const auto* key : {"overall", "by_difficulty", "by_turn", "error_categories"}) {
    EXPECT_EQ(j[key], expected[key]) << key;
  }
  for (const auto& [name, value] : expected["components"].items()) {
    EXPECT_NEAR(j["components"][name].get<double>(), value.get<double>(), 1e-9) << name;
  }
  for (const auto& q : report.questions) {
    const auto it = expected["categories"].find(q.question_id);
    const std::string want = it == expected["categories"].end() ? "correct" : it->get<std::string>();
    EXPECT_EQ(eval::to_string(q.category), want) << q.question_id;
  }
}

TEST(Report, GoldAgainstGoldAndEmptyPredictions) {
  const auto gold = load("train.json");
  std::vector<io::Prediction> perfect, empty;
  for (const auto& inter : gold.interactions) {
    for (std::size_t i = 1; i <= inter.turns.size(); ++i) {
      perfect.push_back({io::question_id(inter, i), inter.turns[i - 1].gold_sql});
      empty.push_back({io::question_id(inter, i), ""});
    }
  }
  auto all_slices = [](const json& j, auto&& check) {
    check(j["overall"]);
    for (const auto* group : {"by_split", "by_difficulty", "by_turn"}) {
      for (const auto& [k, v] : j[group].items()) {
        if (v["count"].template get<int>() > 0) check(v);
      }
    }
  };
  const auto good = eval::evaluate(gold.interactions, perfect, testing::catalog()).to_json();
  all_slices(good, [](const json& s) { EXPECT_DOUBLE_EQ(s["qm"].get<double>(), 100.0); });
  for (const auto& [k, v] : good["components"].items()) EXPECT_DOUBLE_EQ(v.get<double>(), 100.0);

  const auto bad = eval::evaluate(gold.interactions, empty, testing::catalog()).to_json();
  all_slices(bad, [](const json& s) { EXPECT_DOUBLE_EQ(s["qm"].get<double>(), 0.0); });
  const auto& cats = bad["error_categories"];
  EXPECT_EQ(cats["context_info"].get<int>() + cats["modification_info"].get<int>() + cats["both"].get<int>(),
            cats["incorrect"].get<int>());
  EXPECT_EQ(cats["incorrect"].get<std::size_t>(), empty.size());
}

TEST(Report, MissingPredictionsAreListedAndWrong) {
  const auto gold = load("eval_gold.json");
  const auto report = eval::evaluate(gold.interactions, {}, testing::catalog());
  EXPECT_EQ(report.missing_predictions.size(), 10u);
  EXPECT_EQ(report.to_json()["overall"]["exact"], 0);
}

TEST(CategorizeError, Examples) {
  const auto& s = schema("flight_2");
  const auto prev = parse("SELECT Airline FROM AIRLINES WHERE Country = 'USA'");
  const auto cur = parse("SELECT Airline FROM AIRLINES WHERE Country = 'USA' ORDER BY Airline");
  EXPECT_EQ(eval::categorize_error(cur, cur, &prev, s), eval::ErrorCategory::kCorrect);
  EXPECT_EQ(eval::categorize_error(prev, cur, &prev, s), eval::ErrorCategory::kModificationInfo);
  EXPECT_EQ(eval::categorize_error(parse("SELECT Airline FROM AIRLINES ORDER BY Airline"), cur, &prev, s),
            eval::ErrorCategory::kContextInfo);
  EXPECT_EQ(eval::categorize_error(std::nullopt, cur, nullptr, s), eval::ErrorCategory::kModificationInfo);
  // Keeping a condition the new turn removed is a modification miss.
  EXPECT_EQ(eval::categorize_error(cur, parse("SELECT Airline FROM AIRLINES ORDER BY Airline"), &cur, s),
            eval::ErrorCategory::kModificationInfo);
}

struct Randomize {
  std::mt19937_64& rng;
  void value(sql::Value& v) {
    if (v.kind == sql::Value::Kind::kNumber) {
      v.raw = std::to_string(rng() % 1000);
    } else {
      v = sql::Value::string("v" + std::to_string(rng() % 1000));
    }
  }
};

TEST(EvaluatorProperty, ValueSubstitutionAndExactness) {
  const auto train = load("train.json");
  std::mt19937_64 rng(11);
  std::vector<QueryAst> asts;
  for (const auto& inter : train.interactions) {
    for (const auto& t : inter.turns) asts.push_back(t.ast);
  }
  for (const auto& ast : asts) {
    QueryAst changed = ast;
    Randomize r{rng};
    sql::walk::query(changed, r);
    if (changed.limit) changed.limit = static_cast<std::int64_t>(rng() % 50 + 1);
    EXPECT_EQ(eval::difficulty(changed), eval::difficulty(ast));
    EXPECT_TRUE(eval::question_match(changed, ast).exact);
  }
  // exact <=> all components, over every ordered pair.
  for (const auto& a : asts) {
    for (const auto& b : asts) {
      const auto m = eval::question_match(a, b);
      bool all = true;
      for (const auto& [name, ok] : m.per_component) all = all && ok;
      ASSERT_EQ(m.exact, all);
    }
  }
}

TEST(TagSplits, TrainingAgainstItselfHasNoCG) {
  const auto train = load("train.json");
  const auto filtered = link::filter_dataset(train.interactions, testing::catalog());
  const auto library = patterns::collect_patterns(train.interactions, filtered.dependent, testing::catalog()).library;
  const auto tags = eval::tag_splits(train.interactions, filtered.dependent, testing::catalog(), library);
  std::size_t cg = 0, non_cg = 0, total = 0;
  for (const auto& inter : train.interactions) total += inter.turns.size();
  for (const auto& [id, tag] : tags) {
    cg += tag == eval::SplitTag::kCG;
    non_cg += tag == eval::SplitTag::kNonCG;
  }
  EXPECT_EQ(tags.size(), total);
  EXPECT_EQ(cg, 0u);
  EXPECT_GT(non_cg, 0u);
}

TEST(TagSplits, DevAgainstTrainDefinition) {
  const auto train = load("train.json");
  const auto dev = load("dev.json");
  const auto& catalog = testing::catalog();
  const auto train_dep = link::filter_dataset(train.interactions, catalog).dependent;
  const auto library = patterns::collect_patterns(train.interactions, train_dep, catalog).library;
  std::vector<link::TurnRef> all_later;
  for (std::size_t i = 0; i < dev.interactions.size(); ++i) {
    for (std::size_t t = 2; t <= dev.interactions[i].turns.size(); ++t) all_later.push_back({i, t});
  }
  const auto tags = eval::tag_splits(dev.interactions, all_later, catalog, library);
  // Recompute each tag from the definition.
  for (const auto& ref : all_later) {
    const auto& inter = dev.interactions[ref.interaction];
    const auto& s = catalog.at(inter.db_id);
    const auto& prev = inter.turns[ref.turn_index - 2].ast;
    auto diff = patterns::diff_asts(prev, inter.turns[ref.turn_index - 1].ast, s);
    auto want = eval::SplitTag::kOther;
    if (auto* mod = std::get_if<patterns::Modification>(&diff)) {
      const auto b = sql::template_of(prev, s).hash;
      const auto m = patterns::anonymize(*mod, s, &prev).hash;
      if (library.combos_seen.count({b, m})) {
        want = eval::SplitTag::kNonCG;
      } else if (library.has_base(b) && library.has_template(m)) {
        want = eval::SplitTag::kCG;
      }
    }
    EXPECT_EQ(tags.at(io::question_id(inter, ref.turn_index)), want);
  }
  const auto table = eval::split_table(dev.interactions, tags);
  const auto& total = table.back();
  EXPECT_EQ(total["database"], "total");
  EXPECT_EQ(total["CG"].get<int>() + total["NonCG"].get<int>() + total["other"].get<int>(),
            total["questions"].get<int>());
}

TEST(Tables, CsvAndTagDistribution) {
  const auto train = load("train.json");
  const auto dep = link::filter_dataset(train.interactions, testing::catalog()).dependent;
  const auto library = patterns::collect_patterns(train.interactions, dep, testing::catalog()).library;
  const auto dist = eval::tag_distribution(library);
  ASSERT_FALSE(dist.empty());
  std::size_t templates = 0, tagged = 0;
  for (const auto& row : dist) templates += row["templates"].get<std::size_t>();
  for (const auto& [hash, t] : library.templates) tagged += !patterns::component_tags(t).empty();
  EXPECT_EQ(templates, tagged);
  const auto top = std::max_element(dist.begin(), dist.end(), [](const json& a, const json& b) {
    return a["support"].get<int>() < b["support"].get<int>();
  });
  EXPECT_EQ((*top)["tag"], "where");
  EXPECT_EQ(eval::to_csv(json::array({{{"a", "x,y"}, {"b", 2}}}), {"a", "b"}), "a,b\n\"x,y\",2\n");
}

}  // namespace
}  // namespace cgforge
