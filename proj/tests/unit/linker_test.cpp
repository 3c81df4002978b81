#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cgforge/link/linker.hpp"
#include "test_support.hpp"

namespace cgforge {
namespace {

const Schema& flights() { return testing::schema("flight_2"); }

SchemaItem table(const std::string& name) { return SchemaItem::of_table(*flights().find_table(name)); }
SchemaItem column(const std::string& t, const std::string& c) {
  const int ti = *flights().find_table(t);
  return SchemaItem::of_column(ti, *flights().find_column(ti, c));
}

TEST(Tokenize, StemAndSplit) {
  EXPECT_EQ(link::tokenize("What's its Abbreviation?"), (std::vector<std::string>{"what", "s", "its", "abbreviation"}));
  EXPECT_EQ(link::stem("airlines"), "airline");
  EXPECT_EQ(link::stem("countries"), "country");
  EXPECT_EQ(link::stem("matches"), "match");
  EXPECT_EQ(link::stem("status"), "status");
  EXPECT_EQ(link::stem("its"), "its");
}

TEST(LinkMentions, Examples) {
  auto m = link::link_mentions("show all airlines", flights(), {table("AIRLINES")});
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].item, table("AIRLINES"));
  EXPECT_EQ(m[0].start, 2u);

  m = link::link_mentions("what is its abbreviation", flights(), {column("AIRLINES", "Abbreviation")});
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].kind, link::Mention::Kind::kExact);

  EXPECT_TRUE(link::link_mentions("show all airlines", flights(), {}).empty());

  // Multi-token names: contiguous n-gram is exact, a long single token is partial.
  m = link::link_mentions("list the source airport", flights(), {column("FLIGHTS", "SourceAirport")});
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].kind, link::Mention::Kind::kExact);
  m = link::link_mentions("which airport", flights(), {column("FLIGHTS", "SourceAirport")});
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].kind, link::Mention::Kind::kPartial);
  // Short tokens never match partially.
  EXPECT_TRUE(link::link_mentions("flight no", flights(), {column("AIRLINES", "uid")}).empty());
}

io::Interaction interaction(std::vector<std::pair<std::string, std::string>> turns) {
  io::Interaction inter{"x", "flight_2", {}};
  for (auto& [u, q] : turns) inter.turns.push_back({u, q, testing::parse(q)});
  return inter;
}

TEST(ClassifyDependence, Examples) {
  const auto inter = interaction({{"Which airline is JetBlue Airways?", "SELECT Airline FROM AIRLINES WHERE Airline = 'JetBlue Airways'"},
                                  {"What is its abbreviation?", "SELECT Abbreviation FROM AIRLINES WHERE Airline = 'JetBlue Airways'"},
                                  {"What is the abbreviation of the airline JetBlue Airways?",
                                   "SELECT Abbreviation FROM AIRLINES WHERE Airline = 'JetBlue Airways'"}});
  EXPECT_FALSE(link::classify_dependence(1, inter, flights()).dependent);
  const auto v = link::classify_dependence(2, inter, flights());
  EXPECT_TRUE(v.dependent);
  EXPECT_TRUE(v.history.count(column("AIRLINES", "Airline")));
  EXPECT_FALSE(v.current.count(column("AIRLINES", "Airline")));
  EXPECT_FALSE(link::classify_dependence(3, inter, flights()).dependent);
}

TEST(FilterDataset, FixtureMatchesHandLabels) {
  const auto train = io::load_dialogues(testing::fixture("train.json"), testing::catalog());
  ASSERT_EQ(train.interactions.size(), 50u);
  const auto labels = io::read_json(testing::fixture("train_labels.json"));
  const auto result = link::filter_dataset(train.interactions, testing::catalog());
  std::map<std::string, std::string> got;
  for (const auto& r : result.dependent) got[io::question_id(train.interactions[r.interaction], r.turn_index)] = "dependent";
  for (const auto& r : result.independent) {
    got[io::question_id(train.interactions[r.interaction], r.turn_index)] = "independent";
  }
  const auto want = labels.get<std::map<std::string, std::string>>();
  EXPECT_EQ(got, want);
  EXPECT_EQ(result.report["dependent_count"], 43);
  EXPECT_EQ(result.report["independent_count"], 70);
}

TEST(FilterDataset, SingleTurnAndReordering) {
  const auto single = interaction({{"Show all airlines.", "SELECT Airline FROM AIRLINES"}});
  EXPECT_TRUE(link::filter_dataset({single}, testing::catalog()).dependent.empty());

  auto train = io::load_dialogues(testing::fixture("train.json"), testing::catalog()).interactions;
  auto ids = [&](const std::vector<io::Interaction>& ds) {
    std::set<std::string> out;
    for (const auto& r : link::filter_dataset(ds, testing::catalog()).dependent) {
      out.insert(io::question_id(ds[r.interaction], r.turn_index));
    }
    return out;
  };
  const auto before = ids(train);
  std::mt19937 rng(3);
  std::shuffle(train.begin(), train.end(), rng);
  EXPECT_EQ(ids(train), before);
}

TEST(LinkerProperty, MonotoneAndVerdictIsSetDifference) {
  auto train = io::load_dialogues(testing::fixture("train.json"), testing::catalog()).interactions;
  std::vector<std::string> pool;
  for (const auto& inter : train) {
    for (const auto& t : inter.turns) pool.push_back(t.utterance);
  }
  std::mt19937 rng(5);
  for (const auto& inter : train) {
    const auto& s = testing::schema(inter.db_id);
    for (std::size_t i = 2; i <= inter.turns.size(); ++i) {
      const auto v = link::classify_dependence(i, inter, s);
      const bool diff = std::any_of(v.history.begin(), v.history.end(),
                                    [&](const SchemaItem& x) { return !v.current.count(x); });
      EXPECT_EQ(v.dependent, diff);

      auto longer = inter;
      longer.turns.insert(longer.turns.begin(), io::Turn{pool[rng() % pool.size()], "", {}});
      const auto w = link::classify_dependence(i + 1, longer, s);
      EXPECT_TRUE(std::includes(w.history.begin(), w.history.end(), v.history.begin(), v.history.end()));

      auto shorter = inter;
      auto& u = shorter.turns[i - 1].utterance;
      if (auto pos = u.find(' '); pos != std::string::npos) u = u.substr(pos + 1);
      const auto x = link::classify_dependence(i, shorter, s);
      EXPECT_TRUE(std::includes(v.current.begin(), v.current.end(), x.current.begin(), x.current.end()));
    }
  }
}

}  // namespace
}  // namespace cgforge
