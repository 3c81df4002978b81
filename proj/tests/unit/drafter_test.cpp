#include <gtest/gtest.h>

#include "cgforge/core/error.hpp"
#include "cgforge/draft/drafter.hpp"
#include "cgforge/patterns/diff.hpp"
#include "test_support.hpp"

namespace cgforge {
namespace {

using testing::parse;
using testing::schema;

draft::DraftRequest request(const std::string& prev, const std::string& cur,
                            const std::string& db = "flight_2") {
  auto r = patterns::diff_asts(parse(prev, db), parse(cur, db), schema(db));
  return {std::get<patterns::Modification>(r), prev, "Which airlines are there?"};
}

std::string rule(const std::string& prev, const std::string& cur, const std::string& db = "flight_2") {
  return draft::draft_rule_based(request(prev, cur, db), schema(db));
}

TEST(DraftRuleBased, TemplateTable) {
  EXPECT_EQ(rule("SELECT Airline FROM AIRLINES", "SELECT Airline FROM AIRLINES WHERE Country = 'USA'"),
            "Only show the ones where country is USA.");
  EXPECT_EQ(rule("SELECT Airline FROM AIRLINES ORDER BY Country", "SELECT Airline FROM AIRLINES ORDER BY Airline DESC"),
            "Instead, sort the results by airline in descending order.");
  EXPECT_EQ(rule("SELECT Airline FROM AIRLINES ORDER BY uid", "SELECT Airline FROM AIRLINES ORDER BY uid LIMIT 5"),
            "Just show the top 5.");
}

TEST(DraftRuleBased, MultipleEditsAndPhrases) {
  EXPECT_EQ(rule("SELECT Airline FROM AIRLINES",
                 "SELECT Airline FROM AIRLINES WHERE Country = 'USA' ORDER BY Abbreviation"),
            "Only show the ones where country is USA and also sort the results by abbreviation in "
            "ascending order.");
  EXPECT_EQ(rule("SELECT T1.Airline FROM AIRLINES AS T1 JOIN FLIGHTS AS T2 ON T1.uid = T2.Airline "
                 "GROUP BY T1.Airline",
                 "SELECT T1.Airline FROM AIRLINES AS T1 JOIN FLIGHTS AS T2 ON T1.uid = T2.Airline "
                 "GROUP BY T1.Airline HAVING count(*) > 10"),
            "Only keep the groups where the number of records is greater than 10.");
  EXPECT_EQ(rule("SELECT Airline FROM AIRLINES", "SELECT Airline, Country FROM AIRLINES"),
            "Also show their country.");
  EXPECT_EQ(rule("SELECT Airline FROM AIRLINES", "SELECT Airline FROM AIRLINES WHERE Country = ?"),
            "Only show the ones where country is a given value.");
}

TEST(DraftRuleBased, UnderscoresWithoutDisplayNames) {
  Schema bare = schema("wta_1");
  for (auto& c : bare.columns) c.display_name.clear();
  auto req = patterns::diff_asts(parse("SELECT first_name FROM players", "wta_1"),
                                 parse("SELECT first_name FROM players ORDER BY birth_date DESC", "wta_1"),
                                 bare);
  EXPECT_EQ(draft::draft_rule_based({std::get<patterns::Modification>(req), "x", "y"}, bare),
            "Sort the results by birth date in descending order.");
}

TEST(DraftRuleBased, IsPure) {
  const auto req = request("SELECT Airline FROM AIRLINES", "SELECT Airline FROM AIRLINES WHERE uid > 3");
  EXPECT_EQ(draft::draft_rule_based(req, schema("flight_2")), draft::draft_rule_based(req, schema("flight_2")));
}

draft::ExternalCommand sh(const std::string& script, int timeout_ms = 5000) {
  return {{"/bin/sh", "-c", script}, std::chrono::milliseconds(timeout_ms)};
}

TEST(DraftExternal, StubProgramText) {
  const auto req = request("SELECT Airline FROM AIRLINES", "SELECT Airline FROM AIRLINES WHERE Country = 'USA'");
  EXPECT_EQ(draft::draft_external(req, sh("cat >/dev/null; echo '{\"utterance\": \"  Only US ones? \"}'")),
            "Only US ones?");
}

TEST(DraftExternal, ReceivesTheRequest) {
  const auto req = request("SELECT Airline FROM AIRLINES", "SELECT Airline FROM AIRLINES WHERE Country = 'USA'");
  // Echo the request's previous SQL back.
  const auto out = draft::draft_external(
      req, sh("python3 -c 'import json,sys; r=json.load(sys.stdin); "
              "print(json.dumps({\"utterance\": r[\"prev_sql\"] + \" / \" + r[\"modification\"][0][\"sql\"]}))'"));
  EXPECT_EQ(out, "SELECT Airline FROM AIRLINES / AIRLINES.Country = 'USA'");
}

TEST(DraftExternal, Failures) {
  const auto req = request("SELECT Airline FROM AIRLINES", "SELECT Airline FROM AIRLINES WHERE Country = 'USA'");
  EXPECT_THROW(draft::draft_external(req, sh("sleep 5", 200)), ExternalFailure);
  try {
    draft::draft_external(req, sh("cat >/dev/null; echo not-json"));
    FAIL() << "expected ExternalFailure";
  } catch (const ExternalFailure& e) {
    EXPECT_NE(std::string(e.what()).find("malformed"), std::string::npos);
  }
  EXPECT_THROW(draft::draft_external(req, sh("exit 3")), ExternalFailure);
  EXPECT_THROW(draft::draft_external(req, {{"/nonexistent/generator"}, std::chrono::milliseconds(1000)}),
               ExternalFailure);
}

Candidate candidate(const std::string& prev, const std::string& next) {
  Candidate c;
  c.db_id = "flight_2";
  c.base = {"i1", 1, {"Which airlines are there?"}, {prev}};
  c.new_sql = next;
  c.id = candidate_id(c.db_id, c.base, c.new_sql);
  return c;
}

TEST(DraftCandidates, FallbackIsRecorded) {
  std::vector<Candidate> cs = {
      candidate("SELECT Airline FROM AIRLINES", "SELECT AIRLINES.Airline FROM AIRLINES WHERE AIRLINES.Country = ?"),
      candidate("SELECT Airline FROM AIRLINES", "SELECT AIRLINES.Airline FROM AIRLINES ORDER BY AIRLINES.uid ASC")};
  draft::DraftOptions opts;
  opts.external = true;
  opts.command = sh("exit 1");
  opts.max_concurrency = 2;
  const auto r = draft::draft_candidates(cs, testing::catalog(), opts);
  ASSERT_EQ(r.candidates.size(), 2u);
  for (const auto& c : r.candidates) {
    EXPECT_EQ(c.draft_source, "rule-fallback");
    EXPECT_FALSE(c.draft_utterance.empty());
  }
  EXPECT_EQ(r.failures.size(), 2u);
  const auto plain = draft::draft_candidates(cs, testing::catalog());
  EXPECT_EQ(plain.sources.at("rule"), 2u);
  EXPECT_EQ(plain.candidates[0].draft_utterance, r.candidates[0].draft_utterance);
}

}  // namespace
}  // namespace cgforge
