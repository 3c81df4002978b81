#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "cgforge/core/error.hpp"
#include "cgforge/review/server.hpp"
#include "cgforge/review/store.hpp"
#include "httplib.h"
#include "test_support.hpp"

namespace cgforge {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct TempDir {
  fs::path path;
  TempDir() {
    static int n = 0;
    path = fs::temp_directory_path() / ("cgforge_review_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Candidate make_candidate(const std::string& new_sql, const std::string& draft = "Only show the ones where country is USA.") {
  Candidate c;
  c.db_id = "flight_2";
  c.base.interaction_id = "train_1";
  c.base.turn_index = 1;
  c.base.utterances = {"Which airlines are there?"};
  c.base.sqls = {"SELECT Airline FROM AIRLINES"};
  c.new_sql = new_sql;
  c.base_template_hash = "b";
  c.modification_template_hash = "m";
  c.draft_utterance = draft;
  c.draft_source = "rule";
  c.id = candidate_id(c.db_id, c.base, c.new_sql);
  return c;
}

std::vector<Candidate> sample_candidates() {
  return {make_candidate("SELECT Airline FROM AIRLINES WHERE Country = 'USA'"),
          make_candidate("SELECT Airline FROM AIRLINES ORDER BY Airline DESC", "Sort them by airline descending."),
          make_candidate("SELECT Airline, Country FROM AIRLINES", "Also show their country.")};
}

Decision decision(const std::string& id, const std::string& reviewer, Action a,
                  std::optional<std::string> text = std::nullopt) {
  Decision d;
  d.candidate_id = id;
  d.reviewer = reviewer;
  d.action = a;
  d.revised_utterance = std::move(text);
  d.timestamp = "2024-01-01T00:00:00Z";
  return d;
}

TEST(ResolveStatus, Examples) {
  const auto c = make_candidate("SELECT Airline FROM AIRLINES WHERE Country = 'USA'");
  using review::resolve_status;
  EXPECT_EQ(resolve_status(c, {}).status, Status::kPending);
  EXPECT_EQ(resolve_status(c, {decision(c.id, "a", Action::kAccept)}).status, Status::kPending);

  auto accepted = resolve_status(c, {decision(c.id, "a", Action::kAccept), decision(c.id, "b", Action::kAccept)});
  EXPECT_EQ(accepted.status, Status::kAccepted);
  EXPECT_EQ(accepted.final_utterance, c.draft_utterance);

  EXPECT_EQ(resolve_status(c, {decision(c.id, "a", Action::kAccept), decision(c.id, "b", Action::kReject)}).status,
            Status::kDisputed);

  auto revised = resolve_status(
      c, {decision(c.id, "a", Action::kRevise, "Only USA ones."), decision(c.id, "b", Action::kAccept)});
  EXPECT_EQ(revised.status, Status::kRevised);
  EXPECT_EQ(revised.final_utterance, "Only USA ones.");

  auto rejected = resolve_status(c, {decision(c.id, "a", Action::kReject), decision(c.id, "b", Action::kReject)});
  EXPECT_EQ(rejected.status, Status::kRejected);
  EXPECT_FALSE(rejected.final_utterance);
}

TEST(ResolveStatus, LatestDecisionPerReviewerCounts) {
  const auto c = make_candidate("SELECT Airline FROM AIRLINES WHERE Country = 'USA'");
  auto r = review::resolve_status(c, {decision(c.id, "a", Action::kReject), decision(c.id, "b", Action::kAccept),
                                      decision(c.id, "a", Action::kAccept)});
  EXPECT_EQ(r.status, Status::kAccepted);
  // Two decisions by one reviewer are still one review.
  EXPECT_EQ(review::resolve_status(c, {decision(c.id, "a", Action::kAccept), decision(c.id, "a", Action::kAccept)})
                .status,
            Status::kPending);
  // 2-1 majority of rejects.
  EXPECT_EQ(review::resolve_status(c, {decision(c.id, "a", Action::kReject), decision(c.id, "b", Action::kReject),
                                       decision(c.id, "c", Action::kAccept)})
                .status,
            Status::kRejected);
}

TEST(ReviewStore, EnqueueIsIdempotentAndValidates) {
  TempDir tmp;
  review::ReviewStore store(tmp.path, &testing::catalog());
  auto first = store.enqueue(sample_candidates());
  EXPECT_EQ(first.added, 3u);
  auto again = store.enqueue(sample_candidates());
  EXPECT_EQ(again.added, 0u);
  EXPECT_EQ(again.already_present, 3u);

  auto bad = make_candidate("SELECT Airline FROM AIRLINES WHERE Country = 'USA'");
  bad.id = "cdeadbeef";
  auto empty_draft = make_candidate("SELECT Country FROM AIRLINES", "");
  auto unparsable = make_candidate("SELECT nope FROM AIRLINES");
  auto r = store.enqueue({bad, empty_draft, unparsable});
  EXPECT_EQ(r.added, 0u);
  EXPECT_EQ(r.rejected.size(), 3u);
  EXPECT_EQ(store.stats().total, 3u);

  review::ReviewStore reopened(tmp.path);
  EXPECT_EQ(reopened.all().size(), 3u);
}

TEST(ReviewStore, DecisionErrors) {
  TempDir tmp;
  review::ReviewStore store(tmp.path);
  store.enqueue(sample_candidates());
  const auto id = sample_candidates()[0].id;
  EXPECT_THROW(store.record_decision(decision("cmissing", "a", Action::kAccept)), UnknownCandidate);
  EXPECT_THROW(store.record_decision(decision(id, "", Action::kAccept)), InvalidDecision);
  EXPECT_THROW(store.record_decision(decision(id, "a", Action::kRevise)), InvalidDecision);
  EXPECT_THROW(store.record_decision(decision(id, "a", Action::kRevise, "")), InvalidDecision);
  EXPECT_EQ(store.get(id)->reviews.size(), 0u);
}

TEST(ReviewStore, ReviewerFilterAndExport) {
  TempDir tmp;
  review::ReviewStore store(tmp.path);
  const auto cs = sample_candidates();
  store.enqueue(cs);
  store.record_decision(decision(cs[0].id, "a", Action::kAccept));
  store.record_decision(decision(cs[0].id, "b", Action::kAccept));
  store.record_decision(decision(cs[1].id, "a", Action::kRevise, "Sort by airline, descending."));
  store.record_decision(decision(cs[1].id, "b", Action::kAccept));
  store.record_decision(decision(cs[2].id, "a", Action::kReject));

  EXPECT_EQ(store.list(std::nullopt, std::string("a")).size(), 0u);
  EXPECT_EQ(store.list(std::nullopt, std::string("b")).size(), 1u);
  EXPECT_EQ(store.list(Status::kPending).size(), 1u);

  const auto stats = store.stats().to_json();
  EXPECT_EQ(stats["accepted"], 1);
  EXPECT_EQ(stats["revised"], 1);
  EXPECT_EQ(stats["pending"], 1);
  EXPECT_EQ(stats["total"], 3);

  const auto exported = review::export_benchmark(store.all());
  ASSERT_EQ(exported.size(), 2u);
  for (const auto& rec : exported) {
    const auto& turns = rec["interaction"];
    ASSERT_EQ(turns.size(), 2u);
    EXPECT_EQ(turns[0]["utterance"], "Which airlines are there?");
    EXPECT_EQ(turns[1]["utterance"], rec["final"]["utterance"]);
    if (rec["id"] == cs[1].id) EXPECT_EQ(rec["final"]["utterance"], "Sort by airline, descending.");
    if (rec["id"] == cs[0].id) EXPECT_EQ(rec["final"]["utterance"], cs[0].draft_utterance);
  }
  EXPECT_LT(exported[0]["id"].get<std::string>(), exported[1]["id"].get<std::string>());
}

TEST(ReviewStore, TornFinalLineIgnoredCorruptMiddleRejected) {
  TempDir tmp;
  const auto cs = sample_candidates();
  {
    review::ReviewStore store(tmp.path);
    store.enqueue(cs);
    store.record_decision(decision(cs[0].id, "a", Action::kAccept));
  }
  {
    std::ofstream log(tmp.path / "decisions.log", std::ios::app);
    log << R"({"candidate_id":")" << cs[0].id << R"(","reviewer":"b","act)";
  }
  {
    review::ReviewStore store(tmp.path);
    EXPECT_EQ(store.torn_lines(), 1u);
    EXPECT_EQ(store.get(cs[0].id)->status, Status::kPending);
  }
  {
    std::ofstream log(tmp.path / "decisions.log", std::ios::app);
    log << "\n" << to_json(decision(cs[0].id, "b", Action::kAccept)).dump() << "\n";
  }
  EXPECT_THROW(review::ReviewStore{tmp.path}, StoreError);
}

// Independent oracle: a plain tally over the latest decision per reviewer.
Status oracle_status(const std::vector<std::pair<std::string, Action>>& log) {
  std::map<std::string, Action> latest;
  for (const auto& [who, a] : log) latest[who] = a;
  const int n = static_cast<int>(latest.size());
  if (n < 2) return Status::kPending;
  int rejects = 0, revises = 0;
  for (const auto& [who, a] : latest) {
    rejects += a == Action::kReject;
    revises += a == Action::kRevise;
  }
  if (2 * rejects > n) return Status::kRejected;
  if (2 * (n - rejects) > n) return revises ? Status::kRevised : Status::kAccepted;
  return Status::kDisputed;
}

TEST(ReviewStoreProperty, RandomDecisionsReplayToSameStatuses) {
  TempDir tmp;
  std::vector<Candidate> cs;
  for (int i = 0; i < 20; ++i) {
    cs.push_back(make_candidate("SELECT Airline FROM AIRLINES LIMIT " + std::to_string(i + 1), "Just show the top few."));
  }
  std::map<std::string, std::vector<std::pair<std::string, Action>>> logs;
  std::map<std::string, Status> live;
  {
    review::ReviewStore store(tmp.path);
    store.enqueue(cs);
    std::mt19937_64 rng(20240611);
    const std::vector<std::string> reviewers = {"r1", "r2", "r3", "r4"};
    for (int i = 0; i < 500; ++i) {
      const auto& c = cs[rng() % cs.size()];
      const auto& who = reviewers[rng() % reviewers.size()];
      const auto a = static_cast<Action>(rng() % 3);
      auto d = decision(c.id, who, a);
      if (a == Action::kRevise) d.revised_utterance = "revision " + std::to_string(i);
      store.record_decision(d);
      logs[c.id].emplace_back(who, a);
    }
    for (const auto& c : store.all()) live[c.id] = c.status;
  }
  const auto replayed = review::ReviewStore::replay(tmp.path);
  review::ReviewStore reopened(tmp.path);
  for (const auto& c : cs) {
    const auto expected = oracle_status(logs[c.id]);
    EXPECT_EQ(live[c.id], expected) << c.id;
    EXPECT_EQ(replayed.at(c.id), expected) << c.id;
    EXPECT_EQ(reopened.get(c.id)->status, expected) << c.id;
  }
}

class ReviewHttp : public ::testing::Test {
 protected:
  void SetUp() override {
    store = std::make_unique<review::ReviewStore>(tmp.path, &testing::catalog());
    store->enqueue(sample_candidates());
    review::ServeConfig cfg;
    cfg.port = 0;
    server = std::make_unique<review::ReviewServer>(*store, &testing::catalog(), cfg);
    port = server->start();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }
  void TearDown() override { server->stop(); }

  httplib::Result post(const std::string& id, const std::string& body) {
    return client->Post("/api/candidates/" + id + "/decisions", body, "application/json");
  }

  TempDir tmp;
  std::unique_ptr<review::ReviewStore> store;
  std::unique_ptr<review::ReviewServer> server;
  std::unique_ptr<httplib::Client> client;
  int port = 0;
};

TEST_F(ReviewHttp, ListGetAndHighlight) {
  auto res = client->Get("/api/candidates?status=pending");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body).size(), 3u);

  const auto c = sample_candidates()[0];
  res = client->Get("/api/candidates/" + c.id);
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  const auto card = json::parse(res->body);
  EXPECT_EQ(card["new_sql"], c.new_sql);
  ASSERT_EQ(card["edits"].size(), 1u);
  EXPECT_EQ(card["edits"][0]["clause"], "where");
  EXPECT_EQ(card["edits"][0]["action"], "add");
  ASSERT_EQ(card["highlight"].size(), 1u);
  const auto start = card["highlight"][0]["start"].get<std::size_t>();
  const auto end = card["highlight"][0]["end"].get<std::size_t>();
  const auto display = card["display_sql"].get<std::string>();
  EXPECT_NE(display.substr(start, end - start).find("'USA'"), std::string::npos);
  EXPECT_NE(display.substr(start, end - start).find("Country"), std::string::npos);

  res = client->Get("/api/candidates/cnothere");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(json::parse(res->body)["error"]["code"], "not_found");
  res = client->Get("/api/candidates?status=bogus");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
}

TEST_F(ReviewHttp, DecisionStatusCodes) {
  const auto id = sample_candidates()[0].id;
  auto res = post(id, "{not json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  res = post(id, R"({"reviewer":"a","action":"maybe"})");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 422);
  res = post(id, R"({"reviewer":"a","action":"revise"})");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 422);
  res = post("cnothere", R"({"reviewer":"a","action":"accept"})");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);

  res = post(id, R"({"reviewer":"a","action":"accept"})");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["status"], "pending");
  res = post(id, R"({"reviewer":"b","action":"revise","revised_utterance":"Just the USA ones."})");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["status"], "revised");

  res = client->Get("/api/stats");
  ASSERT_TRUE(res);
  EXPECT_EQ(json::parse(res->body)["revised"], 1);
  res = client->Get("/api/export");
  ASSERT_TRUE(res);
  const auto exported = json::parse(res->body);
  ASSERT_EQ(exported.size(), 1u);
  EXPECT_EQ(exported[0]["final"]["utterance"], "Just the USA ones.");
  res = client->Get("/api/candidates?reviewer=a");
  ASSERT_TRUE(res);
  EXPECT_EQ(json::parse(res->body).size(), 2u);
}

TEST(ReviewServer, BindErrorOnTakenPort) {
  TempDir tmp;
  review::ReviewStore store(tmp.path);
  review::ServeConfig cfg;
  cfg.port = 0;
  review::ReviewServer first(store, nullptr, cfg);
  cfg.port = first.start();
  review::ReviewServer second(store, nullptr, cfg);
  EXPECT_THROW(second.start(), BindError);
}

}  // namespace
}  // namespace cgforge
