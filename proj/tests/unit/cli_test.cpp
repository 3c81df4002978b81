#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cgforge/cli/app.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace cgforge {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::fixture;

struct Result {
  int code;
  std::string out, err;
  json summary() const { return json::parse(out); }
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cgforge");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    ::unsetenv("CGFORGE_SEED");
    static int n = 0;
    dir = fs::temp_directory_path() / ("cgforge_cli_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override {
    ::unsetenv("CGFORGE_SEED");
    fs::remove_all(dir);
  }
  std::string at(const std::string& name) const { return (dir / name).string(); }
  static std::string fx(const std::string& name) { return fixture(name).string(); }

  Result pipeline(const std::string& out, std::vector<std::string> extra = {}) {
    std::vector<std::string> args = {"pipeline", "--schema", fx("tables.json"), "--train", fx("train.json"),
                                     "--dev", fx("dev.json"), "--out", out};
    args.insert(args.end(), extra.begin(), extra.end());
    return cli(args);
  }

  fs::path dir;
};

TEST_F(Cli, UnknownSubcommandPrintsUsage) {
  const auto r = cli({"frobnicate"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("Subcommands:"), std::string::npos);
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(cli({"evaluate", "--schema", fx("tables.json"), "--gold", at("missing.json"), "--pred",
                 fx("eval_pred.jsonl")}).code,
            2);
  std::ofstream(at("bad.json")) << "[{";
  EXPECT_EQ(cli({"evaluate", "--schema", fx("tables.json"), "--gold", at("bad.json"), "--pred",
                 fx("eval_pred.jsonl")}).code,
            1);
  EXPECT_EQ(cli({"filter", "--schema", fx("tables.json")}).code, 1);  // --train missing
  EXPECT_EQ(cli({"draft", "--schema", fx("tables.json"), "--candidates", fx("eval_pred.jsonl"), "--out",
                 at("d"), "--generator", "telepathy"}).code,
            1);
  ::setenv("CGFORGE_SEED", "seven", 1);
  EXPECT_EQ(pipeline(at("p")).code, 1);
}

TEST_F(Cli, PipelineIsDeterministic) {
  const auto a = pipeline(at("a"), {"--seed", "11"});
  const auto b = pipeline(at("b"), {"--seed", "11"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.summary(), b.summary());
  EXPECT_FALSE(slurp(dir / "a" / "candidates.jsonl").empty());
  EXPECT_EQ(slurp(dir / "a" / "candidates.jsonl"), slurp(dir / "b" / "candidates.jsonl"));
  EXPECT_EQ(slurp(dir / "a" / "library.json"), slurp(dir / "b" / "library.json"));
  EXPECT_EQ(a.summary()["enqueue"]["added"], a.summary()["draft"]["drafted"]);

  // Re-running into the same store enqueues nothing new.
  const auto again = pipeline(at("a"), {"--seed", "11"});
  EXPECT_EQ(again.summary()["enqueue"]["added"], 0);
  EXPECT_EQ(again.summary()["enqueue"]["already_present"], a.summary()["enqueue"]["added"]);
}

TEST_F(Cli, PipelineMatchesSeparateStages) {
  const auto p = pipeline(at("p"), {"--seed", "5"});
  ASSERT_EQ(p.code, 0) << p.err;

  const auto f = cli({"filter", "--schema", fx("tables.json"), "--train", fx("train.json")});
  const auto pat = cli({"patterns", "--schema", fx("tables.json"), "--train", fx("train.json"), "--out", at("s")});
  const auto rec = cli({"recombine", "--schema", fx("tables.json"), "--library", at("s/library.json"), "--dev",
                        fx("dev.json"), "--out", at("s"), "--seed", "5"});
  const auto dr = cli({"draft", "--schema", fx("tables.json"), "--candidates", at("s/generated.jsonl"), "--out",
                       at("s")});
  for (const auto* r : {&f, &pat, &rec, &dr}) ASSERT_EQ(r->code, 0) << r->err;

  const json s = p.summary();
  EXPECT_EQ(s["filter"]["dependent_count"], f.summary()["dependent_count"]);
  EXPECT_EQ(s["patterns"], pat.summary()["patterns"]);
  EXPECT_EQ(s["recombine"], rec.summary());
  EXPECT_EQ(s["draft"], dr.summary());
  EXPECT_EQ(slurp(dir / "p" / "candidates.jsonl"), slurp(dir / "s" / "candidates.jsonl"));
}

TEST_F(Cli, ConfigFileAndSeedPrecedence) {
  auto count = [&](std::vector<std::string> extra) {
    std::vector<std::string> args = {"recombine", "--schema", fx("tables.json"), "--dev", fx("dev.json"),
                                     "--out", at("r")};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = cli(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return std::make_pair(r.summary()["candidates"].get<int>(), slurp(dir / "r" / "generated.jsonl"));
  };
  ASSERT_EQ(cli({"patterns", "--schema", fx("tables.json"), "--train", fx("train.json"), "--out", at("lib")}).code,
            0);
  std::ofstream(at("cfg.json")) << json{{"library", at("lib/library.json")}, {"cap", 1}, {"seed", 3}}.dump();

  const auto from_config = count({"--config", at("cfg.json")});
  const auto explicit_flags = count({"--library", at("lib/library.json"), "--cap", "1", "--seed", "3"});
  EXPECT_EQ(from_config, explicit_flags);

  const auto wider = count({"--config", at("cfg.json"), "--cap", "3"});
  EXPECT_GT(wider.first, from_config.first);

  ::setenv("CGFORGE_SEED", "9", 1);
  const auto env = count({"--config", at("cfg.json"), "--seed", "3"});
  ::unsetenv("CGFORGE_SEED");
  EXPECT_EQ(env, count({"--config", at("cfg.json"), "--seed", "9"}));

  std::ofstream(at("unknown.json")) << R"({"colour": "blue"})";
  EXPECT_EQ(cli({"filter", "--schema", fx("tables.json"), "--train", fx("train.json"), "--config",
                 at("unknown.json")}).code,
            1);
}

TEST_F(Cli, ReviewApplyAndExport) {
  ASSERT_EQ(pipeline(at("p")).code, 0);
  std::vector<std::string> ids;
  {
    std::ifstream in(dir / "p" / "candidates.jsonl");
    for (std::string line; std::getline(in, line) && ids.size() < 3;) ids.push_back(json::parse(line)["id"]);
  }
  ASSERT_EQ(ids.size(), 3u);
  {
    std::ofstream d(at("decisions.jsonl"));
    for (const std::string reviewer : {"r1", "r2"}) {
      d << json{{"candidate_id", ids[0]}, {"reviewer", reviewer}, {"action", "accept"}}.dump() << "\n";
      d << json{{"candidate_id", ids[1]}, {"reviewer", reviewer}, {"action", "revise"},
                {"revised_utterance", "Just the top one."}}.dump()
        << "\n";
      d << json{{"candidate_id", ids[2]}, {"reviewer", reviewer}, {"action", "reject"}}.dump() << "\n";
    }
  }
  const auto ok = cli({"review-apply", at("decisions.jsonl"), "--store", at("p/review")});
  ASSERT_EQ(ok.code, 0) << ok.err;
  EXPECT_EQ(ok.summary()["applied"], 6);
  EXPECT_EQ(ok.summary()["stats"]["accepted"], 1);
  EXPECT_EQ(ok.summary()["stats"]["revised"], 1);
  EXPECT_EQ(ok.summary()["stats"]["rejected"], 1);

  std::ofstream(at("bad.jsonl")) << json{{"candidate_id", "nope"}, {"reviewer", "r1"}, {"action", "accept"}}.dump()
                                 << "\n";
  const auto bad = cli({"review-apply", at("bad.jsonl"), "--store", at("p/review")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(bad.summary()["rejected"].size(), 1u);

  const auto exp = cli({"export", "--store", at("p/review"), "--out", at("e")});
  ASSERT_EQ(exp.code, 0) << exp.err;
  EXPECT_EQ(exp.summary()["exported"], 2);
  const json bench = io::read_json(dir / "e" / "benchmark.json");
  ASSERT_EQ(bench.size(), 2u);
  for (const auto& rec : bench) EXPECT_EQ(rec["interaction"].back()["utterance"].is_string(), true);
}

TEST_F(Cli, EvaluateWritesReport) {
  const auto r = cli({"evaluate", "--schema", fx("tables.json"), "--gold", fx("eval_gold.json"), "--pred",
                      fx("eval_pred.jsonl"), "--out", at("out/report.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json report = io::read_json(dir / "out" / "report.json");
  EXPECT_EQ(report, r.summary());
  EXPECT_EQ(report["overall"]["count"], 10);
  EXPECT_EQ(report["overall"]["exact"], 6);
}

TEST_F(Cli, TablesInCsv) {
  const auto s = cli({"stats", "--schema", fx("tables.json"), "--train", fx("train.json"), "--out", at("st"),
                      "--format", "csv"});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(slurp(dir / "st" / "tag_distribution.csv").rfind("tag,templates,support\n", 0), 0u);
  const auto t = cli({"split-tag", "--schema", fx("tables.json"), "--train", fx("train.json"), "--eval",
                      fx("dev.json"), "--out", at("sp"), "--format", "csv"});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_TRUE(fs::exists(dir / "sp" / "split_table.csv"));
  EXPECT_EQ(t.summary().back()["database"], "total");
}

}  // namespace
}  // namespace cgforge
