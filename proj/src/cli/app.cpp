#include "cgforge/cli/app.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "cgforge/core/error.hpp"
#include "cgforge/draft/drafter.hpp"
#include "cgforge/eval/evaluator.hpp"
#include "cgforge/io/dataset.hpp"
#include "cgforge/link/linker.hpp"
#include "cgforge/patterns/library.hpp"
#include "cgforge/recombine/generate.hpp"
#include "cgforge/review/server.hpp"
#include "cgforge/review/store.hpp"
#include "json.hpp"

namespace cgforge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// --config FILE: a flat JSON object keyed by long flag names. Its values are
// appended to the arguments for flags not already given, so explicit flags win.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  const json doc = io::read_json(path);
  if (!doc.is_object()) throw FormatError("'" + path + "': expected a JSON object");
  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  std::vector<std::string> extra;
  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + key;
    if (key == "config" || given(flag)) continue;
    for (const auto& v : value.is_array() ? value : json::array({value})) {
      extra.push_back(flag);
      extra.push_back(scalar(v));
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

struct Options {
  std::string schema, train, dev, eval, gold, pred, library, candidates, store, lint, out;
  std::string decisions, generator = "rule", command, host = "127.0.0.1", static_dir, format = "json";
  std::uint64_t seed = 0;
  std::size_t cap = 3;
  std::size_t concurrency = 4;
  long timeout_ms = 10000;
  int port = 8080;
};

class Runner {
 public:
  Runner(Options& o, std::ostream& out, std::ostream& err) : o_(o), out_(out), err_(err) {}

  void log(const std::string& msg) { err_ << "[cgforge] " << msg << "\n"; }
  void summary(const json& j) { out_ << j.dump(2) << "\n"; }

  const io::Catalog& catalog() {
    if (!catalog_) {
      io::CatalogStats stats;
      catalog_ = io::load_schema_catalog(o_.schema, &stats);
      log("loaded " + std::to_string(catalog_->size()) + " schemas from " + o_.schema);
      if (stats.dropped_self_foreign_keys) {
        log("dropped " + std::to_string(stats.dropped_self_foreign_keys) + " self-referencing foreign keys");
      }
    }
    return *catalog_;
  }

  io::DialogueSet dialogues(const std::string& path) {
    auto set = io::load_dialogues(path, catalog());
    log("loaded " + std::to_string(set.interactions.size()) + " interactions from " + path + " (" +
        std::to_string(set.rejects.size()) + " rejected, " + std::to_string(set.skipped_turns) +
        " turns without SQL skipped)");
    for (const auto& r : set.rejects) log("  rejected record " + std::to_string(r.index) + ": " + r.reason);
    return set;
  }

  fs::path out_dir() {
    if (o_.out.empty()) throw FormatError("--out is required");
    std::error_code ec;
    fs::create_directories(o_.out, ec);
    if (ec) throw IoError("cannot create '" + o_.out + "': " + ec.message());
    return o_.out;
  }

  static json load_stats(const io::DialogueSet& set) {
    std::size_t turns = 0;
    for (const auto& i : set.interactions) turns += i.turns.size();
    return {{"interactions", set.interactions.size()},
            {"turns", turns},
            {"rejected", set.rejects.size()},
            {"skipped_turns", set.skipped_turns}};
  }

  std::vector<Candidate> read_candidates(const std::string& path) {
    std::vector<Candidate> out;
    for (const auto& j : io::read_jsonl(path)) out.push_back(candidate_from_json(j));
    return out;
  }

  static void write_candidates(const fs::path& path, const std::vector<Candidate>& cs) {
    std::vector<json> lines;
    for (const auto& c : cs) lines.push_back(to_json(c));
    io::write_jsonl(path, lines);
  }

  // filter ------------------------------------------------------------------
  struct Filtered {
    io::DialogueSet train;
    link::FilterResult result;
  };
  Filtered filter_train() {
    Filtered f{dialogues(o_.train), {}};
    f.result = link::filter_dataset(f.train.interactions, catalog());
    log("filter: " + std::to_string(f.result.dependent.size()) + " context-dependent turns");
    return f;
  }

  int filter() {
    auto f = filter_train();
    json s = f.result.report;
    s["input"] = load_stats(f.train);
    if (!o_.out.empty()) {
      json dep = json::array(), indep = json::array();
      for (const auto& r : f.result.dependent) {
        dep.push_back(io::question_id(f.train.interactions[r.interaction], r.turn_index));
      }
      for (const auto& r : f.result.independent) {
        indep.push_back(io::question_id(f.train.interactions[r.interaction], r.turn_index));
      }
      io::write_json(out_dir() / "filter.json", {{"dependent", dep}, {"independent", indep}, {"report", s}});
    }
    summary(s);
    return kOk;
  }

  // patterns ----------------------------------------------------------------
  json patterns_stage(patterns::PatternLibrary& library) {
    auto f = filter_train();
    auto collected = patterns::collect_patterns(f.train.interactions, f.result.dependent, catalog());
    library = collected.library;
    log("patterns: " + std::to_string(library.templates.size()) + " modification templates");
    io::write_json(out_dir() / "library.json", patterns::to_json(library));
    return {{"filter", f.result.report}, {"patterns", collected.report()}};
  }

  int patterns() {
    patterns::PatternLibrary library;
    summary(patterns_stage(library));
    return kOk;
  }

  // recombine ---------------------------------------------------------------
  recombine::GenerationConfig generation_config() {
    recombine::GenerationConfig cfg;
    cfg.seed = o_.seed;
    cfg.cap_per_pair = o_.cap;
    if (!o_.lint.empty()) cfg.rules = recombine::rules_from_json(io::read_json(o_.lint));
    return cfg;
  }

  json recombine_stage(const patterns::PatternLibrary& library, std::vector<Candidate>& out) {
    auto dev = dialogues(o_.dev);
    auto result = recombine::generate_candidates(library, dev.interactions, catalog(), generation_config());
    log("recombine: " + std::to_string(result.candidates.size()) + " candidates from " +
        std::to_string(result.pairs) + " pairs");
    const auto dir = out_dir();
    write_candidates(dir / "generated.jsonl", result.candidates);
    json report = result.report();
    io::write_json(dir / "generation_report.json", report);
    out = std::move(result.candidates);
    return report;
  }

  int recombine() {
    if (o_.library.empty()) throw FormatError("--library is required");
    const auto library = patterns::library_from_json(io::read_json(o_.library));
    std::vector<Candidate> cs;
    summary(recombine_stage(library, cs));
    return kOk;
  }

  // draft -------------------------------------------------------------------
  draft::DraftOptions draft_options() {
    draft::DraftOptions opts;
    opts.max_concurrency = std::max<std::size_t>(1, o_.concurrency);
    if (o_.generator == "external") {
      opts.external = true;
      std::istringstream words(o_.command);
      for (std::string w; words >> w;) opts.command.argv.push_back(w);
      if (opts.command.argv.empty()) throw FormatError("--generator external requires --command");
      opts.command.timeout = std::chrono::milliseconds(o_.timeout_ms);
    } else if (o_.generator != "rule") {
      throw FormatError("--generator must be rule or external");
    }
    return opts;
  }

  json draft_stage(std::vector<Candidate> in, std::vector<Candidate>& out) {
    auto result = draft::draft_candidates(std::move(in), catalog(), draft_options());
    for (const auto& f : result.failures) log("draft: external generator failed: " + f);
    write_candidates(out_dir() / "candidates.jsonl", result.candidates);
    json report = result.report();
    out = std::move(result.candidates);
    return report;
  }

  int draft() {
    if (o_.candidates.empty()) throw FormatError("--candidates is required");
    std::vector<Candidate> drafted;
    summary(draft_stage(read_candidates(o_.candidates), drafted));
    return kOk;
  }

  // review ------------------------------------------------------------------
  std::unique_ptr<review::ReviewStore> open_store() {
    const io::Catalog* cat = o_.schema.empty() ? nullptr : &catalog();
    auto store = std::make_unique<review::ReviewStore>(o_.store, cat);
    if (store->torn_lines()) log("review store: ignored a torn final log line");
    if (!o_.candidates.empty()) {
      auto r = store->enqueue(read_candidates(o_.candidates));
      log("enqueued " + std::to_string(r.added) + " candidates (" + std::to_string(r.already_present) +
          " already present, " + std::to_string(r.rejected.size()) + " rejected)");
    }
    return store;
  }

  int review_serve() {
    auto store = open_store();
    review::ServeConfig cfg;
    cfg.host = o_.host;
    cfg.port = o_.port;
    cfg.static_dir = o_.static_dir;
    review::ReviewServer server(*store, o_.schema.empty() ? nullptr : &catalog(), cfg);
    log("serving review API on http://" + o_.host + ":" + std::to_string(o_.port));
    server.run();
    return kOk;
  }

  int review_apply() {
    auto store = open_store();
    std::size_t applied = 0;
    json rejected = json::array();
    std::size_t line = 0;
    for (const auto& j : io::read_jsonl(o_.decisions)) {
      ++line;
      try {
        store->record_decision(decision_from_json(j));
        ++applied;
      } catch (const FormatError& e) {
        rejected.push_back({{"line", line}, {"reason", e.what()}});
      } catch (const InvalidDecision& e) {
        rejected.push_back({{"line", line}, {"reason", e.what()}});
      } catch (const UnknownCandidate& e) {
        rejected.push_back({{"line", line}, {"reason", std::string("unknown candidate ") + e.what()}});
      }
    }
    log("applied " + std::to_string(applied) + " decisions, rejected " + std::to_string(rejected.size()));
    summary({{"applied", applied}, {"rejected", rejected}, {"stats", store->stats().to_json()}});
    return rejected.empty() ? kOk : kValidation;
  }

  int export_benchmark() {
    auto store = open_store();
    const auto benchmark = review::export_benchmark(store->all());
    io::write_json(out_dir() / "benchmark.json", benchmark);
    summary({{"exported", benchmark.size()}, {"stats", store->stats().to_json()}});
    return kOk;
  }

  // evaluation --------------------------------------------------------------
  std::map<std::string, eval::SplitTag> splits_for(const std::vector<io::Interaction>& target) {
    auto f = filter_train();
    const auto library = patterns::collect_patterns(f.train.interactions, f.result.dependent, catalog()).library;
    const auto dependent = link::filter_dataset(target, catalog()).dependent;
    return eval::tag_splits(target, dependent, catalog(), library);
  }

  void write_table(const std::string& stem, const json& rows, const std::vector<std::string>& columns) {
    const auto dir = out_dir();
    if (o_.format == "csv") {
      std::ofstream f(dir / (stem + ".csv"));
      f << eval::to_csv(rows, columns);
      if (!f) throw IoError("cannot write " + (dir / (stem + ".csv")).string());
    } else {
      io::write_json(dir / (stem + ".json"), rows);
    }
  }

  int split_tag() {
    if (o_.format != "json" && o_.format != "csv") throw FormatError("--format must be json or csv");
    auto target = dialogues(o_.eval);
    const auto tags = splits_for(target.interactions);
    const auto table = eval::split_table(target.interactions, tags);
    if (!o_.out.empty()) {
      json by_id = json::object();
      for (const auto& [id, tag] : tags) by_id[id] = std::string(eval::to_string(tag));
      io::write_json(out_dir() / "split_tags.json", by_id);
      write_table("split_table", table, {"database", "interactions", "questions", "CG", "NonCG", "other"});
    }
    summary(table);
    return kOk;
  }

  int evaluate() {
    auto gold = dialogues(o_.gold);
    const auto preds = io::load_predictions(o_.pred);
    std::map<std::string, eval::SplitTag> tags;
    if (!o_.train.empty()) tags = splits_for(gold.interactions);
    const auto report = eval::evaluate(gold.interactions, preds, catalog(), tags).to_json();
    if (!o_.out.empty()) {
      const fs::path path(o_.out);
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      io::write_json(path, report);
    }
    log("evaluate: QM " + report["overall"]["qm"].dump());
    summary(report);
    return kOk;
  }

  int stats() {
    if (o_.format != "json" && o_.format != "csv") throw FormatError("--format must be json or csv");
    auto f = filter_train();
    std::map<std::string, std::map<std::string, std::size_t>> per_db;
    for (std::size_t i = 0; i < f.train.interactions.size(); ++i) {
      const auto& inter = f.train.interactions[i];
      per_db[inter.db_id]["interactions"] += 1;
      per_db[inter.db_id]["turns"] += inter.turns.size();
    }
    for (const auto& r : f.result.dependent) per_db[f.train.interactions[r.interaction].db_id]["dependent"] += 1;
    json dataset = json::array();
    for (auto& [db, c] : per_db) {
      dataset.push_back(
          {{"database", db}, {"interactions", c["interactions"]}, {"turns", c["turns"]}, {"dependent", c["dependent"]}});
    }
    patterns::PatternLibrary library;
    if (!o_.library.empty()) {
      library = patterns::library_from_json(io::read_json(o_.library));
    } else {
      library = patterns::collect_patterns(f.train.interactions, f.result.dependent, catalog()).library;
    }
    const auto tags = eval::tag_distribution(library);
    if (!o_.out.empty()) {
      write_table("dataset_table", dataset, {"database", "interactions", "turns", "dependent"});
      write_table("tag_distribution", tags, {"tag", "templates", "support"});
    }
    summary({{"dataset", dataset}, {"tag_distribution", tags}});
    return kOk;
  }

  // pipeline ----------------------------------------------------------------
  int pipeline() {
    json s;
    patterns::PatternLibrary library;
    auto stage = patterns_stage(library);
    s["filter"] = stage["filter"];
    s["patterns"] = stage["patterns"];
    std::vector<Candidate> generated, drafted;
    s["recombine"] = recombine_stage(library, generated);
    s["draft"] = draft_stage(std::move(generated), drafted);
    review::ReviewStore store(out_dir() / "review", &catalog());
    s["enqueue"] = store.enqueue(drafted).to_json();
    s["review"] = store.stats().to_json();
    summary(s);
    return kOk;
  }

 private:
  Options& o_;
  std::ostream& out_;
  std::ostream& err_;
  std::optional<io::Catalog> catalog_;
};

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return kIo;
  if (dynamic_cast<const InvariantError*>(&e)) return kInternal;
  if (dynamic_cast<const Error*>(&e)) return kValidation;
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return kValidation;
  return kInternal;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  std::string config;
  CLI::App app{"Benchmark construction and evaluation for context-dependent text-to-SQL", "cgforge"};
  app.require_subcommand(1);
  app.fallthrough(false);

  auto sub = [&](const std::string& name, const std::string& desc) {
    CLI::App* s = app.add_subcommand(name, desc);
    s->add_option("--config", config, "JSON file of flag values; explicit flags take precedence");
    return s;
  };
  auto schema = [&](CLI::App* s, bool required = true) {
    auto* opt = s->add_option("--schema", o.schema, "Spider-format tables.json");
    if (required) opt->required();
  };
  auto seed = [&](CLI::App* s) {
    s->add_option("--seed", o.seed, "Random seed (CGFORGE_SEED overrides)");
    s->add_option("--cap", o.cap, "Fills per (base, template) pair");
    s->add_option("--lint", o.lint, "JSON lint rule configuration");
  };
  auto drafting = [&](CLI::App* s) {
    s->add_option("--generator", o.generator, "rule or external")->check(CLI::IsMember({"rule", "external"}));
    s->add_option("--command", o.command, "External generator command line");
    s->add_option("--timeout-ms", o.timeout_ms, "External generator timeout per request");
    s->add_option("--concurrency", o.concurrency, "Maximum concurrent external requests");
  };

  auto* filter = sub("filter", "Partition turns into context-dependent and independent");
  schema(filter);
  filter->add_option("--train", o.train, "Dialogue file")->required();
  filter->add_option("--out", o.out, "Output directory");

  auto* patterns = sub("patterns", "Extract the modification pattern library");
  schema(patterns);
  patterns->add_option("--train", o.train, "Training dialogues")->required();
  patterns->add_option("--out", o.out, "Output directory")->required();

  auto* recombine = sub("recombine", "Recombine dev bases with library templates");
  schema(recombine);
  recombine->add_option("--library", o.library, "library.json")->required();
  recombine->add_option("--dev", o.dev, "Development dialogues")->required();
  recombine->add_option("--out", o.out, "Output directory")->required();
  seed(recombine);

  auto* draft = sub("draft", "Draft utterances for generated candidates");
  schema(draft);
  draft->add_option("--candidates", o.candidates, "generated.jsonl")->required();
  draft->add_option("--out", o.out, "Output directory")->required();
  drafting(draft);

  auto* serve = sub("review-serve", "Serve the review API");
  schema(serve, false);
  serve->add_option("--store", o.store, "Review store directory")->required();
  serve->add_option("--candidates", o.candidates, "Candidates to enqueue first");
  serve->add_option("--host", o.host, "Bind address");
  serve->add_option("--port", o.port, "Port");
  serve->add_option("--static", o.static_dir, "Review UI assets");

  auto* apply = sub("review-apply", "Apply a file of review decisions");
  schema(apply, false);
  apply->add_option("decisions", o.decisions, "decisions.jsonl")->required();
  apply->add_option("--store", o.store, "Review store directory")->required();
  apply->add_option("--candidates", o.candidates, "Candidates to enqueue first");

  auto* exp = sub("export", "Export accepted and revised candidates as a benchmark");
  schema(exp, false);
  exp->add_option("--store", o.store, "Review store directory")->required();
  exp->add_option("--out", o.out, "Output directory")->required();

  auto* split = sub("split-tag", "Tag questions as CG, NonCG or other");
  schema(split);
  split->add_option("--train", o.train, "Training dialogues")->required();
  split->add_option("--eval", o.eval, "Dialogues to tag")->required();
  split->add_option("--out", o.out, "Output directory");
  split->add_option("--format", o.format, "json or csv");

  auto* evaluate = sub("evaluate", "Score predictions with exact set match");
  schema(evaluate);
  evaluate->add_option("--gold", o.gold, "Gold dialogues or benchmark.json")->required();
  evaluate->add_option("--pred", o.pred, "predictions.jsonl")->required();
  evaluate->add_option("--train", o.train, "Training dialogues, enables split tags");
  evaluate->add_option("--out", o.out, "Report file");

  auto* stats = sub("stats", "Dataset and pattern count tables");
  schema(stats);
  stats->add_option("--train", o.train, "Training dialogues")->required();
  stats->add_option("--library", o.library, "library.json (default: extracted from --train)");
  stats->add_option("--out", o.out, "Output directory");
  stats->add_option("--format", o.format, "json or csv");

  auto* pipeline = sub("pipeline", "filter, patterns, recombine, draft and enqueue");
  schema(pipeline);
  pipeline->add_option("--train", o.train, "Training dialogues")->required();
  pipeline->add_option("--dev", o.dev, "Development dialogues")->required();
  pipeline->add_option("--out", o.out, "Output directory")->required();
  seed(pipeline);
  drafting(pipeline);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }

  if (const char* env = std::getenv("CGFORGE_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      o.seed = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      err << "error: CGFORGE_SEED must be an unsigned integer\n";
      return kValidation;
    }
  }

  Runner r(o, out, err);
  try {
    if (*filter) return r.filter();
    if (*patterns) return r.patterns();
    if (*recombine) return r.recombine();
    if (*draft) return r.draft();
    if (*serve) return r.review_serve();
    if (*apply) return r.review_apply();
    if (*exp) return r.export_benchmark();
    if (*split) return r.split_tag();
    if (*evaluate) return r.evaluate();
    if (*stats) return r.stats();
    if (*pipeline) return r.pipeline();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kInternal;
}

}  // namespace cgforge::cli
