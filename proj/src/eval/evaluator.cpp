#include "cgforge/eval/evaluator.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <thread>

#include "cgforge/core/error.hpp"
#include "cgforge/core/text.hpp"
#include "cgforge/patterns/diff.hpp"
#include "cgforge/patterns/mod_template.hpp"
#include "cgforge/sql/parser.hpp"
#include "cgforge/sql/printer.hpp"
#include "cgforge/sql/template.hpp"
#include "cgforge/sql/walk.hpp"

namespace cgforge::eval {

using nlohmann::json;

namespace {

constexpr sql::PrintOptions kShape{.erase_names = false, .limit_as_slot = true};

struct EraseValues {
  void value(sql::Value& v) { v = sql::Value::placeholder(); }
};

std::string shape(const sql::Query& q) {
  sql::Query copy = q;
  EraseValues v;
  sql::walk::query(copy, v);
  return sql::print_sql(copy, kShape);
}

std::string shape(const sql::Condition& c) {
  sql::Condition copy = c;
  EraseValues v;
  sql::walk::condition(copy, v);
  return sql::print(copy, kShape);
}

template <typename F>
void for_each_node(const sql::Predicate& p, F&& f) {
  f(p);
  for (const auto& child : p.children) for_each_node(child, f);
}

std::vector<const sql::Condition*> leaves(const std::optional<sql::Predicate>& p) {
  std::vector<const sql::Condition*> out;
  if (!p) return out;
  for_each_node(*p, [&](const sql::Predicate& n) {
    if (n.kind == sql::Connective::kLeaf) out.push_back(&n.condition);
  });
  return out;
}

void sorted(std::vector<std::string>& v) { std::sort(v.begin(), v.end()); }

double percent(std::size_t k, std::size_t n) { return n == 0 ? 0.0 : 100.0 * static_cast<double>(k) / static_cast<double>(n); }

json slice(std::size_t exact, std::size_t count) {
  return {{"count", count}, {"exact", exact}, {"qm", count ? json(percent(exact, count)) : json(nullptr)}};
}

}  // namespace

const std::vector<std::string>& component_names() {
  static const std::vector<std::string> kNames = {"select",   "select_no_agg", "where",    "where_no_op",
                                                  "group_by", "group_by_no_having", "order_by", "and_or",
                                                  "keywords", "from",          "iuen"};
  return kNames;
}

ComponentSets decompose(const QueryAst& q) {
  ComponentSets out;
  out.keywords.insert("select");
  if (q.distinct) out.keywords.insert("distinct");
  for (const auto& item : q.select) {
    out.select.push_back(sql::print(item, kShape));
    sql::AggExpr bare;
    bare.value = item.value;
    out.select_no_agg.push_back(sql::print(bare, kShape));
  }
  for (const auto& t : q.from.tables) {
    out.from.push_back(t.subquery ? "(" + shape(**t.subquery) + ")" : t.table);
  }

  auto conditions = [&](const std::optional<sql::Predicate>& p, std::vector<std::string>& skeletons,
                        std::vector<std::string>* lhs, const std::string& prefix) {
    if (!p) return;
    for_each_node(*p, [&](const sql::Predicate& n) {
      if (n.kind == sql::Connective::kAnd) out.and_or.insert("and");
      if (n.kind == sql::Connective::kOr) {
        out.and_or.insert("or");
        out.keywords.insert("or");
      }
    });
    for (const auto* c : leaves(p)) {
      skeletons.push_back(prefix + shape(*c));
      if (lhs) lhs->push_back(sql::print(c->left, kShape));
      using Op = sql::CompareOp;
      if (c->op == Op::kNotIn || c->op == Op::kNotLike) out.keywords.insert("not");
      if (c->op == Op::kIn || c->op == Op::kNotIn) out.keywords.insert("in");
      if (c->op == Op::kLike || c->op == Op::kNotLike) out.keywords.insert("like");
    }
  };

  if (q.where) out.keywords.insert("where");
  conditions(q.where, out.where, &out.where_no_op, "");

  for (const auto& c : q.group_by) out.group_by_no_having.push_back(sql::print(c, kShape));
  out.group_by = out.group_by_no_having;
  if (!q.group_by.empty()) out.keywords.insert("group");
  if (q.having) out.keywords.insert("having");
  conditions(q.having, out.group_by, nullptr, "HAVING ");

  for (const auto& o : q.order_by) out.order_by.push_back(sql::print(o, kShape));
  if (!q.order_by.empty()) out.keywords.insert("order");
  if (q.limit) {
    out.order_by.push_back("LIMIT");
    out.keywords.insert("limit");
  }
  if (q.set_op) {
    const std::string kind(sql::to_string(q.set_op->kind));
    out.keywords.insert(text::to_lower(kind));
    out.iuen.push_back(kind + " " + shape(*q.set_op->right));
  }

  for (auto* v : {&out.select, &out.select_no_agg, &out.where, &out.where_no_op, &out.group_by,
                  &out.group_by_no_having, &out.order_by, &out.from}) {
    sorted(*v);
  }
  return out;
}

MatchResult question_match(const QueryAst& pred, const QueryAst& gold) {
  const auto p = decompose(pred);
  const auto g = decompose(gold);
  MatchResult r;
  r.per_component = {{"select", p.select == g.select},
                     {"select_no_agg", p.select_no_agg == g.select_no_agg},
                     {"where", p.where == g.where},
                     {"where_no_op", p.where_no_op == g.where_no_op},
                     {"group_by", p.group_by == g.group_by},
                     {"group_by_no_having", p.group_by_no_having == g.group_by_no_having},
                     {"order_by", p.order_by == g.order_by},
                     {"and_or", p.and_or == g.and_or},
                     {"keywords", p.keywords == g.keywords},
                     {"from", p.from == g.from},
                     {"iuen", p.iuen == g.iuen}};
  r.exact = std::all_of(r.per_component.begin(), r.per_component.end(), [](const auto& kv) { return kv.second; });
  return r;
}

MatchResult question_match(const std::string& pred_sql, const std::string& gold_sql, const Schema& schema) {
  const auto gold = sql::parse_sql(gold_sql, schema);
  try {
    return question_match(sql::parse_sql(pred_sql, schema), gold);
  } catch (const Error&) {
    MatchResult miss;
    for (const auto& name : component_names()) miss.per_component[name] = false;
    return miss;
  }
}

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::kEasy: return "easy";
    case Difficulty::kMedium: return "medium";
    case Difficulty::kHard: return "hard";
    case Difficulty::kExtra: return "extra";
  }
  return "?";
}

HardnessCounts hardness_counts(const QueryAst& q) {
  HardnessCounts h;
  h.comp1 += q.where.has_value();
  h.comp1 += !q.group_by.empty();
  h.comp1 += !q.order_by.empty();
  h.comp1 += q.limit.has_value();
  if (!q.from.tables.empty()) h.comp1 += static_cast<int>(q.from.tables.size()) - 1;

  int aggs = 0;
  for (const auto& item : q.select) aggs += item.agg != sql::Agg::kNone;
  for (const auto& o : q.order_by) aggs += o.expr.agg != sql::Agg::kNone;
  for (const auto* p : {&q.where, &q.having}) {
    if (!*p) continue;
    for_each_node(**p, [&](const sql::Predicate& n) {
      if (n.kind == sql::Connective::kOr) h.comp1 += static_cast<int>(n.children.size()) - 1;
    });
    for (const auto* c : leaves(*p)) {
      if (c->op == sql::CompareOp::kLike || c->op == sql::CompareOp::kNotLike) h.comp1 += 1;
      if (c->has_subquery()) h.comp2 += 1;
      aggs += c->left.agg != sql::Agg::kNone;
    }
  }
  if (q.set_op) h.comp2 += 1;

  h.others += aggs > 1;
  h.others += q.select.size() > 1;
  h.others += leaves(q.where).size() > 1;
  h.others += q.group_by.size() > 1;
  return h;
}

Difficulty difficulty(const QueryAst& q) {
  const auto [c1, c2, o] = hardness_counts(q);
  if (c1 <= 1 && c2 == 0 && o == 0) return Difficulty::kEasy;
  if (c2 == 0 && ((o <= 2 && c1 <= 1) || (o == 0 && c1 <= 2))) return Difficulty::kMedium;
  if ((c2 <= 1 && o <= 2 && c1 <= 2) || (c2 == 0 && c1 <= 3 && o <= 2)) return Difficulty::kHard;
  return Difficulty::kExtra;
}

std::string_view to_string(SplitTag t) {
  switch (t) {
    case SplitTag::kCG: return "CG";
    case SplitTag::kNonCG: return "NonCG";
    case SplitTag::kOther: return "other";
  }
  return "?";
}

std::map<std::string, SplitTag> tag_splits(const std::vector<io::Interaction>& dialogues,
                                           const std::vector<link::TurnRef>& dependent,
                                           const io::Catalog& catalog,
                                           const patterns::PatternLibrary& library) {
  std::map<std::string, SplitTag> out;
  for (const auto& interaction : dialogues) {
    for (std::size_t i = 1; i <= interaction.turns.size(); ++i) {
      out[io::question_id(interaction, i)] = SplitTag::kOther;
    }
  }
  for (const auto& ref : dependent) {
    const auto& interaction = dialogues.at(ref.interaction);
    if (ref.turn_index < 2 || ref.turn_index > interaction.turns.size()) continue;
    const Schema& schema = catalog.at(interaction.db_id);
    const auto& prev = interaction.turns[ref.turn_index - 2].ast;
    auto diff = patterns::diff_asts(prev, interaction.turns[ref.turn_index - 1].ast, schema);
    const auto* mod = std::get_if<patterns::Modification>(&diff);
    if (!mod) continue;
    const auto base_hash = sql::template_of(prev, schema).hash;
    const auto mod_hash = patterns::anonymize(*mod, schema, &prev).hash;
    auto& tag = out[io::question_id(interaction, ref.turn_index)];
    if (library.combos_seen.count({base_hash, mod_hash})) {
      tag = SplitTag::kNonCG;
    } else if (library.has_base(base_hash) && library.has_template(mod_hash)) {
      tag = SplitTag::kCG;
    }
  }
  return out;
}

std::string_view to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kCorrect: return "correct";
    case ErrorCategory::kContextInfo: return "context_info";
    case ErrorCategory::kModificationInfo: return "modification_info";
    case ErrorCategory::kBoth: return "both";
  }
  return "?";
}

namespace {

std::set<std::string> atoms(const QueryAst& q) {
  const auto d = decompose(q);
  std::set<std::string> out;
  auto add = [&](const std::string& name, const auto& items) {
    for (const auto& item : items) out.insert(name + "\x1f" + item);
  };
  add("select", d.select);
  add("where", d.where);
  add("group_by", d.group_by);
  add("order_by", d.order_by);
  add("and_or", d.and_or);
  add("keywords", d.keywords);
  add("from", d.from);
  add("iuen", d.iuen);
  return out;
}

}  // namespace

ErrorCategory categorize_error(const std::optional<QueryAst>& pred, const QueryAst& gold_cur,
                               const QueryAst* gold_prev, const Schema& schema) {
  if (pred && question_match(*pred, gold_cur).exact) return ErrorCategory::kCorrect;
  if (!gold_prev) return ErrorCategory::kModificationInfo;
  if (std::holds_alternative<patterns::NotIncremental>(patterns::diff_asts(*gold_prev, gold_cur, schema))) {
    return ErrorCategory::kModificationInfo;
  }
  const auto cur = atoms(gold_cur);
  const auto prev = atoms(*gold_prev);
  const auto got = pred ? atoms(*pred) : std::set<std::string>{};
  bool mod_miss = false;
  bool ctx_miss = false;
  for (const auto& a : cur) {
    if (got.count(a)) continue;
    (prev.count(a) ? ctx_miss : mod_miss) = true;
  }
  for (const auto& a : prev) {
    if (!cur.count(a) && got.count(a)) mod_miss = true;
  }
  if (mod_miss && ctx_miss) return ErrorCategory::kBoth;
  if (ctx_miss) return ErrorCategory::kContextInfo;
  return ErrorCategory::kModificationInfo;
}

Report evaluate(const std::vector<io::Interaction>& gold, const std::vector<io::Prediction>& predictions,
                const io::Catalog& catalog, const std::map<std::string, SplitTag>& splits, unsigned threads) {
  std::map<std::string, const std::string*> by_id;
  for (const auto& p : predictions) by_id[p.question_id] = &p.predicted_sql;

  struct Job {
    const io::Interaction* interaction;
    std::size_t turn;
  };
  std::vector<Job> jobs;
  for (const auto& interaction : gold) {
    for (std::size_t i = 1; i <= interaction.turns.size(); ++i) jobs.push_back({&interaction, i});
  }

  Report report;
  report.questions.resize(jobs.size());
  auto score = [&](std::size_t k) {
    const auto& [interaction, turn] = jobs[k];
    const Schema& schema = catalog.at(interaction->db_id);
    const auto& cur = interaction->turns[turn - 1].ast;
    const QueryAst* prev = turn > 1 ? &interaction->turns[turn - 2].ast : nullptr;
    QuestionScore& q = report.questions[k];
    q.question_id = io::question_id(*interaction, turn);
    q.turn_index = turn;
    q.difficulty = difficulty(cur);
    if (auto it = splits.find(q.question_id); it != splits.end()) q.split = it->second;
    std::optional<QueryAst> pred;
    auto found = by_id.find(q.question_id);
    q.predicted = found != by_id.end();
    if (q.predicted) {
      try {
        pred = sql::parse_sql(*found->second, schema);
      } catch (const Error&) {
      }
    }
    if (pred) {
      q.match = question_match(*pred, cur);
    } else {
      for (const auto& name : component_names()) q.match.per_component[name] = false;
    }
    q.category = categorize_error(pred, cur, prev, schema);
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<std::size_t>(1, jobs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t k = t; k < jobs.size(); k += threads) score(k);
    });
  }
  for (auto& th : pool) th.join();

  for (const auto& q : report.questions) {
    if (!q.predicted) report.missing_predictions.push_back(q.question_id);
  }
  return report;
}

json Report::to_json() const {
  std::size_t exact = 0;
  std::map<std::string, std::size_t> component_hits;
  std::map<std::string, std::pair<std::size_t, std::size_t>> by_split, by_difficulty;
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> by_turn;
  std::map<std::string, std::size_t> categories = {{"context_info", 0}, {"modification_info", 0}, {"both", 0}};
  for (auto t : {SplitTag::kCG, SplitTag::kNonCG, SplitTag::kOther}) by_split[std::string(to_string(t))];
  for (auto d : {Difficulty::kEasy, Difficulty::kMedium, Difficulty::kHard, Difficulty::kExtra}) {
    by_difficulty[std::string(to_string(d))];
  }

  for (const auto& q : questions) {
    const std::size_t hit = q.match.exact;
    exact += hit;
    for (const auto& [name, ok] : q.match.per_component) component_hits[name] += ok;
    for (auto* slot : {&by_split[std::string(to_string(q.split))],
                       &by_difficulty[std::string(to_string(q.difficulty))], &by_turn[q.turn_index]}) {
      slot->first += hit;
      slot->second += 1;
    }
    if (!hit) categories[std::string(to_string(q.category))] += 1;
  }

  json components = json::object();
  for (const auto& name : component_names()) components[name] = percent(component_hits[name], questions.size());
  json splits = json::object();
  for (const auto& [k, v] : by_split) splits[k] = slice(v.first, v.second);
  json diffs = json::object();
  for (const auto& [k, v] : by_difficulty) diffs[k] = slice(v.first, v.second);
  json turns = json::object();
  for (const auto& [k, v] : by_turn) turns[std::to_string(k)] = slice(v.first, v.second);
  json cats = categories;
  cats["incorrect"] = questions.size() - exact;

  return {{"overall", slice(exact, questions.size())},
          {"by_split", splits},
          {"components", components},
          {"by_difficulty", diffs},
          {"by_turn", turns},
          {"error_categories", cats},
          {"missing_predictions", missing_predictions},
          {"metadata",
           {{"matching", "exact set match, literal values ignored"},
            {"error_rule",
             "component containment: modification atoms added or dropped by the gold edit, context atoms "
             "shared with the previous gold query"}}}};
}

json split_table(const std::vector<io::Interaction>& dialogues, const std::map<std::string, SplitTag>& splits) {
  std::map<std::string, std::map<std::string, std::size_t>> per_db;
  std::map<std::string, std::size_t> total;
  for (const auto& interaction : dialogues) {
    auto& row = per_db[interaction.db_id];
    row["interactions"] += 1;
    total["interactions"] += 1;
    for (std::size_t i = 1; i <= interaction.turns.size(); ++i) {
      auto it = splits.find(io::question_id(interaction, i));
      const std::string tag(to_string(it == splits.end() ? SplitTag::kOther : it->second));
      row["questions"] += 1;
      row[tag] += 1;
      total["questions"] += 1;
      total[tag] += 1;
    }
  }
  json rows = json::array();
  auto emit = [&](const std::string& name, std::map<std::string, std::size_t>& counts) {
    rows.push_back({{"database", name},
                    {"interactions", counts["interactions"]},
                    {"questions", counts["questions"]},
                    {"CG", counts["CG"]},
                    {"NonCG", counts["NonCG"]},
                    {"other", counts["other"]}});
  };
  for (auto& [db, counts] : per_db) emit(db, counts);
  emit("total", total);
  return rows;
}

json tag_distribution(const patterns::PatternLibrary& library) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& [hash, t] : library.templates) {
    for (const auto& tag : patterns::component_tags(t)) {
      counts[tag].first += 1;
      counts[tag].second += t.support;
    }
  }
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> sorted_counts(counts.begin(), counts.end());
  std::stable_sort(sorted_counts.begin(), sorted_counts.end(),
                   [](const auto& a, const auto& b) { return a.second.first > b.second.first; });
  json rows = json::array();
  for (const auto& [tag, c] : sorted_counts) rows.push_back({{"tag", tag}, {"templates", c.first}, {"support", c.second}});
  return rows;
}

std::string to_csv(const json& rows, const std::vector<std::string>& columns) {
  auto cell = [](const json& v) {
    std::string s = v.is_string() ? v.get<std::string>() : v.dump();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char ch : s) {
      if (ch == '"') quoted += '"';
      quoted += ch;
    }
    return quoted + "\"";
  };
  std::ostringstream out;
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      out << (i ? "," : "") << (row.contains(columns[i]) ? cell(row[columns[i]]) : "");
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace cgforge::eval
