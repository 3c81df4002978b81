#include "cgforge/sql/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "cgforge/core/error.hpp"
#include "cgforge/core/text.hpp"

namespace cgforge::sql {
namespace {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class Tok { kIdent, kNumber, kString, kSymbol, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;  // identifiers keep their spelling; strings are unquoted
  std::size_t offset = 0;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto fail = [&](const std::string& what) {
    throw ParseError(what + " at offset " + std::to_string(i));
  };
  while (i < src.size()) {
    const unsigned char c = static_cast<unsigned char>(src[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    Token t;
    t.offset = i;
    if (std::isalpha(c) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) {
        ++j;
      }
      t.kind = Tok::kIdent;
      t.text = std::string(src.substr(i, j - i));
      i = j;
    } else if (c == '`') {
      const std::size_t close = src.find('`', i + 1);
      if (close == std::string_view::npos) fail("unterminated quoted identifier");
      t.kind = Tok::kIdent;
      t.text = std::string(src.substr(i + 1, close - i - 1));
      i = close + 1;
    } else if (std::isdigit(c) ||
               (c == '.' && i + 1 < src.size() &&
                std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      bool seen_dot = false;
      while (j < src.size()) {
        const char d = src[j];
        if (std::isdigit(static_cast<unsigned char>(d))) {
          ++j;
        } else if (d == '.' && !seen_dot) {
          seen_dot = true;
          ++j;
        } else if ((d == 'e' || d == 'E') && j + 1 < src.size() &&
                   (std::isdigit(static_cast<unsigned char>(src[j + 1])) || src[j + 1] == '-' ||
                    src[j + 1] == '+')) {
          j += 2;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
          break;
        } else {
          break;
        }
      }
      t.kind = Tok::kNumber;
      t.text = std::string(src.substr(i, j - i));
      i = j;
    } else if (c == '\'' || c == '"') {
      const char quote = static_cast<char>(c);
      std::string value;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < src.size()) {
        if (src[j] == quote) {
          if (j + 1 < src.size() && src[j + 1] == quote) {
            value += quote;
            j += 2;
            continue;
          }
          closed = true;
          ++j;
          break;
        }
        value += src[j++];
      }
      if (!closed) fail("unterminated string literal");
      t.kind = Tok::kString;
      t.text = std::move(value);
      i = j;
    } else {
      static constexpr std::array<std::string_view, 4> kTwoChar = {"!=", "<>", ">=", "<="};
      t.kind = Tok::kSymbol;
      const std::string_view rest = src.substr(i);
      bool matched = false;
      for (auto sym : kTwoChar) {
        if (rest.substr(0, 2) == sym) {
          t.text = std::string(sym);
          i += 2;
          matched = true;
          break;
        }
      }
      if (!matched) {
        static constexpr std::string_view kOneChar = "(),.*+-/=<>;?";
        if (kOneChar.find(static_cast<char>(c)) == std::string_view::npos) {
          fail(std::string("unexpected character '") + static_cast<char>(c) + "'");
        }
        t.text = std::string(1, static_cast<char>(c));
        ++i;
      }
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::kEnd;
  end.offset = src.size();
  out.push_back(end);
  return out;
}

const std::set<std::string>& reserved_words() {
  static const std::set<std::string> kWords = {
      "select", "from",  "where",   "group",  "by",    "having", "order", "limit",
      "union",  "intersect", "except", "join", "on",   "as",     "and",   "or",
      "not",    "in",    "like",    "between", "asc", "desc",   "distinct", "inner",
      "left",   "right", "outer",   "cross",  "full",  "natural", "all", "exists",
      "is",     "null",  "case",    "when",   "then",  "else",   "end"};
  return kWords;
}

std::optional<Agg> agg_from_name(const std::string& lower) {
  if (lower == "count") return Agg::kCount;
  if (lower == "sum") return Agg::kSum;
  if (lower == "avg") return Agg::kAvg;
  if (lower == "min") return Agg::kMin;
  if (lower == "max") return Agg::kMax;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Syntax
// ---------------------------------------------------------------------------

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Query parse_statement() {
    Query q = parse_query();
    accept_symbol(";");
    if (peek().kind != Tok::kEnd) fail("unexpected trailing input '" + peek().text + "'");
    return q;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " at offset " + std::to_string(peek().offset));
  }

  bool is_kw(std::string_view kw, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Tok::kIdent && text::iequals(t.text, kw);
  }
  bool accept_kw(std::string_view kw) {
    if (!is_kw(kw)) return false;
    next();
    return true;
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail("expected " + text::to_upper(kw));
  }
  bool is_symbol(std::string_view s, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Tok::kSymbol && t.text == s;
  }
  bool accept_symbol(std::string_view s) {
    if (!is_symbol(s)) return false;
    next();
    return true;
  }
  void expect_symbol(std::string_view s) {
    if (!accept_symbol(s)) fail("expected '" + std::string(s) + "'");
  }
  bool is_reserved(const Token& t) const {
    return t.kind == Tok::kIdent && reserved_words().count(text::to_lower(t.text)) > 0;
  }

  Query parse_query() {
    Query q = parse_core();
    std::optional<SetOpKind> kind;
    if (accept_kw("union")) {
      kind = SetOpKind::kUnion;
    } else if (accept_kw("intersect")) {
      kind = SetOpKind::kIntersect;
    } else if (accept_kw("except")) {
      kind = SetOpKind::kExcept;
    }
    if (kind) {
      if (is_kw("all")) fail("set operation ALL is outside the supported subset");
      q.set_op = SetOp{*kind, Box<Query>(parse_query())};
    }
    return q;
  }

  Query parse_core() {
    expect_kw("select");
    Query q;
    q.distinct = accept_kw("distinct");
    if (is_kw("from")) fail("empty select list");
    do {
      q.select.push_back(parse_agg_expr());
      if (accept_kw("as")) {
        if (peek().kind != Tok::kIdent && peek().kind != Tok::kString) fail("expected alias");
        next();  // output aliases do not participate in the tree
      }
    } while (accept_symbol(","));
    expect_kw("from");
    q.from = parse_from();
    if (accept_kw("where")) q.where = parse_or();
    if (accept_kw("group")) {
      expect_kw("by");
      do {
        q.group_by.push_back(parse_column_ref());
      } while (accept_symbol(","));
    }
    if (accept_kw("having")) q.having = parse_or();
    if (accept_kw("order")) {
      expect_kw("by");
      do {
        OrderItem item;
        item.expr = parse_agg_expr();
        if (accept_kw("desc")) {
          item.descending = true;
        } else {
          accept_kw("asc");
        }
        q.order_by.push_back(std::move(item));
      } while (accept_symbol(","));
    }
    if (accept_kw("limit")) {
      if (peek().kind != Tok::kNumber) fail("LIMIT expects a non-negative integer");
      const std::string n = next().text;
      if (n.find_first_not_of("0123456789") != std::string::npos) {
        fail("LIMIT expects a non-negative integer");
      }
      q.limit = std::stoll(n);
    }
    return q;
  }

  TableRef parse_table_ref() {
    TableRef t;
    if (accept_symbol("(")) {
      if (!is_kw("select")) fail("expected subquery");
      t.subquery = Box<Query>(parse_query());
      expect_symbol(")");
    } else {
      if (peek().kind != Tok::kIdent || is_reserved(peek())) fail("expected table name");
      t.table = next().text;
    }
    if (accept_kw("as")) {
      if (peek().kind != Tok::kIdent) fail("expected table alias");
      t.alias = next().text;
    } else if (peek().kind == Tok::kIdent && !is_reserved(peek())) {
      t.alias = next().text;
    }
    return t;
  }

  FromClause parse_from() {
    FromClause f;
    f.tables.push_back(parse_table_ref());
    for (;;) {
      if (accept_symbol(",")) {
        f.tables.push_back(parse_table_ref());
        continue;
      }
      if (is_kw("left") || is_kw("right") || is_kw("outer") || is_kw("cross") ||
          is_kw("full") || is_kw("natural")) {
        fail("only inner joins are supported");
      }
      if (accept_kw("inner")) {
        if (!is_kw("join")) fail("expected JOIN");
      }
      if (accept_kw("join")) {
        f.tables.push_back(parse_table_ref());
        continue;
      }
      if (accept_kw("on")) {
        do {
          JoinCondition j;
          j.left = parse_column_ref();
          expect_symbol("=");
          j.right = parse_column_ref();
          f.joins.push_back(std::move(j));
        } while (accept_kw("and"));
        continue;
      }
      break;
    }
    return f;
  }

  ColumnRef parse_column_ref() {
    if (accept_symbol("*")) return ColumnRef::star();
    if (peek().kind != Tok::kIdent || is_reserved(peek())) fail("expected column reference");
    ColumnRef c;
    c.column = next().text;
    if (accept_symbol(".")) {
      c.table = c.column;
      if (accept_symbol("*")) {
        c = ColumnRef::star();
      } else {
        if (peek().kind != Tok::kIdent) fail("expected column name");
        c.column = next().text;
      }
    }
    return c;
  }

  bool at_aggregate() const {
    return peek().kind == Tok::kIdent && agg_from_name(text::to_lower(peek().text)) &&
           is_symbol("(", 1);
  }

  std::optional<ArithOp> peek_arith() const {
    if (peek().kind != Tok::kSymbol) return std::nullopt;
    const std::string& s = peek().text;
    if (s == "+") return ArithOp::kAdd;
    if (s == "-") return ArithOp::kSub;
    if (s == "*") return ArithOp::kMul;
    if (s == "/") return ArithOp::kDiv;
    return std::nullopt;
  }

  ColUnit parse_col_unit() {
    ColUnit u;
    if (at_aggregate()) {
      u.agg = *agg_from_name(text::to_lower(next().text));
      expect_symbol("(");
      u.distinct = accept_kw("distinct");
      u.column = parse_column_ref();
      expect_symbol(")");
    } else {
      u.column = parse_column_ref();
    }
    return u;
  }

  ValUnit parse_val_unit() {
    ValUnit v;
    v.left = parse_col_unit();
    if (auto op = peek_arith()) {
      next();
      v.op = op;
      v.right = parse_col_unit();
    }
    return v;
  }

  AggExpr parse_agg_expr() {
    AggExpr e;
    if (at_aggregate()) {
      const Agg agg = *agg_from_name(text::to_lower(next().text));
      expect_symbol("(");
      const bool distinct = accept_kw("distinct");
      ValUnit inner = parse_val_unit();
      expect_symbol(")");
      if (auto op = peek_arith(); op && !inner.op) {
        // `agg(x) op y`: the aggregate belongs to the left column unit.
        next();
        e.value.left = inner.left;
        e.value.left.agg = agg;
        e.value.left.distinct = distinct;
        e.value.op = op;
        e.value.right = parse_col_unit();
        return e;
      }
      e.agg = agg;
      e.distinct = distinct;
      e.value = std::move(inner);
      return e;
    }
    e.value = parse_val_unit();
    return e;
  }

  Predicate parse_or() {
    Predicate first = parse_and();
    if (!is_kw("or")) return first;
    Predicate p;
    p.kind = Connective::kOr;
    p.children.push_back(std::move(first));
    while (accept_kw("or")) p.children.push_back(parse_and());
    return p;
  }

  Predicate parse_and() {
    Predicate first = parse_primary();
    if (!is_kw("and")) return first;
    Predicate p;
    p.kind = Connective::kAnd;
    p.children.push_back(std::move(first));
    while (accept_kw("and")) p.children.push_back(parse_primary());
    return p;
  }

  Predicate parse_primary() {
    if (is_symbol("(") && !is_kw("select", 1)) {
      next();
      Predicate p = parse_or();
      expect_symbol(")");
      return p;
    }
    return Predicate::leaf(parse_condition());
  }

  Value parse_value() {
    const Token& t = peek();
    if (t.kind == Tok::kString) return Value::string(next().text);
    if (t.kind == Tok::kNumber) return Value::number(next().text);
    if (is_symbol("-") && peek(1).kind == Tok::kNumber) {
      next();
      return Value::number("-" + next().text);
    }
    if (accept_symbol("?")) return Value::placeholder();
    fail("expected literal value");
  }

  Operand parse_operand() {
    if (is_symbol("(") && is_kw("select", 1)) {
      next();
      Query sub = parse_query();
      expect_symbol(")");
      return Box<Query>(std::move(sub));
    }
    if (peek().kind == Tok::kIdent && !is_reserved(peek())) return parse_column_ref();
    return parse_value();
  }

  Condition parse_condition() {
    Condition c;
    c.left = parse_agg_expr();
    if (accept_kw("not")) {
      if (accept_kw("in")) {
        c.op = CompareOp::kNotIn;
      } else if (accept_kw("like")) {
        c.op = CompareOp::kNotLike;
      } else {
        fail("expected IN or LIKE after NOT");
      }
    } else if (accept_kw("in")) {
      c.op = CompareOp::kIn;
    } else if (accept_kw("like")) {
      c.op = CompareOp::kLike;
    } else if (accept_kw("between")) {
      c.op = CompareOp::kBetween;
      c.right = parse_value();
      expect_kw("and");
      c.upper = parse_value();
      return c;
    } else {
      const Token& t = peek();
      if (t.kind != Tok::kSymbol) fail("expected comparison operator");
      static const std::array<std::pair<std::string_view, CompareOp>, 7> kOps = {{
          {"=", CompareOp::kEq},
          {"!=", CompareOp::kNe},
          {"<>", CompareOp::kNe},
          {">", CompareOp::kGt},
          {"<", CompareOp::kLt},
          {">=", CompareOp::kGe},
          {"<=", CompareOp::kLe},
      }};
      auto it = std::find_if(kOps.begin(), kOps.end(),
                             [&](const auto& kv) { return kv.first == t.text; });
      if (it == kOps.end()) fail("expected comparison operator");
      next();
      c.op = it->second;
    }
    if ((c.op == CompareOp::kIn || c.op == CompareOp::kNotIn) &&
        !(is_symbol("(") && is_kw("select", 1))) {
      fail("IN requires a subquery");
    }
    c.right = parse_operand();
    return c;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Name resolution
// ---------------------------------------------------------------------------

struct ScopeEntry {
  std::string alias;  // lower-case; may be empty
  int table = -1;     // -1 for derived tables
};
using Scope = std::vector<ScopeEntry>;

class Resolver {
 public:
  explicit Resolver(const Schema& schema) : schema_(schema) {}

  void resolve(Query& q, std::vector<const Scope*> outer) {
    Scope scope;
    for (auto& t : q.from.tables) {
      if (t.subquery) {
        resolve(**t.subquery, {});
        scope.push_back({text::to_lower(t.alias), -1});
        continue;
      }
      auto idx = schema_.find_table(t.table);
      if (!idx) throw ResolutionError("unknown table '" + t.table + "'");
      t.table = schema_.tables[static_cast<std::size_t>(*idx)];
      scope.push_back({text::to_lower(t.alias), *idx});
    }
    outer.insert(outer.begin(), &scope);

    auto col = [&](ColumnRef& c) { resolve_column(c, outer); };
    for (auto& item : q.select) resolve_agg(item, outer);
    for (auto& j : q.from.joins) {
      col(j.left);
      col(j.right);
    }
    if (q.where) resolve_predicate(*q.where, outer);
    for (auto& g : q.group_by) col(g);
    if (q.having) resolve_predicate(*q.having, outer);
    for (auto& o : q.order_by) resolve_agg(o.expr, outer);
    if (q.set_op) {
      outer.erase(outer.begin());
      resolve(*q.set_op->right, outer);
    }
  }

 private:
  void resolve_agg(AggExpr& e, const std::vector<const Scope*>& scopes) {
    resolve_column(e.value.left.column, scopes);
    if (e.value.op) resolve_column(e.value.right.column, scopes);
  }

  void resolve_predicate(Predicate& p, const std::vector<const Scope*>& scopes) {
    if (p.kind != Connective::kLeaf) {
      for (auto& c : p.children) resolve_predicate(c, scopes);
      return;
    }
    Condition& c = p.condition;
    resolve_agg(c.left, scopes);
    if (auto* ref = std::get_if<ColumnRef>(&c.right)) {
      resolve_column(*ref, scopes);
    } else if (auto* sub = std::get_if<Box<Query>>(&c.right)) {
      resolve(**sub, scopes);
    }
  }

  void resolve_column(ColumnRef& c, const std::vector<const Scope*>& scopes) {
    if (c.is_star()) {
      c.table.clear();
      return;
    }
    if (!c.table.empty()) {
      const std::string qualifier = text::to_lower(c.table);
      for (const Scope* scope : scopes) {
        for (const auto& e : *scope) {
          if (e.table >= 0 && (e.alias == qualifier ||
                               text::iequals(schema_.tables[static_cast<std::size_t>(e.table)],
                                             qualifier))) {
            bind(c, e.table);
            return;
          }
          if (e.table < 0 && e.alias == qualifier) {
            throw ResolutionError("columns of derived table '" + c.table +
                                  "' cannot be referenced");
          }
        }
      }
      throw ResolutionError("unknown table or alias '" + c.table + "'");
    }
    for (const Scope* scope : scopes) {
      std::set<int> owners;
      for (const auto& e : *scope) {
        if (e.table >= 0 && schema_.find_column(e.table, c.column)) owners.insert(e.table);
      }
      if (owners.size() == 1) {
        bind(c, *owners.begin());
        return;
      }
      if (owners.size() > 1) throw ResolutionError("ambiguous column '" + c.column + "'");
    }
    throw ResolutionError("unknown column '" + c.column + "'");
  }

  void bind(ColumnRef& c, int table) {
    auto col = schema_.find_column(table, c.column);
    if (!col) {
      throw ResolutionError("unknown column '" + c.column + "' in table '" +
                            schema_.tables[static_cast<std::size_t>(table)] + "'");
    }
    c.table = schema_.tables[static_cast<std::size_t>(table)];
    c.column = schema_.columns[static_cast<std::size_t>(*col)].name;
  }

  const Schema& schema_;
};

// ---------------------------------------------------------------------------
// Invariants
// ---------------------------------------------------------------------------

class Checker {
 public:
  explicit Checker(const Schema& schema) : schema_(schema) {}

  std::optional<std::string> check(const Query& q, std::vector<std::set<std::string>> outer,
                                   int depth = 0) {
    if (q.select.empty()) return "empty select list";
    if (q.from.tables.empty()) return "empty FROM clause";
    std::set<std::string> scope;
    for (const auto& t : q.from.tables) {
      if (t.subquery) {
        if (depth > 0) return "subquery nested deeper than one level";
        if (auto v = check(**t.subquery, {}, depth + 1)) return v;
        continue;
      }
      auto idx = schema_.find_table(t.table);
      if (!idx) return "unknown table '" + t.table + "'";
      scope.insert(text::to_lower(t.table));
    }
    outer.insert(outer.begin(), scope);

    std::optional<std::string> err;
    auto col = [&](const ColumnRef& c) {
      if (err || c.is_star()) return;
      const std::string table = text::to_lower(c.table);
      const bool in_scope = std::any_of(outer.begin(), outer.end(),
                                        [&](const auto& s) { return s.count(table) > 0; });
      if (!in_scope) {
        err = "column '" + c.table + "." + c.column + "' refers to a table outside FROM";
        return;
      }
      auto t = schema_.find_table(c.table);
      if (!t || !schema_.find_column(*t, c.column)) {
        err = "unknown column '" + c.table + "." + c.column + "'";
      }
    };
    auto agg = [&](const AggExpr& e) {
      col(e.value.left.column);
      if (e.value.op) col(e.value.right.column);
    };
    for (const auto& item : q.select) agg(item);
    for (const auto& j : q.from.joins) {
      col(j.left);
      col(j.right);
    }
    if (q.where) check_predicate(*q.where, outer, depth, agg, col, err);
    for (const auto& g : q.group_by) col(g);
    if (q.having) check_predicate(*q.having, outer, depth, agg, col, err);
    for (const auto& o : q.order_by) agg(o.expr);
    if (err) return err;
    if (q.having && q.group_by.empty()) return "HAVING without GROUP BY";
    if (q.limit && *q.limit < 0) return "negative LIMIT";
    if (q.set_op) {
      outer.erase(outer.begin());
      if (q.set_op->right->select.size() != q.select.size()) {
        return "set operation operands differ in select arity";
      }
      if (auto v = check(*q.set_op->right, outer, depth)) return v;
    }
    return std::nullopt;
  }

 private:
  template <typename AggFn, typename ColFn>
  void check_predicate(const Predicate& p, const std::vector<std::set<std::string>>& scopes,
                       int depth, AggFn& agg, ColFn& col, std::optional<std::string>& err) {
    if (err) return;
    if (p.kind != Connective::kLeaf) {
      if (p.children.size() < 2) err = "connective with fewer than two operands";
      for (const auto& c : p.children) check_predicate(c, scopes, depth, agg, col, err);
      return;
    }
    const Condition& c = p.condition;
    agg(c.left);
    if (const auto* ref = std::get_if<ColumnRef>(&c.right)) col(*ref);
    if (c.op == CompareOp::kBetween) {
      if (!std::holds_alternative<Value>(c.right) || !c.upper) {
        err = "BETWEEN requires exactly two values";
      }
      return;
    }
    if (c.upper) {
      err = "second bound on non-BETWEEN condition";
      return;
    }
    if (const auto* sub = std::get_if<Box<Query>>(&c.right)) {
      switch (c.op) {
        case CompareOp::kIn:
        case CompareOp::kNotIn:
        case CompareOp::kEq:
        case CompareOp::kGt:
        case CompareOp::kLt:
        case CompareOp::kGe:
        case CompareOp::kLe:
          break;
        default:
          err = std::string("subquery not allowed with operator ") +
                std::string(to_string(c.op));
          return;
      }
      if (depth > 0) {
        err = "subquery nested deeper than one level";
        return;
      }
      if (auto v = check(**sub, scopes, depth + 1)) err = v;
    } else if (c.op == CompareOp::kIn || c.op == CompareOp::kNotIn) {
      err = "IN requires a subquery";
    }
  }

  const Schema& schema_;
};

}  // namespace

std::optional<std::string> find_violation(const Query& q, const Schema& schema) {
  return Checker(schema).check(q, {});
}

Query parse_sql(std::string_view text, const Schema& schema) {
  if (text::trim(text).empty()) throw ParseError("empty query");
  Query q = Parser(tokenize(text)).parse_statement();
  Resolver(schema).resolve(q, {});
  canonicalize(q);
  if (auto violation = find_violation(q, schema)) throw ParseError(*violation);
  return q;
}

}  // namespace cgforge::sql
