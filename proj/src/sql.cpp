#include "sqlgen/sql.hpp"

#include <algorithm>
#include <set>

#include "sqlgen/errors.hpp"
#include "sqlgen/strings.hpp"
#include "sqlgen/vocabulary.hpp"

namespace sqlgen {

std::vector<std::string> SqlQuery::to_tokens() const {
  std::vector<std::string> out;
  out.push_back(Vocabulary::kSelect);
  out.push_back(select_attr.qualified());
  out.push_back(Vocabulary::kFrom);
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (i > 0) out.push_back(Vocabulary::kJoin);
    out.push_back(tables[i]);
  }
  out.push_back(Vocabulary::kWhere);
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    if (i > 0) {
      out.push_back(connectives[i - 1] == Connective::And ? Vocabulary::kAnd
                                                          : Vocabulary::kOr);
    }
    out.push_back(conditions[i].attr.qualified());
    out.push_back(Vocabulary::kEq);
    out.push_back(conditions[i].value);
  }
  out.push_back(Vocabulary::kEos);
  return out;
}

std::string SqlQuery::text() const {
  auto toks = to_tokens();
  toks.pop_back();  // drop EOS
  return join(toks, " ");
}

namespace {

class TokenCursor {
 public:
  explicit TokenCursor(const std::vector<std::string>& toks) : toks_(toks) {}

  bool done() const { return pos_ >= toks_.size(); }
  std::size_t pos() const { return pos_; }

  const std::string& peek() const {
    if (done()) fail("token", "<end>");
    return toks_[pos_];
  }

  std::string take(const std::string& expected) {
    if (done()) fail(expected, "<end>");
    return toks_[pos_++];
  }

  void expect_keyword(const std::string& kw) {
    std::string got = take(kw);
    if (!fold_equal(got, kw)) fail_at(pos_ - 1, kw, got);
  }

  [[noreturn]] void fail(const std::string& expected,
                         const std::string& got) const {
    fail_at(pos_, expected, got);
  }

  [[noreturn]] static void fail_at(std::size_t at, const std::string& expected,
                                   const std::string& got) {
    throw GrammarViolation(at, expected, got);
  }

 private:
  const std::vector<std::string>& toks_;
  std::size_t pos_ = 0;
};

bool is_keyword(const std::string& tok) {
  for (const char* kw : {Vocabulary::kSelect, Vocabulary::kFrom, Vocabulary::kJoin,
                         Vocabulary::kWhere, Vocabulary::kAnd, Vocabulary::kOr, Vocabulary::kEos,
                         Vocabulary::kEq}) {
    if (fold_equal(tok, kw)) return true;
  }
  return false;
}

AttrRef parse_attr(TokenCursor& cur, const Schema& schema,
                   const char* what) {
  std::size_t at = cur.pos();
  std::string tok = cur.take(what);
  auto dot = tok.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == tok.size()) {
    TokenCursor::fail_at(at, what, tok);
  }
  AttrRef ref{tok.substr(0, dot), tok.substr(dot + 1)};
  if (!schema.has_attribute(ref)) {
    throw SchemaError("unknown attribute '" + tok + "'");
  }
  return ref;
}

}  // namespace

SqlQuery parse_token_sequence(const std::vector<std::string>& tokens,
                              const Schema& schema) {
  TokenCursor cur(tokens);
  SqlQuery q;

  cur.expect_keyword(Vocabulary::kSelect);
  q.select_attr = parse_attr(cur, schema, "attribute");
  cur.expect_keyword(Vocabulary::kFrom);

  {
    std::size_t at = cur.pos();
    std::string t = cur.take("table");
    if (schema.find_table(t) == nullptr) {
      throw SchemaError("unknown table '" + t + "'");
    }
    if (!fold_equal(t, q.select_attr.table)) {
      TokenCursor::fail_at(at, q.select_attr.table, t);
    }
    q.tables.push_back(t);
  }
  while (!cur.done() && fold_equal(cur.peek(), Vocabulary::kJoin)) {
    cur.expect_keyword(Vocabulary::kJoin);
    std::size_t at = cur.pos();
    std::string t = cur.take("table");
    if (schema.find_table(t) == nullptr) {
      throw SchemaError("unknown table '" + t + "'");
    }
    q.tables.push_back(t);
    (void)at;
  }

  cur.expect_keyword(Vocabulary::kWhere);

  auto table_listed = [&q](const std::string& name) {
    return std::any_of(q.tables.begin(), q.tables.end(),
                       [&](const std::string& t) {
                         return fold_equal(t, name);
                       });
  };

  bool more = true;
  while (more) {
    std::size_t at = cur.pos();
    AttrRef attr = parse_attr(cur, schema, "attribute");
    if (!table_listed(attr.table)) {
      TokenCursor::fail_at(at, "attribute of a listed table",
                           attr.qualified());
    }
    cur.expect_keyword(Vocabulary::kEq);
    // A value run: one or more tokens up to the next connective or EOS.
    std::vector<std::string> value_words;
    while (!cur.done() && !fold_equal(cur.peek(), Vocabulary::kAnd) &&
           !fold_equal(cur.peek(), Vocabulary::kOr) &&
           !fold_equal(cur.peek(), Vocabulary::kEos)) {
      value_words.push_back(cur.take("value"));
    }
    if (value_words.empty()) {
      cur.fail("value", cur.done() ? "<end>" : cur.peek());
    }
    q.conditions.push_back({attr, join(value_words, " ")});

    std::string tok = cur.take("and|or|EOS");
    if (fold_equal(tok, Vocabulary::kAnd)) {
      q.connectives.push_back(Connective::And);
    } else if (fold_equal(tok, Vocabulary::kOr)) {
      q.connectives.push_back(Connective::Or);
    } else if (fold_equal(tok, Vocabulary::kEos)) {
      more = false;
    } else {
      TokenCursor::fail_at(cur.pos() - 1, "and|or|EOS", tok);
    }
  }

  if (!cur.done()) {
    cur.fail("<end>", cur.peek());
  }
  if (is_keyword(q.select_attr.column)) {
    // Unreachable with a validated schema; belt and braces.
    throw SchemaError("attribute name collides with a keyword");
  }
  return q;
}

}  // namespace sqlgen
