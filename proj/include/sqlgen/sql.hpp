#pragma once

#include <string>
#include <vector>

#include "sqlgen/schema.hpp"

namespace sqlgen {

enum class Connective { And, Or };

struct Condition {
  AttrRef attr;
  std::string value;  // surface form as emitted / written

  bool operator==(const Condition&) const = default;
};

struct JoinPredicate {
  AttrRef left;
  AttrRef right;

  bool operator==(const JoinPredicate&) const = default;
};

// Canonical query shape:
//   select A from T1 (join Tk)* where attr = value ((and|or) attr = value)* EOS
// Join predicates are not part of the token stream; they are inferred from the
// schema's foreign-key graph when the query is executed.
struct SqlQuery {
  AttrRef select_attr;
  std::vector<std::string> tables;          // order of appearance
  std::vector<Condition> conditions;        // order of appearance
  std::vector<Connective> connectives;      // size == conditions.size() - 1

  bool operator==(const SqlQuery&) const = default;

  // Token stream in canonical surface order, terminated with EOS.
  std::vector<std::string> to_tokens() const;
  std::string text() const;  // tokens joined with single spaces, no EOS
};

// Parse a decoded token sequence into a query. Values may span several
// consecutive tokens; a value run ends where the next token is one of
// `and`, `or`, EOS. Throws GrammarViolation on any malformed sequence and
// SchemaError if a referenced table or attribute does not exist.
SqlQuery parse_token_sequence(const std::vector<std::string>& tokens,
                              const Schema& schema);

}  // namespace sqlgen
