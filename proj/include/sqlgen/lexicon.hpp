#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sqlgen/database.hpp"

namespace sqlgen {

// A tokenized question. Chunk tokens are whole attribute values merged by
// the lexicon's longest match and are the only copyable positions under the
// default mask.
struct TokenSeq {
  std::vector<std::string> tokens;
  std::vector<std::uint8_t> is_value_chunk;

  std::size_t size() const { return tokens.size(); }
  std::string text() const;
};

// Maps every distinct cell value of the database to the set of qualified
// attributes it occurs under. Lookup folds ASCII case; keys keep the first
// surface form seen in schema/row order.
class ValueLexicon {
 public:
  static ValueLexicon build(const Database& db,
                            const std::set<std::string>& excluded_attributes = {});

  bool contains(const std::string& value) const;
  // nullptr when absent; the set holds qualified attribute names.
  const std::set<std::string>* attributes_of(const std::string& value) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t max_key_words() const { return max_key_words_; }

 private:
  struct Entry {
    std::string surface;
    std::set<std::string> attributes;
  };
  std::map<std::string, Entry> entries_;  // folded value -> entry
  std::size_t max_key_words_ = 0;
};

// Whitespace tokenization followed by greedy longest-match merging of
// consecutive tokens into one chunk whenever the joined string is a lexicon
// key. Ties break toward the longer value.
TokenSeq tokenize_question(const std::string& text, const ValueLexicon& lexicon);

// The distinct chunk tokens of a question (the set U). Distinctness folds
// case; surfaces keep first appearance order.
std::vector<std::string> extract_value_set(const TokenSeq& tokens,
                                           const ValueLexicon& lexicon);

}  // namespace sqlgen
