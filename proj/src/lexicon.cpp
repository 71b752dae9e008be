#include "sqlgen/lexicon.hpp"

#include "sqlgen/strings.hpp"

namespace sqlgen {

std::string TokenSeq::text() const { return join(tokens, " "); }

ValueLexicon ValueLexicon::build(const Database& db,
                                 const std::set<std::string>& excluded_attributes) {
  ValueLexicon lex;
  for (const auto& table : db.schema().tables()) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      AttrRef attr{table.name, table.columns[c].name};
      if (excluded_attributes.count(attr.qualified())) continue;
      for (const auto& row : db.rows(table.name)) {
        const std::string& value = row[c];
        if (value.empty()) continue;
        auto [it, inserted] =
            lex.entries_.try_emplace(fold_case(value), Entry{value, {}});
        it->second.attributes.insert(attr.qualified());
        if (inserted) {
          std::size_t words = split_whitespace(value).size();
          if (words > lex.max_key_words_) lex.max_key_words_ = words;
        }
      }
    }
  }
  return lex;
}

bool ValueLexicon::contains(const std::string& value) const {
  return entries_.count(fold_case(value)) > 0;
}

const std::set<std::string>* ValueLexicon::attributes_of(
    const std::string& value) const {
  auto it = entries_.find(fold_case(value));
  return it == entries_.end() ? nullptr : &it->second.attributes;
}

TokenSeq tokenize_question(const std::string& text, const ValueLexicon& lexicon) {
  std::vector<std::string> words = split_whitespace(text);
  TokenSeq seq;
  std::size_t i = 0;
  while (i < words.size()) {
    std::size_t window = std::min(lexicon.max_key_words(), words.size() - i);
    bool merged = false;
    for (std::size_t len = window; len >= 1 && !merged; --len) {
      std::string candidate = words[i];
      for (std::size_t k = 1; k < len; ++k) candidate += " " + words[i + k];
      if (lexicon.contains(candidate)) {
        seq.tokens.push_back(std::move(candidate));
        seq.is_value_chunk.push_back(1);
        i += len;
        merged = true;
      }
    }
    if (!merged) {
      seq.tokens.push_back(words[i]);
      seq.is_value_chunk.push_back(0);
      ++i;
    }
  }
  return seq;
}

std::vector<std::string> extract_value_set(const TokenSeq& tokens,
                                           const ValueLexicon& lexicon) {
  (void)lexicon;  // chunks were flagged with the same lexicon at tokenize time
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!tokens.is_value_chunk[i]) continue;
    if (seen.insert(fold_case(tokens.tokens[i])).second) {
      out.push_back(tokens.tokens[i]);
    }
  }
  return out;
}

}  // namespace sqlgen
