#include "sqlgen/vocabulary.hpp"

#include <algorithm>
#include <set>

#include "sqlgen/errors.hpp"
#include "sqlgen/log.hpp"
#include "sqlgen/strings.hpp"

namespace sqlgen {

Vocabulary Vocabulary::build(const Schema& schema,
                             const std::vector<TokenSeq>& questions) {
  std::vector<std::string> v_key = {kSelect, kFrom, kJoin, kWhere,
                                    kAnd,    kOr,   kEos};
  std::vector<std::string> v_cmp = {kEq};
  std::vector<std::string> v_db;
  for (const auto& t : schema.tables()) v_db.push_back(t.name);
  for (const auto& attr : schema.all_attributes()) {
    v_db.push_back(attr.qualified());
  }

  std::set<std::string> sql_folded;
  for (const auto& list : {v_key, v_cmp, v_db}) {
    for (const auto& t : list) sql_folded.insert(fold_case(t));
  }

  // Question words that collide with an SQL-side token stay out of V_NL;
  // generation-mode scoring makes them unreachable there anyway.
  std::set<std::string> nl_sorted;
  std::set<std::string> nl_folded;
  for (const auto& q : questions) {
    for (const auto& word : q.tokens) {
      if (sql_folded.count(fold_case(word))) {
        log_warn("question word '" + word +
                 "' collides with an SQL token; kept in V_SQL only");
        continue;
      }
      if (nl_folded.insert(fold_case(word)).second) nl_sorted.insert(word);
    }
  }

  return from_sections(std::move(v_key), std::move(v_cmp), std::move(v_db),
                       {nl_sorted.begin(), nl_sorted.end()});
}

Vocabulary Vocabulary::from_sections(std::vector<std::string> v_key,
                                     std::vector<std::string> v_cmp,
                                     std::vector<std::string> v_db,
                                     std::vector<std::string> v_nl) {
  Vocabulary v;
  v.n_key_ = static_cast<int>(v_key.size());
  v.n_cmp_ = static_cast<int>(v_cmp.size());
  v.n_db_ = static_cast<int>(v_db.size());
  v.tokens_.reserve(v_key.size() + v_cmp.size() + v_db.size() + v_nl.size());
  for (auto* list : {&v_key, &v_cmp, &v_db, &v_nl}) {
    for (auto& t : *list) v.tokens_.push_back(std::move(t));
  }
  v.index();
  return v;
}

void Vocabulary::index() {
  for (int id = 0; id < size(); ++id) {
    const std::string& t = tokens_[static_cast<std::size_t>(id)];
    if (!exact_ids_.emplace(t, id).second) {
      throw InternalError("vocabulary sections are not disjoint: '" + t + "'");
    }
    folded_ids_.emplace(fold_case(t), id);
  }
  n_tables_ = 0;
  for (int id = n_key_ + n_cmp_; id < sql_size(); ++id) {
    if (tokens_[static_cast<std::size_t>(id)].find('.') == std::string::npos) {
      ++n_tables_;
    } else {
      break;
    }
  }
  select_id_ = id_of(kSelect);
  from_id_ = id_of(kFrom);
  join_id_ = id_of(kJoin);
  where_id_ = id_of(kWhere);
  and_id_ = id_of(kAnd);
  or_id_ = id_of(kOr);
  eos_id_ = id_of(kEos);
  eq_id_ = id_of(kEq);
}

const std::string& Vocabulary::token_of(int id) const {
  if (id < 0 || id >= size()) {
    throw InternalError("token id out of range: " + std::to_string(id));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

int Vocabulary::lookup(const std::string& token) const {
  auto it = exact_ids_.find(token);
  if (it != exact_ids_.end()) return it->second;
  auto folded = folded_ids_.find(fold_case(token));
  return folded == folded_ids_.end() ? -1 : folded->second;
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = exact_ids_.find(token);
  if (it == exact_ids_.end()) {
    throw InternalError("token not in vocabulary: '" + token + "'");
  }
  return it->second;
}

TokenClass Vocabulary::class_of(int id) const {
  if (is_keyword(id)) return TokenClass::Keyword;
  if (is_comparator(id)) return TokenClass::Comparator;
  if (is_db_symbol(id)) return TokenClass::DbSymbol;
  if (id >= sql_size() && id < size()) return TokenClass::Word;
  throw InternalError("token id out of range: " + std::to_string(id));
}

bool Vocabulary::is_table_token(int id) const {
  int base = n_key_ + n_cmp_;
  return id >= base && id < base + n_tables_;
}

bool Vocabulary::is_attribute_token(int id) const {
  return is_db_symbol(id) && !is_table_token(id);
}

std::optional<AttrRef> Vocabulary::attribute_of(int id) const {
  if (!is_attribute_token(id)) return std::nullopt;
  return AttrRef::parse(token_of(id));
}

std::vector<std::string> Vocabulary::section(TokenClass cls) const {
  int begin = 0, end = 0;
  switch (cls) {
    case TokenClass::Keyword: begin = 0; end = n_key_; break;
    case TokenClass::Comparator: begin = n_key_; end = n_key_ + n_cmp_; break;
    case TokenClass::DbSymbol: begin = n_key_ + n_cmp_; end = sql_size(); break;
    case TokenClass::Word: begin = sql_size(); end = size(); break;
  }
  return {tokens_.begin() + begin, tokens_.begin() + end};
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ull;
    }
  };
  for (int section : {n_key_, n_cmp_, n_db_, n_nl()}) {
    mix(&section, sizeof(section));
  }
  for (const auto& t : tokens_) {
    mix(t.data(), t.size());
    char sep = '\x1f';
    mix(&sep, 1);
  }
  return h;
}

}  // namespace sqlgen
