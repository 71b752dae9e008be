#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqlgen/lexicon.hpp"
#include "sqlgen/schema.hpp"

namespace sqlgen {

enum class TokenClass { Keyword, Comparator, DbSymbol, Word };

// The partitioned token space. Ids are contiguous with the SQL-side sections
// in the low range: keywords, then comparators, then database symbols
// (tables first, then qualified attributes), then question words.
class Vocabulary {
 public:
  static constexpr const char* kSelect = "select";
  static constexpr const char* kFrom = "from";
  static constexpr const char* kJoin = "join";
  static constexpr const char* kWhere = "where";
  static constexpr const char* kAnd = "and";
  static constexpr const char* kOr = "or";
  static constexpr const char* kEos = "EOS";
  static constexpr const char* kEq = "=";

  static Vocabulary build(const Schema& schema,
                          const std::vector<TokenSeq>& questions);

  // Rebuilds from the four ordered sections (checkpoint manifests).
  static Vocabulary from_sections(std::vector<std::string> v_key,
                                  std::vector<std::string> v_cmp,
                                  std::vector<std::string> v_db,
                                  std::vector<std::string> v_nl);

  int size() const { return static_cast<int>(tokens_.size()); }
  int sql_size() const { return n_key_ + n_cmp_ + n_db_; }
  int n_key() const { return n_key_; }
  int n_cmp() const { return n_cmp_; }
  int n_db() const { return n_db_; }
  int n_nl() const { return size() - sql_size(); }

  const std::string& token_of(int id) const;
  // Exact match first, then a case-folded match; -1 when absent.
  int lookup(const std::string& token) const;
  // Exact-match id; throws on absence.
  int id_of(const std::string& token) const;

  TokenClass class_of(int id) const;
  bool is_keyword(int id) const { return id >= 0 && id < n_key_; }
  bool is_comparator(int id) const {
    return id >= n_key_ && id < n_key_ + n_cmp_;
  }
  bool is_db_symbol(int id) const {
    return id >= n_key_ + n_cmp_ && id < sql_size();
  }

  // Database symbols: table tokens are bare names, attribute tokens are
  // qualified "table.column" strings.
  bool is_table_token(int id) const;
  bool is_attribute_token(int id) const;
  std::optional<AttrRef> attribute_of(int id) const;

  int select_id() const { return select_id_; }
  int from_id() const { return from_id_; }
  int join_id() const { return join_id_; }
  int where_id() const { return where_id_; }
  int and_id() const { return and_id_; }
  int or_id() const { return or_id_; }
  int eos_id() const { return eos_id_; }
  int eq_id() const { return eq_id_; }

  std::vector<std::string> section(TokenClass cls) const;

  // FNV-1a over section sizes and tokens in id order.
  std::uint64_t hash() const;

 private:
  void index();

  std::vector<std::string> tokens_;
  std::map<std::string, int> exact_ids_;
  std::map<std::string, int> folded_ids_;  // first id wins
  int n_key_ = 0;
  int n_cmp_ = 0;
  int n_db_ = 0;
  int n_tables_ = 0;
  int select_id_ = -1, from_id_ = -1, join_id_ = -1, where_id_ = -1;
  int and_id_ = -1, or_id_ = -1, eos_id_ = -1, eq_id_ = -1;
};

}  // namespace sqlgen
