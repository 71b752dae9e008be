#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sqlgen/lexicon.hpp"
#include "sqlgen/schema.hpp"
#include "sqlgen/vocabulary.hpp"

namespace sqlgen {

enum class Phase {
  Start,
  AfterSelect,
  AfterSelectAttr,
  AfterFrom,
  AfterTable,
  AfterJoin,
  AfterWhere,
  AfterCondAttr,
  AfterEq,
  AfterValue,
  Done,
};

const char* phase_name(Phase p);

// Where a token sits in the canonical query; drives reward assignment.
enum class TokenRole { BWord, CondAttrWord, ValueWord, Operator, Eos };

const char* role_name(TokenRole r);

struct GrammarState {
  Phase phase = Phase::Start;
  std::vector<std::string> used_tables;       // in order of appearance
  std::set<std::string> used_conditions;      // folded "attr=value" keys
  std::optional<AttrRef> selected_attr;
  std::optional<AttrRef> pending_cond_attr;
  int operator_count = 0;
  int tokens_emitted = 0;

  bool done() const { return phase == Phase::Done; }
};

// Legality bits over the decoder's output entries: first |V_SQL| generate
// entries (token ids), then one copy entry per source position.
struct MaskVector {
  int sql_size = 0;
  std::vector<std::uint8_t> bits;

  int size() const { return static_cast<int>(bits.size()); }
  bool legal(int entry) const {
    return entry >= 0 && entry < size() && bits[static_cast<std::size_t>(entry)] != 0;
  }
  bool any() const;
  int support() const;  // number of legal entries
};

// The grammar automaton for one (question, schema, vocabulary) triple.
// States are small values; legal_mask and advance are pure, so decoding and
// teacher forcing can share one machine.
//
// Beyond the phase rules, two refinements keep every walk finishable:
//  - expansions (join, and, or, where) are only legal when the walk can still
//    be completed, i.e. a fresh joinable table / a fresh (attribute, value)
//    pair exists, and the remaining token budget fits the mandatory
//    completion plus EOS (so any max_len >= 9 is guaranteed to terminate);
//  - value entries are restricted to lexicon chunks unless loose_copy_mask
//    is set, which restores copying from any source position.
class MaskMachine {
 public:
  MaskMachine(const Vocabulary& vocab, const Schema& schema, TokenSeq source,
              bool loose_copy_mask = false, int max_len = 64);

  GrammarState initial_state() const { return GrammarState{}; }

  // Throws DeadEnd when no entry is legal in a non-Done state.
  MaskVector legal_mask(const GrammarState& state) const;

  // Feeds one chosen entry; throws IllegalToken when the mask forbids it.
  GrammarState advance(const GrammarState& state, int entry) const;

  // Resolves a token string to a legal entry (generate id, else the first
  // legal copy position with the same folded text); throws IllegalToken.
  int resolve_entry(const GrammarState& state, const std::string& token) const;

  // Role of the token `entry` when emitted from `state`.
  TokenRole role_of(const GrammarState& state, int entry) const;

  int entry_count() const { return vocab_->sql_size() + n_src(); }
  int n_src() const { return static_cast<int>(source_.tokens.size()); }
  bool is_copy_entry(int entry) const { return entry >= vocab_->sql_size(); }
  // Surface text of an entry (vocabulary token or source token).
  const std::string& entry_token(int entry) const;

  const TokenSeq& source() const { return source_; }
  const Vocabulary& vocab() const { return *vocab_; }
  const Schema& schema() const { return *schema_; }
  int max_len() const { return max_len_; }
  bool loose_copy_mask() const { return loose_; }

 private:
  MaskVector raw_mask(const GrammarState& state) const;
  bool value_position_legal(const GrammarState& state, int pos) const;
  bool attr_has_fresh_value(const GrammarState& state,
                            const AttrRef& attr) const;
  bool fresh_pair_exists(const GrammarState& state) const;
  std::vector<int> joinable_fresh_tables(const GrammarState& state) const;

  const Vocabulary* vocab_;
  const Schema* schema_;
  TokenSeq source_;
  bool loose_;
  int max_len_;

  std::vector<std::string> folded_src_;
  std::vector<int> table_ids_;                 // vocab id per schema table
  std::vector<std::vector<int>> attr_ids_;     // vocab ids per schema table
};

// Folded dedup key for a condition.
std::string condition_key(const AttrRef& attr, const std::string& value);

}  // namespace sqlgen
