#include "sqlgen/grammar.hpp"

#include <algorithm>

#include "sqlgen/errors.hpp"
#include "sqlgen/strings.hpp"

namespace sqlgen {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Start: return "Start";
    case Phase::AfterSelect: return "AfterSelect";
    case Phase::AfterSelectAttr: return "AfterSelectAttr";
    case Phase::AfterFrom: return "AfterFrom";
    case Phase::AfterTable: return "AfterTable";
    case Phase::AfterJoin: return "AfterJoin";
    case Phase::AfterWhere: return "AfterWhere";
    case Phase::AfterCondAttr: return "AfterCondAttr";
    case Phase::AfterEq: return "AfterEq";
    case Phase::AfterValue: return "AfterValue";
    case Phase::Done: return "Done";
  }
  return "?";
}

const char* role_name(TokenRole r) {
  switch (r) {
    case TokenRole::BWord: return "b-word";
    case TokenRole::CondAttrWord: return "cond-attr";
    case TokenRole::ValueWord: return "value";
    case TokenRole::Operator: return "operator";
    case TokenRole::Eos: return "eos";
  }
  return "?";
}

bool MaskVector::any() const {
  return std::any_of(bits.begin(), bits.end(),
                     [](std::uint8_t b) { return b != 0; });
}

int MaskVector::support() const {
  int n = 0;
  for (std::uint8_t b : bits) n += (b != 0);
  return n;
}

std::string condition_key(const AttrRef& attr, const std::string& value) {
  return fold_case(attr.qualified()) + "=" + fold_case(value);
}

MaskMachine::MaskMachine(const Vocabulary& vocab, const Schema& schema,
                         TokenSeq source, bool loose_copy_mask, int max_len)
    : vocab_(&vocab),
      schema_(&schema),
      source_(std::move(source)),
      loose_(loose_copy_mask),
      max_len_(max_len) {
  if (max_len_ < 1) throw InternalError("max_len must be positive");
  folded_src_.reserve(source_.tokens.size());
  for (const auto& t : source_.tokens) folded_src_.push_back(fold_case(t));
  for (const auto& t : schema_->tables()) {
    table_ids_.push_back(vocab_->id_of(t.name));
    std::vector<int> attrs;
    for (const auto& c : t.columns) {
      attrs.push_back(vocab_->id_of(t.name + "." + c.name));
    }
    attr_ids_.push_back(std::move(attrs));
  }
}

bool MaskMachine::value_position_legal(const GrammarState& state,
                                       int pos) const {
  if (!loose_ && source_.is_value_chunk[static_cast<std::size_t>(pos)] == 0) {
    return false;
  }
  if (!state.pending_cond_attr) return false;
  return !state.used_conditions.contains(condition_key(
      *state.pending_cond_attr, folded_src_[static_cast<std::size_t>(pos)]));
}

bool MaskMachine::attr_has_fresh_value(const GrammarState& state,
                                       const AttrRef& attr) const {
  for (std::size_t j = 0; j < folded_src_.size(); ++j) {
    if (!loose_ && source_.is_value_chunk[j] == 0) continue;
    if (!state.used_conditions.contains(condition_key(attr, folded_src_[j]))) {
      return true;
    }
  }
  return false;
}

bool MaskMachine::fresh_pair_exists(const GrammarState& state) const {
  for (const auto& table : state.used_tables) {
    int ti = schema_->table_index(table);
    for (const auto& col : schema_->tables()[static_cast<std::size_t>(ti)].columns) {
      if (attr_has_fresh_value(state, AttrRef{table, col.name})) return true;
    }
  }
  return false;
}

std::vector<int> MaskMachine::joinable_fresh_tables(
    const GrammarState& state) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < schema_->tables().size(); ++i) {
    const std::string& name = schema_->tables()[i].name;
    if (std::find(state.used_tables.begin(), state.used_tables.end(), name) !=
        state.used_tables.end()) {
      continue;
    }
    bool adjacent = std::any_of(
        state.used_tables.begin(), state.used_tables.end(),
        [&](const std::string& used) { return schema_->fk_adjacent(used, name); });
    if (adjacent) out.push_back(static_cast<int>(i));
  }
  return out;
}

MaskVector MaskMachine::raw_mask(const GrammarState& state) const {
  MaskVector m;
  m.sql_size = vocab_->sql_size();
  m.bits.assign(static_cast<std::size_t>(entry_count()), 0);
  auto allow = [&m](int entry) { m.bits[static_cast<std::size_t>(entry)] = 1; };
  const int budget_left = max_len_ - state.tokens_emitted;

  switch (state.phase) {
    case Phase::Start:
      allow(vocab_->select_id());
      break;
    case Phase::AfterSelect:
      for (const auto& attrs : attr_ids_) {
        for (int id : attrs) allow(id);
      }
      break;
    case Phase::AfterSelectAttr:
      allow(vocab_->from_id());
      break;
    case Phase::AfterFrom: {
      int ti = schema_->table_index(state.selected_attr->table);
      allow(table_ids_[static_cast<std::size_t>(ti)]);
      break;
    }
    case Phase::AfterTable: {
      // join needs: join, table, where, attr, =, value, EOS -> 7 tokens.
      if (budget_left >= 7 && !joinable_fresh_tables(state).empty()) {
        allow(vocab_->join_id());
      }
      if (fresh_pair_exists(state)) allow(vocab_->where_id());
      break;
    }
    case Phase::AfterJoin:
      for (int ti : joinable_fresh_tables(state)) {
        allow(table_ids_[static_cast<std::size_t>(ti)]);
      }
      break;
    case Phase::AfterWhere:
      for (const auto& table : state.used_tables) {
        int ti = schema_->table_index(table);
        const auto& tdef = schema_->tables()[static_cast<std::size_t>(ti)];
        for (std::size_t c = 0; c < tdef.columns.size(); ++c) {
          if (attr_has_fresh_value(state,
                                   AttrRef{table, tdef.columns[c].name})) {
            allow(attr_ids_[static_cast<std::size_t>(ti)][c]);
          }
        }
      }
      break;
    case Phase::AfterCondAttr:
      allow(vocab_->eq_id());
      break;
    case Phase::AfterEq:
      for (int j = 0; j < n_src(); ++j) {
        if (value_position_legal(state, j)) allow(m.sql_size + j);
      }
      break;
    case Phase::AfterValue: {
      allow(vocab_->eos_id());
      // a connective needs: op, attr, =, value, EOS -> 5 tokens.
      if (budget_left >= 5 && fresh_pair_exists(state)) {
        allow(vocab_->and_id());
        allow(vocab_->or_id());
      }
      break;
    }
    case Phase::Done:
      break;
  }
  return m;
}

MaskVector MaskMachine::legal_mask(const GrammarState& state) const {
  if (state.phase == Phase::Done) {
    throw IllegalToken("mask requested in Done state (absorbing)");
  }
  MaskVector m = raw_mask(state);
  if (!m.any()) {
    throw DeadEnd("no legal token in state " +
                  std::string(phase_name(state.phase)));
  }
  return m;
}

TokenRole MaskMachine::role_of(const GrammarState& state, int entry) const {
  switch (state.phase) {
    case Phase::Start:
    case Phase::AfterSelect:
    case Phase::AfterSelectAttr:
    case Phase::AfterFrom:
    case Phase::AfterTable:
    case Phase::AfterJoin:
      return TokenRole::BWord;
    case Phase::AfterWhere:
    case Phase::AfterCondAttr:
      return TokenRole::CondAttrWord;
    case Phase::AfterEq:
      return TokenRole::ValueWord;
    case Phase::AfterValue:
      return entry == vocab_->eos_id() ? TokenRole::Eos : TokenRole::Operator;
    case Phase::Done:
      break;
  }
  throw InternalError("role requested in Done state");
}

const std::string& MaskMachine::entry_token(int entry) const {
  if (entry < 0 || entry >= entry_count()) {
    throw InternalError("entry index out of range");
  }
  if (entry < vocab_->sql_size()) return vocab_->token_of(entry);
  return source_.tokens[static_cast<std::size_t>(entry - vocab_->sql_size())];
}

GrammarState MaskMachine::advance(const GrammarState& state, int entry) const {
  if (state.phase == Phase::Done) {
    throw IllegalToken("token after Done state");
  }
  MaskVector m = legal_mask(state);
  if (!m.legal(entry)) {
    std::string tok = (entry >= 0 && entry < entry_count())
                          ? entry_token(entry)
                          : "<entry " + std::to_string(entry) + ">";
    throw IllegalToken("token '" + tok + "' illegal in state " +
                       std::string(phase_name(state.phase)));
  }

  GrammarState next = state;
  next.tokens_emitted += 1;

  if (is_copy_entry(entry)) {
    // Only the AfterEq phase admits copy entries.
    int pos = entry - vocab_->sql_size();
    next.used_conditions.insert(condition_key(
        *state.pending_cond_attr, folded_src_[static_cast<std::size_t>(pos)]));
    next.pending_cond_attr.reset();
    next.phase = Phase::AfterValue;
    return next;
  }

  const int id = entry;
  switch (state.phase) {
    case Phase::Start:
      next.phase = Phase::AfterSelect;
      break;
    case Phase::AfterSelect:
      next.selected_attr = vocab_->attribute_of(id);
      next.phase = Phase::AfterSelectAttr;
      break;
    case Phase::AfterSelectAttr:
      next.phase = Phase::AfterFrom;
      break;
    case Phase::AfterFrom:
    case Phase::AfterJoin:
      next.used_tables.push_back(vocab_->token_of(id));
      next.phase = Phase::AfterTable;
      break;
    case Phase::AfterTable:
      next.phase = (id == vocab_->join_id()) ? Phase::AfterJoin
                                             : Phase::AfterWhere;
      break;
    case Phase::AfterWhere:
      next.pending_cond_attr = vocab_->attribute_of(id);
      next.phase = Phase::AfterCondAttr;
      break;
    case Phase::AfterCondAttr:
      next.phase = Phase::AfterEq;
      break;
    case Phase::AfterValue:
      if (id == vocab_->eos_id()) {
        next.phase = Phase::Done;
      } else {
        next.operator_count += 1;
        next.phase = Phase::AfterWhere;
      }
      break;
    case Phase::AfterEq:   // copy entries handled above; generate never legal
    case Phase::Done:
      throw InternalError("unreachable phase transition");
  }
  return next;
}

int MaskMachine::resolve_entry(const GrammarState& state,
                               const std::string& token) const {
  MaskVector m = legal_mask(state);
  int id = vocab_->lookup(token);
  if (id >= 0 && id < vocab_->sql_size() && m.legal(id)) return id;
  std::string folded = fold_case(token);
  for (int j = 0; j < n_src(); ++j) {
    int entry = vocab_->sql_size() + j;
    if (m.legal(entry) && folded_src_[static_cast<std::size_t>(j)] == folded) {
      return entry;
    }
  }
  throw IllegalToken("token '" + token + "' illegal in state " +
                     std::string(phase_name(state.phase)));
}

}  // namespace sqlgen
