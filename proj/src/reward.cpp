#include "sqlgen/reward.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "sqlgen/errors.hpp"
#include "sqlgen/executor.hpp"
#include "sqlgen/sql.hpp"
#include "sqlgen/strings.hpp"

namespace sqlgen {

double PartialReward::at(std::size_t i) const {
  auto it = values.find(i);
  if (it == values.end()) {
    throw MissingRole("no reward at token position " + std::to_string(i));
  }
  return it->second;
}

double RewardVector::total() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

PartialReward coverage_reward(const std::vector<std::string>& tokens,
                              const std::vector<TokenRole>& roles,
                              const std::vector<std::string>& value_set) {
  if (tokens.size() != roles.size()) {
    throw InternalError("token/role length mismatch");
  }
  if (value_set.empty()) {
    throw EmptyValueSet("question mentions no known attribute values");
  }
  std::set<std::string> u;
  for (const auto& v : value_set) u.insert(fold_case(v));
  const auto u_size = static_cast<long>(u.size());

  PartialReward r;
  std::set<std::string> seen;
  long op_index = 0;
  long n_op = 0;
  for (const auto& role : roles) n_op += (role == TokenRole::Operator);

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    switch (roles[i]) {
      case TokenRole::ValueWord: {
        std::string w = fold_case(tokens[i]);
        if (u.contains(w) && !seen.contains(w)) {
          r.values[i] = 1.0;
          seen.insert(w);
        } else {
          r.values[i] = -1.0;
        }
        break;
      }
      case TokenRole::Operator: {
        ++op_index;
        if (op_index < u_size) {
          r.values[i] = 1.0 / static_cast<double>(u_size - 1);
        } else if (op_index == u_size) {
          r.values[i] = -1.0;
        } else {
          r.values[i] = 0.0;
        }
        break;
      }
      case TokenRole::Eos: {
        if (n_op < u_size - 1) {
          r.values[i] = -1.0;
        } else if (n_op == u_size - 1) {
          r.values[i] = 1.0;
        } else {
          r.values[i] = 0.0;
        }
        break;
      }
      case TokenRole::BWord:
      case TokenRole::CondAttrWord:
        break;
    }
  }
  return r;
}

namespace {

// What the token sequence says so far, recovered from the grammar roles.
// Works on complete sequences and truncated prefixes alike.
struct Reconstruction {
  SqlQuery query;                 // conditions hold only the complete ones
  std::vector<std::size_t> b_positions;
  // attr/eq token positions per condition, in order; a trailing entry may
  // belong to a condition that never received its value.
  std::vector<std::vector<std::size_t>> cond_positions;
  std::vector<std::size_t> operator_positions;
  bool complete_conditions = true;  // false when a trailing condition lacks a value
};

Reconstruction reconstruct(const std::vector<std::string>& tokens,
                           const std::vector<TokenRole>& roles) {
  Reconstruction rec;
  std::vector<std::string> cond_attr_tokens;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    switch (roles[i]) {
      case TokenRole::BWord: {
        rec.b_positions.push_back(i);
        const std::string& tok = tokens[i];
        if (tok.find('.') != std::string::npos) {
          auto ref = AttrRef::parse(tok);
          if (ref) rec.query.select_attr = *ref;
        } else if (!fold_equal(tok, Vocabulary::kSelect) &&
                   !fold_equal(tok, Vocabulary::kFrom) &&
                   !fold_equal(tok, Vocabulary::kJoin) &&
                   !fold_equal(tok, Vocabulary::kWhere)) {
          rec.query.tables.push_back(tok);
        }
        break;
      }
      case TokenRole::CondAttrWord: {
        if (rec.cond_positions.size() == rec.query.conditions.size()) {
          rec.cond_positions.emplace_back();
        }
        rec.cond_positions.back().push_back(i);
        if (tokens[i].find('.') != std::string::npos) {
          cond_attr_tokens.push_back(tokens[i]);
        }
        break;
      }
      case TokenRole::ValueWord: {
        if (cond_attr_tokens.size() <= rec.query.conditions.size()) {
          throw InternalError("value token with no preceding condition attribute");
        }
        auto ref = AttrRef::parse(cond_attr_tokens[rec.query.conditions.size()]);
        rec.query.conditions.push_back({*ref, tokens[i]});
        break;
      }
      case TokenRole::Operator: {
        rec.operator_positions.push_back(i);
        rec.query.connectives.push_back(fold_equal(tokens[i], Vocabulary::kAnd)
                                            ? Connective::And
                                            : Connective::Or);
        break;
      }
      case TokenRole::Eos:
        break;
    }
  }
  rec.complete_conditions =
      rec.cond_positions.size() == rec.query.conditions.size();
  // A truncated tail may also have recorded a connective with no condition
  // after it; trim connectives to conditions-1 for executability.
  if (!rec.query.conditions.empty() &&
      rec.query.connectives.size() >= rec.query.conditions.size()) {
    rec.query.connectives.resize(rec.query.conditions.size() - 1);
  }
  return rec;
}

}  // namespace

PartialReward execution_reward(const std::vector<std::string>& tokens,
                               const std::vector<TokenRole>& roles,
                               const Database& db, const ResultSet& answer) {
  if (tokens.size() != roles.size()) {
    throw InternalError("token/role length mismatch");
  }
  Reconstruction rec = reconstruct(tokens, roles);
  PartialReward r;

  bool executed_equal = false;
  if (rec.complete_conditions && !rec.query.conditions.empty() &&
      std::find(roles.begin(), roles.end(), TokenRole::Eos) != roles.end()) {
    executed_equal = execute(db, rec.query) == answer;
  }

  if (executed_equal) {
    for (std::size_t i : rec.b_positions) r.values[i] = 1.0;
    for (const auto& cond : rec.cond_positions) {
      for (std::size_t i : cond) r.values[i] = 1.0;
    }
    for (std::size_t i : rec.operator_positions) r.values[i] = 1.0;
    return r;
  }

  for (std::size_t i : rec.b_positions) r.values[i] = -1.0;
  for (std::size_t i : rec.operator_positions) r.values[i] = 0.0;
  for (std::size_t c = 0; c < rec.cond_positions.size(); ++c) {
    double value;
    if (c < rec.query.conditions.size() && !rec.query.tables.empty()) {
      ResultSet res = execute_single_condition(db, rec.query, c);
      value = res.intersects(answer) ? 1.0 : -1.0;
    } else {
      value = -1.0;  // incomplete trailing condition
    }
    for (std::size_t i : rec.cond_positions[c]) r.values[i] = value;
  }
  return r;
}

RewardVector combine(const std::vector<TokenRole>& roles,
                     const PartialReward& coverage,
                     const PartialReward& execution) {
  RewardVector out;
  out.values.reserve(roles.size());
  for (std::size_t i = 0; i < roles.size(); ++i) {
    switch (roles[i]) {
      case TokenRole::ValueWord:
      case TokenRole::Eos:
        out.values.push_back(coverage.at(i));
        break;
      case TokenRole::BWord:
      case TokenRole::CondAttrWord:
        out.values.push_back(execution.at(i));
        break;
      case TokenRole::Operator:
        out.values.push_back(std::min(coverage.at(i), execution.at(i)));
        break;
    }
  }
  return out;
}

RewardVector episode_rewards(const Episode& episode, const Database& db,
                             const ResultSet& answer,
                             const std::vector<std::string>& value_set) {
  PartialReward rc = coverage_reward(episode.tokens, episode.roles, value_set);
  PartialReward re =
      execution_reward(episode.tokens, episode.roles, db, answer);
  return combine(episode.roles, rc, re);
}

std::string reward_table(const std::vector<std::string>& tokens,
                         const std::vector<TokenRole>& roles,
                         const RewardVector& rewards) {
  std::size_t width = 5;
  for (const auto& t : tokens) width = std::max(width, t.size());
  std::ostringstream os;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    os << tokens[i];
    os << std::string(width - tokens[i].size() + 2, ' ');
    std::string role = role_name(roles[i]);
    os << role << std::string(10 - std::min<std::size_t>(role.size(), 9), ' ');
    os << format_double(rewards.values[i]) << "\n";
  }
  return os.str();
}

}  // namespace sqlgen
