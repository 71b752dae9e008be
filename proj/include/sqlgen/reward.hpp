#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "sqlgen/database.hpp"
#include "sqlgen/grammar.hpp"
#include "sqlgen/model.hpp"

namespace sqlgen {

// A reward defined on a subset of token positions (the roles its algorithm
// targets).
struct PartialReward {
  std::map<std::size_t, double> values;

  bool has(std::size_t i) const { return values.count(i) != 0; }
  double at(std::size_t i) const;  // throws MissingRole
};

struct RewardVector {
  std::vector<double> values;  // aligned with the episode's tokens

  double total() const;
};

// Coverage: rewards value words, operators, and EOS against the question's
// value set U (distinct value chunks, case-folded membership). First copy of
// an element of U earns +1, any other copy -1; the l-th operator earns
// 1/(|U|-1) while l < |U|, -1 at l = |U|, 0 beyond; EOS earns -1/+1/0 as the
// operator count falls short of / meets / exceeds |U|-1. Throws EmptyValueSet
// when U is empty.
PartialReward coverage_reward(const std::vector<std::string>& tokens,
                              const std::vector<TokenRole>& roles,
                              const std::vector<std::string>& value_set);

// Execution: rewards b-words (select..where inclusive) and each condition's
// attribute-and-"=" words, plus operators. A query executing exactly to
// `answer` earns +1 everywhere; otherwise b-words earn -1, operators 0, and
// each complete condition earns +1/-1 by whether its single-condition
// execution intersects `answer`. On a truncated episode (no EOS) the same
// rules run over the reconstructed prefix; an incomplete trailing condition
// earns -1.
PartialReward execution_reward(const std::vector<std::string>& tokens,
                               const std::vector<TokenRole>& roles,
                               const Database& db, const ResultSet& answer);

// Three-case combination: value words and EOS take the coverage reward,
// b-words and condition words take the execution reward, operators take the
// minimum of the two. Throws MissingRole when a token's designated source
// has no value for it.
RewardVector combine(const std::vector<TokenRole>& roles,
                     const PartialReward& coverage,
                     const PartialReward& execution);

// The full per-episode pipeline used by the trainer.
RewardVector episode_rewards(const Episode& episode, const Database& db,
                             const ResultSet& answer,
                             const std::vector<std::string>& value_set);

// Aligned token / role / reward columns for diagnostics.
std::string reward_table(const std::vector<std::string>& tokens,
                         const std::vector<TokenRole>& roles,
                         const RewardVector& rewards);

}  // namespace sqlgen
