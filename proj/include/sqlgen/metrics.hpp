#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sqlgen/datagen.hpp"
#include "sqlgen/model.hpp"
#include "sqlgen/sql.hpp"

namespace sqlgen {

// True when the query joins more tables than needed: some strict subset of
// its tables still contains the select attribute's table and every condition
// attribute's table and is connected under the foreign-key graph.
bool is_redundant(const SqlQuery& query, const Schema& schema);

struct EvalBucket {
  std::size_t count = 0;
  std::size_t correct = 0;

  double accuracy() const {
    return count == 0 ? 0.0 : static_cast<double>(correct) / count;
  }
};

struct EvalReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t parsed = 0;     // episodes that ended with EOS
  std::size_t redundant = 0;  // among parsed
  EvalBucket single_condition, multi_condition;
  EvalBucket single_table, multi_table;

  double accuracy() const {
    return total == 0 ? 0.0 : static_cast<double>(correct) / total;
  }
  double redundancy() const {
    return parsed == 0 ? 0.0 : static_cast<double>(redundant) / parsed;
  }

  std::string to_text() const;
  std::string to_key_values() const;
};

struct EvalOptions {
  int max_len = 64;
  bool loose_copy_mask = false;
};

// Greedy-decodes every example and scores execution-result equality against
// the stored answer. Truncated or dead-ended decodes count as incorrect and
// as unparsed. Buckets come from the examples' recorded condition and table
// counts.
EvalReport evaluate(const ModelParams& params, const Vocabulary& vocab,
                    const std::vector<Example>& examples, const Database& db,
                    const ValueLexicon& lexicon, const EvalOptions& options = {});

}  // namespace sqlgen
