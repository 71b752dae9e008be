#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sqlgen/database.hpp"
#include "sqlgen/lexicon.hpp"
#include "sqlgen/rng.hpp"

namespace sqlgen {

struct Example {
  std::string question;
  std::vector<std::string> answer;    // execution result of the gold query
  std::vector<std::string> gold_sql;  // token sequence ending in EOS; may be empty
  int n_conditions = 0;
  int n_tables = 0;

  bool has_gold() const { return !gold_sql.empty(); }
};

// One question template plus its SQL pattern. Question placeholders are
// written {table.column}; the SQL pattern references them positionally as
// {1}, {2}, ... in left-to-right question order.
struct Template {
  std::string question_pattern;
  std::string sql_pattern;
  std::vector<std::string> placeholders;  // qualified attributes, in order
  int n_conditions = 0;
  int n_tables = 0;
};

// Parses a template file: one template per line as
//   <question with {table.column} slots> ||| <sql pattern with {i} slots>
// Blank lines and lines starting with # are skipped. Throws TemplateError on
// malformed lines, unknown attributes, or SQL patterns that do not parse or
// do not use every placeholder exactly once.
std::vector<Template> load_templates(const std::filesystem::path& path,
                                     const Schema& schema);

struct GenStats {
  std::size_t accepted = 0;
  std::size_t rejected_empty_result = 0;
  std::size_t rejected_duplicate = 0;
  std::size_t rejected_value_set = 0;  // question values vs conditions mismatch
  std::vector<std::size_t> per_template;
  std::size_t multi_table = 0;
  std::size_t multi_condition = 0;

  std::string to_key_values() const;
};

// Rejection-samples n distinct examples with nonempty answers. Every answer
// is computed by executing the instantiated gold query. Questions whose
// tokenization does not surface exactly the condition values as chunks are
// rejected (the mismatch count lands in the stats). Throws ExhaustedError
// when the attempt budget runs out before n examples are accepted.
std::vector<Example> generate_dataset(const Database& db,
                                      const std::vector<Template>& templates,
                                      std::size_t n, Rng& rng,
                                      GenStats* stats = nullptr);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct DatasetSplit {
  std::vector<Example> train, val, test;
};

// Deterministic shuffled split. Sizes are the exact fractions rounded down,
// with leftovers assigned by largest fractional remainder (ties toward the
// earlier part).
DatasetSplit split_dataset(const std::vector<Example>& dataset,
                           const SplitFractions& fractions, Rng& rng);

// Line-delimited JSON records.
void save_dataset(const std::vector<Example>& dataset,
                  const std::filesystem::path& path);
std::vector<Example> load_dataset(const std::filesystem::path& path);

}  // namespace sqlgen
