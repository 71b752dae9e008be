#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sqlgen/database.hpp"
#include "sqlgen/datagen.hpp"
#include "sqlgen/lexicon.hpp"
#include "sqlgen/metrics.hpp"
#include "sqlgen/model.hpp"
#include "sqlgen/trainer.hpp"

namespace sqlgen {

// Schema, rows, and the value lexicon built from them.
struct Environment {
  Database db;
  ValueLexicon lexicon;

  const Schema& schema() const { return db.schema(); }

  static Environment load(const std::filesystem::path& schema_path,
                          const std::filesystem::path& db_dir);
};

// Schema tokens plus the words and values of every dataset question, so
// training and evaluation share one token inventory.
Vocabulary dataset_vocabulary(const Environment& env,
                              const std::vector<Example>& dataset);

// The canonical 80/10/10 split; train and eval reproduce it independently
// from the same seed.
DatasetSplit seeded_split(const std::vector<Example>& dataset,
                          std::uint64_t seed);

// Resolved-option echo stored inside checkpoints.
std::string config_echo(const TrainConfig& config);

struct TrainPipelineResult {
  TrainReport report;
  EvalReport test_report;
  EvalReport untrained_test_report;  // the seed-initialized baseline
  std::filesystem::path checkpoint_path;
};

// Splits, builds the vocabulary, initializes parameters from the seed,
// trains per config, writes the best checkpoint, and scores the test split
// (plus the untrained baseline for comparison).
TrainPipelineResult run_training(const Environment& env,
                                 const std::vector<Example>& dataset,
                                 const TrainConfig& config,
                                 const std::filesystem::path& checkpoint_out);

struct Prediction {
  std::vector<std::string> tokens;  // decoded surfaces, EOS last when ended
  bool ended = false;
  std::string sql;                   // rendered query when it parses
  std::vector<std::string> result;   // execution result values
};

// Greedy decode of one question under a trained checkpoint, plus execution.
Prediction predict(const Environment& env, const ModelParams& params,
                   const Vocabulary& vocab, const std::string& question,
                   const EvalOptions& options = {});

// Parses and runs one query string (EOS appended when missing); returns the
// result values.
std::vector<std::string> run_sql(const Environment& env,
                                 const std::string& sql_text);

}  // namespace sqlgen
