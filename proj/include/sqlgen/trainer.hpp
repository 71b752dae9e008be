#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sqlgen/datagen.hpp"
#include "sqlgen/metrics.hpp"
#include "sqlgen/model.hpp"

namespace sqlgen {

struct AdamConfig {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

enum class TrainMode { Rl, Supervised, PretrainThenRl };

TrainMode parse_train_mode(const std::string& name);  // throws ConfigError
const char* train_mode_name(TrainMode mode);

struct TrainConfig {
  TrainMode mode = TrainMode::Rl;
  int epochs = 100;  // hard cap 100
  double epsilon = 0.3;
  AdamConfig adam;
  int patience = 100;
  std::uint64_t seed = 1;
  int max_len = 64;
  bool loose_copy_mask = false;

  void validate() const;  // throws ConfigError
};

// First/second-moment buffers, one pair per parameter tensor in visit order.
struct AdamState {
  std::vector<Eigen::MatrixXd> m;
  std::vector<Eigen::MatrixXd> v;
  long t = 0;

  static AdamState init(const ModelParams& like);
};

// One Adam step folding the bias corrections into the step size:
//   theta -= alpha * sqrt(1 - beta2^t) / (1 - beta1^t) * m / (sqrt(v) + eps)
void adam_update(ModelParams& params, const ModelParams& grads,
                 AdamState& state, const AdamConfig& config);

struct EpochStats {
  std::string phase;  // "rl" or "supervised"
  int epoch = 0;      // 0 is the pre-training baseline evaluation
  std::size_t updates = 0;
  std::size_t dead_ends = 0;
  double mean_loss = 0.0;
  double val_accuracy = 0.0;
  double val_redundancy = 0.0;
};

struct TrainReport {
  std::string mode;
  std::uint64_t seed = 0;
  std::size_t train_size = 0;
  std::size_t train_used = 0;
  std::size_t train_filtered = 0;  // empty value set, reinforcement phase only
  std::vector<EpochStats> epochs;
  int best_epoch = 0;  // within the final phase
  double best_val_accuracy = 0.0;
  int stopped_epoch = 0;

  std::string to_key_values() const;
};

struct TrainResult {
  ModelParams params;  // best validation accuracy seen
  TrainReport report;
};

// Policy-gradient training: per example, sample one episode with
// epsilon-exploration, score it point-wise, and take one Adam step on
// -sum(reward * logprob). Examples whose questions surface no database
// values are filtered out up front; more than half filtered aborts with
// DataError. Validation accuracy gates early stopping and picks the
// returned parameters; epoch 0 records the starting point.
TrainResult train_rl(const ModelParams& start, const Vocabulary& vocab,
                     const std::vector<Example>& train,
                     const std::vector<Example>& val, const Database& db,
                     const ValueLexicon& lexicon, const TrainConfig& config);

// Teacher forcing on gold token sequences: the loss is the negative
// log-likelihood of the gold query under the masked decoder. Examples
// without gold annotations are rejected with DataError; gold sequences the
// grammar mask cannot follow raise IllegalToken naming the example index.
TrainResult pretrain_supervised(const ModelParams& start,
                                const Vocabulary& vocab,
                                const std::vector<Example>& train,
                                const std::vector<Example>& val,
                                const Database& db, const ValueLexicon& lexicon,
                                const TrainConfig& config);

// Dispatches on config.mode; pretrain-then-rl chains the two phases and
// concatenates their epoch histories.
TrainResult train(const ModelParams& start, const Vocabulary& vocab,
                  const std::vector<Example>& train,
                  const std::vector<Example>& val, const Database& db,
                  const ValueLexicon& lexicon, const TrainConfig& config);

}  // namespace sqlgen
