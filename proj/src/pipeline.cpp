#include "sqlgen/pipeline.hpp"

#include <sstream>
#include <utility>

#include "sqlgen/errors.hpp"
#include "sqlgen/executor.hpp"
#include "sqlgen/grammar.hpp"
#include "sqlgen/log.hpp"
#include "sqlgen/sql.hpp"
#include "sqlgen/strings.hpp"

namespace sqlgen {

Environment Environment::load(const std::filesystem::path& schema_path,
                              const std::filesystem::path& db_dir) {
  Database db = Database::load(Schema::load(schema_path), db_dir);
  ValueLexicon lexicon = ValueLexicon::build(db);
  return Environment{std::move(db), std::move(lexicon)};
}

Vocabulary dataset_vocabulary(const Environment& env,
                              const std::vector<Example>& dataset) {
  std::vector<TokenSeq> questions;
  questions.reserve(dataset.size());
  for (const Example& ex : dataset)
    questions.push_back(tokenize_question(ex.question, env.lexicon));
  return Vocabulary::build(env.schema(), questions);
}

DatasetSplit seeded_split(const std::vector<Example>& dataset,
                          std::uint64_t seed) {
  Rng rng(seed);
  return split_dataset(dataset, SplitFractions{}, rng);
}

std::string config_echo(const TrainConfig& config) {
  std::ostringstream os;
  os << "mode=" << train_mode_name(config.mode) << " epochs=" << config.epochs
     << " epsilon=" << format_double(config.epsilon)
     << " alpha=" << format_double(config.adam.alpha)
     << " beta1=" << format_double(config.adam.beta1)
     << " beta2=" << format_double(config.adam.beta2)
     << " eps=" << format_double(config.adam.eps)
     << " patience=" << config.patience << " seed=" << config.seed
     << " max_len=" << config.max_len
     << " loose_copy_mask=" << (config.loose_copy_mask ? 1 : 0);
  return os.str();
}

TrainPipelineResult run_training(const Environment& env,
                                 const std::vector<Example>& dataset,
                                 const TrainConfig& config,
                                 const std::filesystem::path& checkpoint_out) {
  config.validate();
  if (dataset.empty()) throw DataError("dataset is empty");

  DatasetSplit split = seeded_split(dataset, config.seed);
  log_info("split: train=" + std::to_string(split.train.size()) +
           " val=" + std::to_string(split.val.size()) +
           " test=" + std::to_string(split.test.size()));

  Vocabulary vocab = dataset_vocabulary(env, dataset);
  ModelDims dims;
  dims.vocab_size = vocab.size();
  dims.sql_size = vocab.sql_size();

  Rng init_rng(config.seed);
  ModelParams theta0 = ModelParams::init(dims, init_rng);
  const EvalOptions eval_options{config.max_len, config.loose_copy_mask};

  EvalReport untrained =
      evaluate(theta0, vocab, split.test, env.db, env.lexicon, eval_options);
  log_info("untrained test accuracy=" + format_double(untrained.accuracy()));

  TrainResult trained = train(theta0, vocab, split.train, split.val, env.db,
                              env.lexicon, config);
  save_params(trained.params, vocab, config_echo(config), checkpoint_out);
  log_info("checkpoint written to " + checkpoint_out.string());

  EvalReport test = evaluate(trained.params, vocab, split.test, env.db,
                             env.lexicon, eval_options);
  log_info("test accuracy=" + format_double(test.accuracy()) +
           " redundancy=" + format_double(test.redundancy()));

  return TrainPipelineResult{std::move(trained.report), std::move(test),
                             std::move(untrained), checkpoint_out};
}

Prediction predict(const Environment& env, const ModelParams& params,
                   const Vocabulary& vocab, const std::string& question,
                   const EvalOptions& options) {
  TokenSeq source = tokenize_question(question, env.lexicon);
  MaskMachine machine(vocab, env.schema(), std::move(source),
                      options.loose_copy_mask, options.max_len);
  EncoderOutput enc = encode(machine.source(), vocab, params);
  Rng rng(0);  // greedy decoding never consults the exploration draws
  Episode episode = decode_sample(params, machine, std::move(enc), 0.0, rng);

  Prediction out;
  out.tokens = episode.tokens;
  out.ended = episode.ended();
  if (!out.ended) return out;
  try {
    SqlQuery query = parse_token_sequence(episode.tokens, env.schema());
    out.sql = query.text();
    out.result = execute(env.db, query).values();
  } catch (const DataError& err) {
    log_warn(std::string("decoded query does not execute: ") + err.what());
  }
  return out;
}

std::vector<std::string> run_sql(const Environment& env,
                                 const std::string& sql_text) {
  std::vector<std::string> tokens = split_whitespace(sql_text);
  if (tokens.empty()) throw DataError("empty query");
  if (!fold_equal(tokens.back(), Vocabulary::kEos))
    tokens.push_back(Vocabulary::kEos);
  SqlQuery query = parse_token_sequence(tokens, env.schema());
  return execute(env.db, query).values();
}

}  // namespace sqlgen
