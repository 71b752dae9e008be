#include "sqlgen/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "sqlgen/errors.hpp"
#include "sqlgen/grammar.hpp"
#include "sqlgen/log.hpp"
#include "sqlgen/reward.hpp"
#include "sqlgen/strings.hpp"

namespace sqlgen {

TrainMode parse_train_mode(const std::string& name) {
  if (name == "rl") return TrainMode::Rl;
  if (name == "supervised") return TrainMode::Supervised;
  if (name == "pretrain-then-rl") return TrainMode::PretrainThenRl;
  throw ConfigError("unknown training mode '" + name +
                    "' (expected rl, supervised, or pretrain-then-rl)");
}

const char* train_mode_name(TrainMode mode) {
  switch (mode) {
    case TrainMode::Rl:
      return "rl";
    case TrainMode::Supervised:
      return "supervised";
    case TrainMode::PretrainThenRl:
      return "pretrain-then-rl";
  }
  throw InternalError("unhandled training mode");
}

void TrainConfig::validate() const {
  if (epochs < 0 || epochs > 100)
    throw ConfigError("epochs must be in [0, 100], got " +
                      std::to_string(epochs));
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw ConfigError("epsilon must be in [0, 1], got " +
                      format_double(epsilon));
  if (!(adam.alpha > 0.0)) throw ConfigError("adam alpha must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0))
    throw ConfigError("adam beta1 must be in [0, 1)");
  if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw ConfigError("adam beta2 must be in [0, 1)");
  if (!(adam.eps > 0.0)) throw ConfigError("adam eps must be positive");
  if (patience < 1) throw ConfigError("patience must be at least 1");
  if (max_len < 9)
    throw ConfigError("max_len must be at least 9 (the shortest full query)");
}

AdamState AdamState::init(const ModelParams& like) {
  AdamState state;
  ModelParams scratch = like;  // for_each is non-const; shapes are all we need
  scratch.for_each([&](const std::string&, Eigen::Ref<Eigen::MatrixXd> t) {
    state.m.emplace_back(Eigen::MatrixXd::Zero(t.rows(), t.cols()));
    state.v.emplace_back(Eigen::MatrixXd::Zero(t.rows(), t.cols()));
  });
  return state;
}

void adam_update(ModelParams& params, const ModelParams& grads,
                 AdamState& state, const AdamConfig& config) {
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double step = config.alpha * std::sqrt(1.0 - std::pow(config.beta2, t)) /
                      (1.0 - std::pow(config.beta1, t));

  std::vector<Eigen::Ref<Eigen::MatrixXd>> g;
  auto& grads_mut = const_cast<ModelParams&>(grads);
  grads_mut.for_each([&](const std::string&, Eigen::Ref<Eigen::MatrixXd> t_) {
    g.push_back(t_);
  });
  if (g.size() != state.m.size())
    throw InternalError("optimizer state does not match the parameter set");

  std::size_t k = 0;
  params.for_each([&](const std::string& name,
                      Eigen::Ref<Eigen::MatrixXd> theta) {
    Eigen::MatrixXd& m = state.m[k];
    Eigen::MatrixXd& v = state.v[k];
    if (m.rows() != theta.rows() || m.cols() != theta.cols() ||
        g[k].rows() != theta.rows() || g[k].cols() != theta.cols())
      throw InternalError("optimizer shape mismatch on " + name);
    m = config.beta1 * m + (1.0 - config.beta1) * g[k];
    v = config.beta2 * v + (1.0 - config.beta2) * g[k].cwiseProduct(g[k]);
    theta.array() -= step * m.array() / (v.array().sqrt() + config.eps);
    ++k;
  });
  if (k != state.m.size())
    throw InternalError("optimizer visited an unexpected tensor count");
}

namespace {

// Everything about one training example that does not depend on the
// parameters, computed once and reused across epochs.
struct Prepared {
  std::size_t index;  // position in the caller's dataset
  const Example* example;
  std::vector<std::string> value_set;
  ResultSet answer;
  MaskMachine machine;
};

std::vector<Prepared> prepare_examples(const std::vector<Example>& examples,
                                       const Vocabulary& vocab,
                                       const Database& db,
                                       const ValueLexicon& lexicon,
                                       const TrainConfig& config) {
  std::vector<Prepared> out;
  out.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Example& ex = examples[i];
    TokenSeq source = tokenize_question(ex.question, lexicon);
    std::vector<std::string> values = extract_value_set(source, lexicon);
    out.push_back(Prepared{i, &ex, std::move(values), ResultSet::of(ex.answer),
                           MaskMachine(vocab, db.schema(), std::move(source),
                                       config.loose_copy_mask,
                                       config.max_len)});
  }
  return out;
}

enum class PhaseKind { Rl, Supervised };

struct PhaseResult {
  ModelParams best;
  int best_epoch = 0;
  double best_val_accuracy = 0.0;
  int stopped_epoch = 0;
  std::vector<EpochStats> history;
};

std::string epoch_line(const EpochStats& s) {
  std::ostringstream os;
  os << "phase=" << s.phase << " epoch=" << s.epoch << " updates=" << s.updates
     << " dead_ends=" << s.dead_ends << " mean_loss=" << format_double(s.mean_loss)
     << " val_accuracy=" << format_double(s.val_accuracy)
     << " val_redundancy=" << format_double(s.val_redundancy);
  return os.str();
}

PhaseResult run_phase(PhaseKind kind, const char* phase,
                      const ModelParams& start, const Vocabulary& vocab,
                      std::vector<Prepared>& prepared,
                      const std::vector<Example>& val, const Database& db,
                      const ValueLexicon& lexicon, const TrainConfig& config,
                      Rng& rng) {
  ModelParams params = start;
  AdamState adam = AdamState::init(params);
  const EvalOptions eval_options{config.max_len, config.loose_copy_mask};

  PhaseResult result;
  result.best = params;

  // Epoch 0 is the starting point: it seeds the best-so-far accuracy so a
  // phase that never improves hands back its input parameters.
  {
    EvalReport base = evaluate(params, vocab, val, db, lexicon, eval_options);
    EpochStats stats{phase, 0, 0, 0, 0.0, base.accuracy(), base.redundancy()};
    result.best_val_accuracy = base.accuracy();
    log_info(epoch_line(stats));
    result.history.push_back(std::move(stats));
  }

  std::vector<std::size_t> order(prepared.size());
  std::iota(order.begin(), order.end(), 0);

  int since_best = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t updates = 0;
    std::size_t dead_ends = 0;
    for (std::size_t idx : order) {
      Prepared& p = prepared[idx];
      EncoderOutput enc = encode(p.machine.source(), vocab, params);
      Episode episode;
      std::vector<double> rewards;
      if (kind == PhaseKind::Rl) {
        episode = decode_sample(params, p.machine, std::move(enc),
                                config.epsilon, rng);
        if (episode.dead_end) {
          ++dead_ends;
          continue;
        }
        rewards = episode_rewards(episode, db, p.answer, p.value_set).values;
      } else {
        try {
          episode = force_decode(params, p.machine, std::move(enc),
                                 p.example->gold_sql);
        } catch (const IllegalToken& err) {
          throw IllegalToken("example " + std::to_string(p.index) + ": " +
                             err.what());
        }
        rewards.assign(episode.tokens.size(), 1.0);
      }
      LossGrads lg = loss_and_gradients(episode, rewards, params);
      adam_update(params, lg.grads, adam, config.adam);
      loss_sum += lg.loss;
      ++updates;
    }

    EvalReport ev = evaluate(params, vocab, val, db, lexicon, eval_options);
    EpochStats stats{phase,
                     epoch,
                     updates,
                     dead_ends,
                     updates == 0 ? 0.0 : loss_sum / static_cast<double>(updates),
                     ev.accuracy(),
                     ev.redundancy()};
    log_info(epoch_line(stats));
    result.history.push_back(std::move(stats));
    result.stopped_epoch = epoch;

    if (ev.accuracy() > result.best_val_accuracy) {
      result.best_val_accuracy = ev.accuracy();
      result.best_epoch = epoch;
      result.best = params;
      since_best = 0;
      if (result.best_val_accuracy >= 1.0 && epoch > 0) {
        log_info("early stop: validation accuracy reached 1");
        break;
      }
    } else if (++since_best >= config.patience) {
      log_info(std::string("early stop: no validation improvement in ") +
               std::to_string(config.patience) + " epochs");
      break;
    }
  }
  return result;
}

TrainResult assemble(const char* mode, const TrainConfig& config,
                     std::size_t train_size, std::size_t used,
                     std::size_t filtered, PhaseResult&& phase) {
  TrainResult out{std::move(phase.best), TrainReport{}};
  out.report.mode = mode;
  out.report.seed = config.seed;
  out.report.train_size = train_size;
  out.report.train_used = used;
  out.report.train_filtered = filtered;
  out.report.epochs = std::move(phase.history);
  out.report.best_epoch = phase.best_epoch;
  out.report.best_val_accuracy = phase.best_val_accuracy;
  out.report.stopped_epoch = phase.stopped_epoch;
  return out;
}

}  // namespace

TrainResult train_rl(const ModelParams& start, const Vocabulary& vocab,
                     const std::vector<Example>& train,
                     const std::vector<Example>& val, const Database& db,
                     const ValueLexicon& lexicon, const TrainConfig& config) {
  config.validate();
  std::vector<Prepared> prepared =
      prepare_examples(train, vocab, db, lexicon, config);
  const std::size_t before = prepared.size();
  std::erase_if(prepared,
                [](const Prepared& p) { return p.value_set.empty(); });
  const std::size_t filtered = before - prepared.size();
  if (filtered > 0)
    log_info("filtered " + std::to_string(filtered) + " of " +
             std::to_string(before) +
             " training questions that surface no database values");
  if (filtered * 2 > before)
    throw DataError("more than half of the training questions (" +
                    std::to_string(filtered) + " of " + std::to_string(before) +
                    ") surface no database values; check the value lexicon");

  Rng rng(config.seed);
  PhaseResult phase = run_phase(PhaseKind::Rl, "rl", start, vocab, prepared,
                                val, db, lexicon, config, rng);
  return assemble("rl", config, before, prepared.size(), filtered,
                  std::move(phase));
}

TrainResult pretrain_supervised(const ModelParams& start,
                                const Vocabulary& vocab,
                                const std::vector<Example>& train,
                                const std::vector<Example>& val,
                                const Database& db, const ValueLexicon& lexicon,
                                const TrainConfig& config) {
  config.validate();
  for (std::size_t i = 0; i < train.size(); ++i)
    if (!train[i].has_gold())
      throw DataError("supervised training needs gold queries; example " +
                      std::to_string(i) + " has none");

  std::vector<Prepared> prepared =
      prepare_examples(train, vocab, db, lexicon, config);
  Rng rng(config.seed);
  PhaseResult phase = run_phase(PhaseKind::Supervised, "supervised", start,
                                vocab, prepared, val, db, lexicon, config, rng);
  return assemble("supervised", config, train.size(), train.size(), 0,
                  std::move(phase));
}

TrainResult train(const ModelParams& start, const Vocabulary& vocab,
                  const std::vector<Example>& train_set,
                  const std::vector<Example>& val, const Database& db,
                  const ValueLexicon& lexicon, const TrainConfig& config) {
  config.validate();
  switch (config.mode) {
    case TrainMode::Rl:
      return train_rl(start, vocab, train_set, val, db, lexicon, config);
    case TrainMode::Supervised:
      return pretrain_supervised(start, vocab, train_set, val, db, lexicon,
                                 config);
    case TrainMode::PretrainThenRl: {
      log_info("pretrain-then-rl: supervised phase");
      TrainResult pre =
          pretrain_supervised(start, vocab, train_set, val, db, lexicon, config);
      log_info("pretrain-then-rl: reinforcement phase");
      TrainResult fin =
          train_rl(pre.params, vocab, train_set, val, db, lexicon, config);
      fin.report.mode = "pretrain-then-rl";
      fin.report.epochs.insert(fin.report.epochs.begin(),
                               pre.report.epochs.begin(),
                               pre.report.epochs.end());
      return fin;
    }
  }
  throw InternalError("unhandled training mode");
}

std::string TrainReport::to_key_values() const {
  std::ostringstream os;
  os << "mode=" << mode << '\n';
  os << "seed=" << seed << '\n';
  os << "train_size=" << train_size << '\n';
  os << "train_used=" << train_used << '\n';
  os << "train_filtered=" << train_filtered << '\n';
  for (const EpochStats& s : epochs) os << epoch_line(s) << '\n';
  os << "best_epoch=" << best_epoch << '\n';
  os << "best_val_accuracy=" << format_double(best_val_accuracy) << '\n';
  os << "stopped_epoch=" << stopped_epoch << '\n';
  return os.str();
}

}  // namespace sqlgen
