#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sqlgen/errors.hpp"
#include "sqlgen/log.hpp"
#include "sqlgen/pipeline.hpp"
#include "sqlgen/strings.hpp"

namespace {

using namespace sqlgen;

struct GenOpts {
  std::string schema, db_dir, templates, out;
  std::size_t n = 100;
  std::uint64_t seed = 1;
  bool stats = false;
};

struct TrainOpts {
  std::string schema, db_dir, data, out, report;
  std::string mode = "rl";
  TrainConfig config;
};

struct EvalOpts {
  std::string schema, db_dir, data, checkpoint, report;
  std::string split = "test";
  std::uint64_t seed = 1;
  EvalOptions options;
};

struct PredictOpts {
  std::string schema, db_dir, checkpoint, question;
  EvalOptions options;
};

struct ExecOpts {
  std::string schema, db_dir, sql;
};

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << content;
  out.flush();
  if (!out) throw DataError("failed writing " + path);
}

int run_gen_data(const GenOpts& o) {
  log_info("resolved: schema=" + o.schema + " db-dir=" + o.db_dir +
           " templates=" + o.templates + " n=" + std::to_string(o.n) +
           " seed=" + std::to_string(o.seed) + " out=" + o.out);
  Environment env = Environment::load(o.schema, o.db_dir);
  std::vector<Template> templates = load_templates(o.templates, env.schema());
  Rng rng(o.seed);
  GenStats stats;
  std::vector<Example> dataset =
      generate_dataset(env.db, templates, o.n, rng, &stats);
  save_dataset(dataset, o.out);
  for (std::size_t i = 0; i < stats.per_template.size(); ++i)
    log_info("template " + std::to_string(i) + ": " +
             std::to_string(stats.per_template[i]) + " examples");
  log_info("wrote " + std::to_string(dataset.size()) + " examples to " + o.out);
  if (o.stats) std::cout << stats.to_key_values();
  return 0;
}

int run_train(const TrainOpts& o) {
  TrainConfig config = o.config;
  config.mode = parse_train_mode(o.mode);
  config.validate();
  log_info("resolved: " + config_echo(config) + " schema=" + o.schema +
           " db-dir=" + o.db_dir + " data=" + o.data + " out=" + o.out);

  Environment env = Environment::load(o.schema, o.db_dir);
  std::vector<Example> dataset = load_dataset(o.data);
  TrainPipelineResult result = run_training(env, dataset, config, o.out);

  std::string block =
      result.report.to_key_values() + "untrained_test_accuracy=" +
      format_double(result.untrained_test_report.accuracy()) + "\n" +
      "test_accuracy=" + format_double(result.test_report.accuracy()) + "\n" +
      "test_redundancy=" + format_double(result.test_report.redundancy()) +
      "\n";
  std::cout << block;
  if (!o.report.empty()) {
    write_text_file(o.report, block + result.test_report.to_key_values());
    log_info("report written to " + o.report);
  }
  return 0;
}

int run_eval(const EvalOpts& o) {
  log_info("resolved: schema=" + o.schema + " db-dir=" + o.db_dir + " data=" +
           o.data + " checkpoint=" + o.checkpoint + " split=" + o.split +
           " seed=" + std::to_string(o.seed) +
           " max-len=" + std::to_string(o.options.max_len) +
           " loose-copy-mask=" + (o.options.loose_copy_mask ? "1" : "0"));
  Environment env = Environment::load(o.schema, o.db_dir);
  std::vector<Example> dataset = load_dataset(o.data);
  Checkpoint ckpt = load_params(o.checkpoint);

  std::vector<Example> subset;
  if (o.split == "all") {
    subset = dataset;
  } else {
    DatasetSplit split = seeded_split(dataset, o.seed);
    if (o.split == "train")
      subset = std::move(split.train);
    else if (o.split == "val")
      subset = std::move(split.val);
    else if (o.split == "test")
      subset = std::move(split.test);
    else
      throw ConfigError("unknown split '" + o.split +
                        "' (expected train, val, test, or all)");
  }

  EvalReport report = evaluate(ckpt.params, ckpt.vocab, subset, env.db,
                               env.lexicon, o.options);
  std::cout << report.to_text();
  std::cout << report.to_key_values();
  if (!o.report.empty()) {
    write_text_file(o.report, report.to_key_values());
    log_info("report written to " + o.report);
  }
  return 0;
}

int run_predict(const PredictOpts& o) {
  log_info("resolved: schema=" + o.schema + " db-dir=" + o.db_dir +
           " checkpoint=" + o.checkpoint);
  Environment env = Environment::load(o.schema, o.db_dir);
  Checkpoint ckpt = load_params(o.checkpoint);
  Prediction p = predict(env, ckpt.params, ckpt.vocab, o.question, o.options);
  std::cout << "tokens: " << join(p.tokens, " ") << '\n';
  if (!p.ended) {
    std::cout << "decode did not reach EOS\n";
    return 0;
  }
  std::cout << "query: " << p.sql << '\n';
  if (p.result.empty()) {
    std::cout << "result: (empty)\n";
  } else {
    std::cout << "result:\n";
    for (const std::string& v : p.result) std::cout << "  " << v << '\n';
  }
  return 0;
}

int run_exec_sql(const ExecOpts& o) {
  log_info("resolved: schema=" + o.schema + " db-dir=" + o.db_dir);
  Environment env = Environment::load(o.schema, o.db_dir);
  for (const std::string& v : run_sql(env, o.sql)) std::cout << v << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sqlgen: weakly supervised text-to-SQL over tabular databases"};
  app.set_config("--config", "",
                 "Read options from a config file (sections per subcommand)");
  app.require_subcommand(1);

  GenOpts gen_opts;
  CLI::App* gen = app.add_subcommand(
      "gen-data", "Generate a question/answer dataset from templates");
  gen->add_option("--schema", gen_opts.schema, "Schema definition file")
      ->required();
  gen->add_option("--db-dir", gen_opts.db_dir,
                  "Directory with one <table>.tsv per table")
      ->required();
  gen->add_option("--templates", gen_opts.templates, "Question template file")
      ->required();
  gen->add_option("--n", gen_opts.n, "Number of examples to generate");
  gen->add_option("--seed", gen_opts.seed, "Sampling seed");
  gen->add_option("--out", gen_opts.out, "Output dataset file (JSON lines)")
      ->required();
  gen->add_flag("--stats", gen_opts.stats,
                "Print generation statistics to stdout");

  TrainOpts train_opts;
  CLI::App* train = app.add_subcommand("train", "Train a model");
  train->add_option("--schema", train_opts.schema, "Schema definition file")
      ->required();
  train->add_option("--db-dir", train_opts.db_dir,
                    "Directory with one <table>.tsv per table")
      ->required();
  train->add_option("--data", train_opts.data,
                    "Dataset file; split 80/10/10 by the seed")
      ->required();
  train->add_option("--mode", train_opts.mode,
                    "rl, supervised, or pretrain-then-rl");
  train->add_option("--epochs", train_opts.config.epochs,
                    "Maximum epochs per phase (0..100)");
  train->add_option("--epsilon", train_opts.config.epsilon,
                    "Exploration probability in [0, 1]");
  train->add_option("--seed", train_opts.config.seed,
                    "Seed for split, init, and sampling");
  train->add_option("--patience", train_opts.config.patience,
                    "Early-stop patience in epochs");
  train->add_option("--max-len", train_opts.config.max_len,
                    "Decode length budget (>= 9)");
  train->add_flag("--loose-copy-mask", train_opts.config.loose_copy_mask,
                  "Allow copying from any source position");
  train->add_option("--out", train_opts.out, "Checkpoint output path")
      ->required();
  train->add_option("--report", train_opts.report,
                    "Also write the training report to this file");

  EvalOpts eval_opts;
  CLI::App* eval = app.add_subcommand("eval", "Score a checkpoint");
  eval->add_option("--schema", eval_opts.schema, "Schema definition file")
      ->required();
  eval->add_option("--db-dir", eval_opts.db_dir,
                   "Directory with one <table>.tsv per table")
      ->required();
  eval->add_option("--data", eval_opts.data, "Dataset file")->required();
  eval->add_option("--checkpoint", eval_opts.checkpoint, "Checkpoint path")
      ->required();
  eval->add_option("--split", eval_opts.split, "train, val, test, or all");
  eval->add_option("--seed", eval_opts.seed,
                   "Split seed (match the training seed)");
  eval->add_option("--max-len", eval_opts.options.max_len,
                   "Decode length budget (>= 9)");
  eval->add_flag("--loose-copy-mask", eval_opts.options.loose_copy_mask,
                 "Allow copying from any source position");
  eval->add_option("--report", eval_opts.report,
                   "Also write the evaluation report to this file");

  PredictOpts predict_opts;
  CLI::App* pred = app.add_subcommand("predict", "Decode one question");
  pred->add_option("--schema", predict_opts.schema, "Schema definition file")
      ->required();
  pred->add_option("--db-dir", predict_opts.db_dir,
                   "Directory with one <table>.tsv per table")
      ->required();
  pred->add_option("--checkpoint", predict_opts.checkpoint, "Checkpoint path")
      ->required();
  pred->add_option("--question", predict_opts.question, "Question text")
      ->required();
  pred->add_option("--max-len", predict_opts.options.max_len,
                   "Decode length budget (>= 9)");
  pred->add_flag("--loose-copy-mask", predict_opts.options.loose_copy_mask,
                 "Allow copying from any source position");

  ExecOpts exec_opts;
  CLI::App* exec = app.add_subcommand("exec-sql", "Run one query directly");
  exec->add_option("--schema", exec_opts.schema, "Schema definition file")
      ->required();
  exec->add_option("--db-dir", exec_opts.db_dir,
                   "Directory with one <table>.tsv per table")
      ->required();
  exec->add_option("--sql", exec_opts.sql, "Query text (EOS optional)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return run_gen_data(gen_opts);
    if (train->parsed()) return run_train(train_opts);
    if (eval->parsed()) return run_eval(eval_opts);
    if (pred->parsed()) return run_predict(predict_opts);
    if (exec->parsed()) return run_exec_sql(exec_opts);
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const ConfigError& e) {
    log_error(e.what());
    return 2;
  } catch (const DataError& e) {
    log_error(e.what());
    return 3;
  } catch (const std::exception& e) {
    log_error(e.what());
    return 4;
  }
}
