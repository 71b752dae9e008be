#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sqlgen/errors.hpp"
#include "sqlgen/pipeline.hpp"

namespace py = pybind11;

namespace {

py::dict eval_report_dict(const sqlgen::EvalReport& r) {
  auto bucket = [](const sqlgen::EvalBucket& b) {
    py::dict d;
    d["count"] = b.count;
    d["correct"] = b.correct;
    d["accuracy"] = b.accuracy();
    return d;
  };
  py::dict d;
  d["total"] = r.total;
  d["correct"] = r.correct;
  d["parsed"] = r.parsed;
  d["redundant"] = r.redundant;
  d["accuracy"] = r.accuracy();
  d["redundancy"] = r.redundancy();
  d["single_condition"] = bucket(r.single_condition);
  d["multi_condition"] = bucket(r.multi_condition);
  d["single_table"] = bucket(r.single_table);
  d["multi_table"] = bucket(r.multi_table);
  return d;
}

py::dict train_report_dict(const sqlgen::TrainReport& r) {
  py::list epochs;
  for (const sqlgen::EpochStats& s : r.epochs) {
    py::dict e;
    e["phase"] = s.phase;
    e["epoch"] = s.epoch;
    e["updates"] = s.updates;
    e["dead_ends"] = s.dead_ends;
    e["mean_loss"] = s.mean_loss;
    e["val_accuracy"] = s.val_accuracy;
    e["val_redundancy"] = s.val_redundancy;
    epochs.append(std::move(e));
  }
  py::dict d;
  d["mode"] = r.mode;
  d["seed"] = r.seed;
  d["train_size"] = r.train_size;
  d["train_used"] = r.train_used;
  d["train_filtered"] = r.train_filtered;
  d["epochs"] = std::move(epochs);
  d["best_epoch"] = r.best_epoch;
  d["best_val_accuracy"] = r.best_val_accuracy;
  d["stopped_epoch"] = r.stopped_epoch;
  return d;
}

std::vector<sqlgen::Example> split_part(const std::vector<sqlgen::Example>& all,
                                        const std::string& split,
                                        std::uint64_t seed) {
  if (split == "all") return all;
  sqlgen::DatasetSplit parts = sqlgen::seeded_split(all, seed);
  if (split == "train") return std::move(parts.train);
  if (split == "val") return std::move(parts.val);
  if (split == "test") return std::move(parts.test);
  throw sqlgen::ConfigError("unknown split '" + split +
                            "' (expected train, val, test, or all)");
}

}  // namespace

PYBIND11_MODULE(_sqlgen, m) {
  m.doc() = "Weakly supervised text-to-SQL: data generation, training, "
            "evaluation, and query execution";

  py::register_exception<sqlgen::Error>(m, "SqlgenError");

  py::class_<sqlgen::Environment>(m, "Environment",
                                  "A schema with its rows and value lexicon")
      .def_static(
          "load",
          [](const std::string& schema, const std::string& db_dir) {
            return sqlgen::Environment::load(schema, db_dir);
          },
          py::arg("schema"), py::arg("db_dir"))
      .def(
          "exec_sql",
          [](const sqlgen::Environment& env, const std::string& sql) {
            return sqlgen::run_sql(env, sql);
          },
          py::arg("sql"), "Run one query and return the result values")
      .def(
          "tokenize",
          [](const sqlgen::Environment& env, const std::string& question) {
            sqlgen::TokenSeq seq =
                sqlgen::tokenize_question(question, env.lexicon);
            std::vector<bool> chunk(seq.is_value_chunk.begin(),
                                    seq.is_value_chunk.end());
            return std::make_pair(seq.tokens, chunk);
          },
          py::arg("question"),
          "Tokenize a question; returns (tokens, is_value_chunk)")
      .def_property_readonly("tables", [](const sqlgen::Environment& env) {
        std::vector<std::string> names;
        for (const auto& t : env.schema().tables()) names.push_back(t.name);
        return names;
      });

  m.def(
      "generate_dataset",
      [](const sqlgen::Environment& env, const std::string& templates,
         std::size_t n, std::uint64_t seed, const std::string& out) {
        std::vector<sqlgen::Template> tpls =
            sqlgen::load_templates(templates, env.schema());
        sqlgen::Rng rng(seed);
        sqlgen::GenStats stats;
        std::vector<sqlgen::Example> dataset =
            sqlgen::generate_dataset(env.db, tpls, n, rng, &stats);
        sqlgen::save_dataset(dataset, out);
        py::dict d;
        d["accepted"] = stats.accepted;
        d["rejected_empty_result"] = stats.rejected_empty_result;
        d["rejected_duplicate"] = stats.rejected_duplicate;
        d["rejected_value_set"] = stats.rejected_value_set;
        d["multi_table"] = stats.multi_table;
        d["multi_condition"] = stats.multi_condition;
        d["per_template"] = stats.per_template;
        return d;
      },
      py::arg("env"), py::arg("templates"), py::arg("n"), py::arg("seed"),
      py::arg("out"),
      "Generate a dataset from question templates and write it as JSON lines");

  m.def(
      "train",
      [](const sqlgen::Environment& env, const std::string& data,
         const std::string& out, const std::string& mode, int epochs,
         double epsilon, std::uint64_t seed, int patience, int max_len,
         bool loose_copy_mask) {
        sqlgen::TrainConfig config;
        config.mode = sqlgen::parse_train_mode(mode);
        config.epochs = epochs;
        config.epsilon = epsilon;
        config.seed = seed;
        config.patience = patience;
        config.max_len = max_len;
        config.loose_copy_mask = loose_copy_mask;
        std::vector<sqlgen::Example> dataset = sqlgen::load_dataset(data);
        sqlgen::TrainPipelineResult result =
            sqlgen::run_training(env, dataset, config, out);
        py::dict d;
        d["report"] = train_report_dict(result.report);
        d["test"] = eval_report_dict(result.test_report);
        d["untrained_test"] = eval_report_dict(result.untrained_test_report);
        d["checkpoint"] = result.checkpoint_path.string();
        return d;
      },
      py::arg("env"), py::arg("data"), py::arg("out"), py::arg("mode") = "rl",
      py::arg("epochs") = 100, py::arg("epsilon") = 0.3, py::arg("seed") = 1,
      py::arg("patience") = 100, py::arg("max_len") = 64,
      py::arg("loose_copy_mask") = false,
      "Train on a dataset file (split 80/10/10 by the seed) and write the "
      "best checkpoint");

  m.def(
      "evaluate_checkpoint",
      [](const sqlgen::Environment& env, const std::string& data,
         const std::string& checkpoint, const std::string& split,
         std::uint64_t seed, int max_len, bool loose_copy_mask) {
        std::vector<sqlgen::Example> dataset = sqlgen::load_dataset(data);
        std::vector<sqlgen::Example> subset = split_part(dataset, split, seed);
        sqlgen::Checkpoint ckpt = sqlgen::load_params(checkpoint);
        sqlgen::EvalOptions options{max_len, loose_copy_mask};
        return eval_report_dict(sqlgen::evaluate(
            ckpt.params, ckpt.vocab, subset, env.db, env.lexicon, options));
      },
      py::arg("env"), py::arg("data"), py::arg("checkpoint"),
      py::arg("split") = "test", py::arg("seed") = 1, py::arg("max_len") = 64,
      py::arg("loose_copy_mask") = false,
      "Greedy-decode a dataset split and score execution accuracy");

  m.def(
      "predict",
      [](const sqlgen::Environment& env, const std::string& checkpoint,
         const std::string& question, int max_len, bool loose_copy_mask) {
        sqlgen::Checkpoint ckpt = sqlgen::load_params(checkpoint);
        sqlgen::EvalOptions options{max_len, loose_copy_mask};
        sqlgen::Prediction p = sqlgen::predict(env, ckpt.params, ckpt.vocab,
                                               question, options);
        py::dict d;
        d["tokens"] = p.tokens;
        d["ended"] = p.ended;
        d["sql"] = p.sql;
        d["result"] = p.result;
        return d;
      },
      py::arg("env"), py::arg("checkpoint"), py::arg("question"),
      py::arg("max_len") = 64, py::arg("loose_copy_mask") = false,
      "Greedy-decode one question and execute the decoded query");
}
