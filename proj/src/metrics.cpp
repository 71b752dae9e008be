#include "sqlgen/metrics.hpp"

#include <cstdio>
#include <set>
#include <sstream>
#include <utility>

#include "sqlgen/errors.hpp"
#include "sqlgen/executor.hpp"
#include "sqlgen/grammar.hpp"
#include "sqlgen/strings.hpp"

namespace sqlgen {
namespace {

bool subset_connected(const std::vector<std::string>& tables, unsigned subset,
                      const Schema& schema) {
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < tables.size(); ++i)
    if (subset & (1u << i)) members.push_back(i);
  if (members.empty()) return false;

  std::vector<bool> reached(members.size(), false);
  reached[0] = true;
  std::size_t n_reached = 1;
  bool grew = true;
  while (grew && n_reached < members.size()) {
    grew = false;
    for (std::size_t a = 0; a < members.size(); ++a) {
      if (!reached[a]) continue;
      for (std::size_t b = 0; b < members.size(); ++b) {
        if (reached[b]) continue;
        if (schema.fk_adjacent(tables[members[a]], tables[members[b]])) {
          reached[b] = true;
          ++n_reached;
          grew = true;
        }
      }
    }
  }
  return n_reached == members.size();
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

bool is_redundant(const SqlQuery& query, const Schema& schema) {
  const std::size_t n = query.tables.size();
  if (n <= 1) return false;
  if (n > 16)
    throw InternalError("redundancy check limited to 16 joined tables");

  std::set<std::string> needed_names;
  needed_names.insert(query.select_attr.table);
  for (const Condition& cond : query.conditions)
    needed_names.insert(cond.attr.table);

  unsigned needed = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (needed_names.contains(query.tables[i])) needed |= 1u << i;

  // Redundant iff some strict subset of the joined tables still covers the
  // needed ones and stays connected. Enumerates supersets of `needed` below
  // the full set via the (s + 1) | needed stepping trick.
  const unsigned full = (1u << n) - 1;
  for (unsigned subset = needed; subset < full; subset = (subset + 1) | needed)
    if (subset_connected(query.tables, subset, schema)) return true;
  return false;
}

EvalReport evaluate(const ModelParams& params, const Vocabulary& vocab,
                    const std::vector<Example>& examples, const Database& db,
                    const ValueLexicon& lexicon, const EvalOptions& options) {
  EvalReport report;
  report.total = examples.size();
  Rng rng(0);  // greedy decoding never consults the exploration draws

  for (const Example& ex : examples) {
    EvalBucket& by_cond =
        ex.n_conditions > 1 ? report.multi_condition : report.single_condition;
    EvalBucket& by_table =
        ex.n_tables > 1 ? report.multi_table : report.single_table;
    ++by_cond.count;
    ++by_table.count;

    TokenSeq source = tokenize_question(ex.question, lexicon);
    MaskMachine machine(vocab, db.schema(), std::move(source),
                        options.loose_copy_mask, options.max_len);
    EncoderOutput enc = encode(machine.source(), vocab, params);
    Episode episode = decode_sample(params, machine, std::move(enc), 0.0, rng);
    if (!episode.ended()) continue;  // truncated or dead end: incorrect

    SqlQuery query;
    try {
      query = parse_token_sequence(episode.tokens, db.schema());
    } catch (const DataError&) {
      continue;  // masked decodes parse by construction; stay defensive
    }
    ++report.parsed;
    if (is_redundant(query, db.schema())) ++report.redundant;

    bool correct = false;
    try {
      correct = execute(db, query) == ResultSet::of(ex.answer);
    } catch (const DataError&) {
      correct = false;
    }
    if (correct) {
      ++report.correct;
      ++by_cond.correct;
      ++by_table.correct;
    }
  }
  return report;
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os << "examples          " << total << '\n';
  os << "accuracy          " << fixed4(accuracy()) << " (" << correct << "/"
     << total << ")\n";
  os << "redundancy        " << fixed4(redundancy()) << " (" << redundant
     << "/" << parsed << " parsed)\n";
  auto bucket = [&](const char* label, const EvalBucket& b) {
    os << label;
    if (b.count == 0)
      os << "n/a (0 examples)\n";
    else
      os << fixed4(b.accuracy()) << " (" << b.correct << "/" << b.count
         << ")\n";
  };
  bucket("single-condition  ", single_condition);
  bucket("multi-condition   ", multi_condition);
  bucket("single-table      ", single_table);
  bucket("multi-table       ", multi_table);
  return os.str();
}

std::string EvalReport::to_key_values() const {
  std::ostringstream os;
  os << "total=" << total << '\n'
     << "correct=" << correct << '\n'
     << "parsed=" << parsed << '\n'
     << "redundant=" << redundant << '\n'
     << "accuracy=" << format_double(accuracy()) << '\n'
     << "redundancy=" << format_double(redundancy()) << '\n';
  auto bucket = [&](const char* key, const EvalBucket& b) {
    os << key << "_count=" << b.count << '\n'
       << key << "_correct=" << b.correct << '\n'
       << key << "_accuracy=" << format_double(b.accuracy()) << '\n';
  };
  bucket("single_condition", single_condition);
  bucket("multi_condition", multi_condition);
  bucket("single_table", single_table);
  bucket("multi_table", multi_table);
  return os.str();
}

}  // namespace sqlgen
