#include "sqlgen/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "sqlgen/errors.hpp"
#include "sqlgen/executor.hpp"
#include "sqlgen/log.hpp"
#include "sqlgen/sql.hpp"
#include "sqlgen/strings.hpp"
#include "sqlgen/vocabulary.hpp"

namespace sqlgen {
namespace {

std::string line_tag(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no) + ": ";
}

// Extracts {table.column} groups in appearance order.
std::vector<std::string> question_placeholders(const std::string& pattern,
                                               const std::string& where) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = pattern.find('{', pos)) != std::string::npos) {
    std::size_t end = pattern.find('}', pos);
    if (end == std::string::npos)
      throw TemplateError(where + "unclosed '{' in question pattern");
    out.push_back(pattern.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
  return out;
}

// 1-based placeholder index when the token is "{i}", else 0.
std::size_t slot_index(const std::string& token) {
  if (token.size() < 3 || token.front() != '{' || token.back() != '}') return 0;
  std::size_t value = 0;
  for (std::size_t i = 1; i + 1 < token.size(); ++i) {
    char c = token[i];
    if (c < '0' || c > '9') return 0;
    value = value * 10 + static_cast<std::size_t>(c - '0');
  }
  return value;
}

std::string substitute_question(const std::string& pattern,
                                const std::vector<std::string>& values) {
  std::string out;
  out.reserve(pattern.size() + 16 * values.size());
  std::size_t pos = 0;
  std::size_t next = 0;
  while (pos < pattern.size()) {
    std::size_t open = pattern.find('{', pos);
    if (open == std::string::npos) {
      out.append(pattern, pos, std::string::npos);
      break;
    }
    out.append(pattern, pos, open - pos);
    std::size_t close = pattern.find('}', open);
    out += values.at(next++);
    pos = close + 1;
  }
  return out;
}

bool is_reserved_value(const std::string& folded) {
  return folded == fold_case(Vocabulary::kAnd) ||
         folded == fold_case(Vocabulary::kOr) ||
         folded == fold_case(Vocabulary::kEos);
}

}  // namespace

std::vector<Template> load_templates(const std::filesystem::path& path,
                                     const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open template file " + path.string());

  std::vector<Template> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const std::string where = line_tag(path, line_no);

    std::size_t sep = text.find("|||");
    if (sep == std::string::npos ||
        text.find("|||", sep + 3) != std::string::npos)
      throw TemplateError(where + "expected exactly one '|||' separator");

    Template tpl;
    tpl.question_pattern = trim(text.substr(0, sep));
    tpl.sql_pattern = trim(text.substr(sep + 3));
    if (tpl.question_pattern.empty() || tpl.sql_pattern.empty())
      throw TemplateError(where + "empty question or query pattern");

    tpl.placeholders = question_placeholders(tpl.question_pattern, where);
    for (const std::string& ph : tpl.placeholders) {
      auto attr = AttrRef::parse(ph);
      if (!attr || !schema.has_attribute(*attr))
        throw TemplateError(where + "unknown attribute '{" + ph +
                            "}' in question pattern");
    }

    // Validate the query pattern structurally with the slots left in place
    // (a "{i}" is an opaque value token as far as the grammar goes).
    std::vector<std::string> tokens = split_whitespace(tpl.sql_pattern);
    if (tokens.empty() || !fold_equal(tokens.back(), Vocabulary::kEos))
      tokens.push_back(Vocabulary::kEos);
    SqlQuery query;
    try {
      query = parse_token_sequence(tokens, schema);
    } catch (const DataError& err) {
      throw TemplateError(where + "query pattern does not parse: " +
                          err.what());
    }

    std::vector<bool> used(tpl.placeholders.size(), false);
    for (std::size_t k = 0; k < query.conditions.size(); ++k) {
      const Condition& cond = query.conditions[k];
      std::size_t slot = slot_index(cond.value);
      if (slot == 0 || slot > tpl.placeholders.size())
        throw TemplateError(where + "condition " + std::to_string(k + 1) +
                            " must take its value from a question slot "
                            "({1}..{" +
                            std::to_string(tpl.placeholders.size()) + "})");
      if (used[slot - 1])
        throw TemplateError(where + "question slot {" + std::to_string(slot) +
                            "} is used twice");
      used[slot - 1] = true;
      if (tpl.placeholders[slot - 1] != cond.attr.qualified())
        throw TemplateError(where + "question slot {" + std::to_string(slot) +
                            "} samples " + tpl.placeholders[slot - 1] +
                            " but condition " + std::to_string(k + 1) +
                            " filters " + cond.attr.qualified());
    }
    if (std::find(used.begin(), used.end(), false) != used.end())
      throw TemplateError(where + "every question slot must feed a condition");

    tpl.n_conditions = static_cast<int>(query.conditions.size());
    tpl.n_tables = static_cast<int>(query.tables.size());
    out.push_back(std::move(tpl));
  }
  if (out.empty())
    throw TemplateError("template file " + path.string() +
                        " contains no templates");
  return out;
}

std::string GenStats::to_key_values() const {
  std::ostringstream os;
  os << "accepted=" << accepted << '\n'
     << "rejected_empty_result=" << rejected_empty_result << '\n'
     << "rejected_duplicate=" << rejected_duplicate << '\n'
     << "rejected_value_set=" << rejected_value_set << '\n'
     << "multi_table=" << multi_table << '\n'
     << "multi_condition=" << multi_condition << '\n';
  for (std::size_t i = 0; i < per_template.size(); ++i)
    os << "template_" << i << "=" << per_template[i] << '\n';
  return os.str();
}

std::vector<Example> generate_dataset(const Database& db,
                                      const std::vector<Template>& templates,
                                      std::size_t n, Rng& rng,
                                      GenStats* stats_out) {
  if (templates.empty()) throw TemplateError("no templates to sample from");

  // Candidate values per template slot, with values that would collide with
  // query keywords removed up front.
  std::vector<std::vector<std::vector<std::string>>> candidates;
  candidates.reserve(templates.size());
  for (const Template& tpl : templates) {
    std::vector<std::vector<std::string>> per_slot;
    for (const std::string& ph : tpl.placeholders) {
      auto attr = AttrRef::parse(ph);
      std::vector<std::string> values = db.distinct_values(*attr);
      std::erase_if(values, [](const std::string& v) {
        return is_reserved_value(fold_case(v));
      });
      per_slot.push_back(std::move(values));
    }
    candidates.push_back(std::move(per_slot));
  }

  const ValueLexicon lexicon = ValueLexicon::build(db);
  GenStats stats;
  stats.per_template.assign(templates.size(), 0);

  std::vector<Example> out;
  out.reserve(n);
  std::set<std::string> seen_questions;

  const std::size_t budget = 200 * n + 1000;
  std::size_t attempts = 0;
  while (out.size() < n && attempts < budget) {
    ++attempts;
    const std::size_t tidx = rng.below(templates.size());
    const Template& tpl = templates[tidx];

    std::vector<std::string> values;
    values.reserve(tpl.placeholders.size());
    bool starved = false;
    for (const auto& slot : candidates[tidx]) {
      if (slot.empty()) {
        starved = true;
        break;
      }
      values.push_back(slot[rng.below(slot.size())]);
    }
    if (starved) {
      ++stats.rejected_empty_result;
      continue;
    }

    std::vector<std::string> tokens = split_whitespace(tpl.sql_pattern);
    if (tokens.empty() || !fold_equal(tokens.back(), Vocabulary::kEos))
      tokens.push_back(Vocabulary::kEos);
    for (std::string& tok : tokens) {
      std::size_t slot = slot_index(tok);
      if (slot != 0) tok = values.at(slot - 1);
    }
    SqlQuery query = parse_token_sequence(tokens, db.schema());
    ResultSet answer = execute(db, query);
    if (answer.empty()) {
      ++stats.rejected_empty_result;
      continue;
    }

    std::string question = substitute_question(tpl.question_pattern, values);
    std::string folded_question = fold_case(question);
    if (seen_questions.contains(folded_question)) {
      ++stats.rejected_duplicate;
      continue;
    }

    // The question must surface exactly the condition values: coverage
    // scoring equates the question's value chunks with the query's values.
    TokenSeq source = tokenize_question(question, lexicon);
    std::set<std::string> surfaced;
    for (const std::string& v : extract_value_set(source, lexicon))
      surfaced.insert(fold_case(v));
    std::set<std::string> wanted;
    for (const Condition& cond : query.conditions)
      wanted.insert(fold_case(cond.value));
    if (surfaced != wanted) {
      ++stats.rejected_value_set;
      continue;
    }

    seen_questions.insert(std::move(folded_question));
    out.push_back(Example{std::move(question), answer.values(),
                          std::move(tokens), tpl.n_conditions, tpl.n_tables});
    ++stats.per_template[tidx];
    if (tpl.n_tables > 1) ++stats.multi_table;
    if (tpl.n_conditions > 1) ++stats.multi_condition;
  }
  stats.accepted = out.size();
  if (stats_out) *stats_out = stats;

  if (out.size() < n)
    throw ExhaustedError(
        "generated only " + std::to_string(out.size()) + " of " +
        std::to_string(n) + " examples in " + std::to_string(attempts) +
        " attempts (empty results: " + std::to_string(stats.rejected_empty_result) +
        ", duplicates: " + std::to_string(stats.rejected_duplicate) +
        ", value-set mismatches: " + std::to_string(stats.rejected_value_set) +
        "); relax the request or add templates/rows");
  return out;
}

DatasetSplit split_dataset(const std::vector<Example>& dataset,
                           const SplitFractions& fractions, Rng& rng) {
  const double fr[3] = {fractions.train, fractions.val, fractions.test};
  double sum = fr[0] + fr[1] + fr[2];
  for (double f : fr)
    if (!(f >= 0.0)) throw ConfigError("split fractions must be nonnegative");
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("split fractions must sum to 1, got " +
                      format_double(sum));

  const std::size_t n = dataset.size();
  std::size_t counts[3];
  double remainder[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    double exact = fr[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(exact);
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  // Hand out the leftovers by largest fractional part, earlier part first on
  // ties, so one example with fractions .8/.1/.1 lands in train.
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (remainder[i] > remainder[best]) best = i;
    ++counts[best];
    remainder[best] = -1.0;
    ++assigned;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  DatasetSplit split;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < counts[0]; ++i) split.train.push_back(dataset[order[pos++]]);
  for (std::size_t i = 0; i < counts[1]; ++i) split.val.push_back(dataset[order[pos++]]);
  for (std::size_t i = 0; i < counts[2]; ++i) split.test.push_back(dataset[order[pos++]]);
  return split;
}

void save_dataset(const std::vector<Example>& dataset,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset file " + path.string());
  for (const Example& ex : dataset) {
    nlohmann::json record{{"question", ex.question},
                          {"answer", ex.answer},
                          {"gold_sql", ex.gold_sql},
                          {"n_conditions", ex.n_conditions},
                          {"n_tables", ex.n_tables}};
    out << record.dump() << '\n';
  }
  out.flush();
  if (!out) throw DataError("failed writing dataset file " + path.string());
}

std::vector<Example> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file " + path.string());

  std::vector<Example> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = line_tag(path, line_no);
    nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object())
      throw DataError(where + "not a JSON object");

    Example ex;
    if (!record.contains("question") || !record["question"].is_string())
      throw DataError(where + "missing string field 'question'");
    ex.question = record["question"].get<std::string>();

    if (!record.contains("answer") || !record["answer"].is_array())
      throw DataError(where + "missing array field 'answer'");
    for (const auto& v : record["answer"]) {
      if (!v.is_string()) throw DataError(where + "'answer' must hold strings");
      ex.answer.push_back(v.get<std::string>());
    }

    if (record.contains("gold_sql")) {
      if (!record["gold_sql"].is_array())
        throw DataError(where + "'gold_sql' must be an array");
      for (const auto& v : record["gold_sql"]) {
        if (!v.is_string())
          throw DataError(where + "'gold_sql' must hold strings");
        ex.gold_sql.push_back(v.get<std::string>());
      }
    }

    if (!record.contains("n_conditions") ||
        !record["n_conditions"].is_number_integer() ||
        !record.contains("n_tables") ||
        !record["n_tables"].is_number_integer())
      throw DataError(where + "missing integer fields 'n_conditions'/'n_tables'");
    ex.n_conditions = record["n_conditions"].get<int>();
    ex.n_tables = record["n_tables"].get<int>();
    if (ex.n_conditions < 1 || ex.n_tables < 1)
      throw DataError(where + "'n_conditions' and 'n_tables' must be positive");
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace sqlgen
