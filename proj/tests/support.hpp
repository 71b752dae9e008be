#pragma once
// Shared fixtures and independent oracles for the test binaries. Everything
// here is deliberately naive: oracles recompute results from first principles
// so the library implementations are checked against a second opinion, not
// against themselves.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sqlgen/database.hpp"
#include "sqlgen/executor.hpp"
#include "sqlgen/grammar.hpp"
#include "sqlgen/lexicon.hpp"
#include "sqlgen/model.hpp"
#include "sqlgen/rng.hpp"
#include "sqlgen/schema.hpp"
#include "sqlgen/sql.hpp"
#include "sqlgen/strings.hpp"
#include "sqlgen/vocabulary.hpp"

namespace testsupport {

inline std::filesystem::path data_dir() {
  const char* env = std::getenv("SQLGEN_DATA");
  return env ? std::filesystem::path(env) : std::filesystem::path("data");
}

// --- a tiny hand-checkable film database -----------------------------------

inline const char* mini_schema_text() {
  return R"(table movie
  column movie_id number
  column title string
  column area string
  column year number
  primary_key movie_id

table movie_actor
  column ma_id number
  column movie_id number
  column actor_id number
  primary_key ma_id
  foreign_key movie_id -> movie.movie_id
  foreign_key actor_id -> actor.actor_id

table actor
  column actor_id number
  column name string
  primary_key actor_id
)";
}

inline sqlgen::Database mini_db() {
  using sqlgen::Row;
  sqlgen::Schema schema = sqlgen::Schema::parse_text(mini_schema_text(), "<mini>");
  std::map<std::string, std::vector<Row>> rows;
  rows["movie"] = {
      {"1", "silver river", "france", "1990"},
      {"2", "broken garden", "japan", "1991"},
      {"3", "silver garden", "france", "1992"},
      {"4", "silent voyage", "japan", "1990"},
  };
  rows["movie_actor"] = {
      {"1", "1", "1"}, {"2", "1", "2"}, {"3", "2", "2"},
      {"4", "3", "3"}, {"5", "4", "1"},
  };
  rows["actor"] = {
      {"1", "alan smith"}, {"2", "bella jones"}, {"3", "carl wu"},
  };
  return sqlgen::Database::from_rows(std::move(schema), std::move(rows));
}

inline sqlgen::Vocabulary mini_vocab(const sqlgen::Database& db,
                                     const sqlgen::ValueLexicon& lexicon,
                                     const std::vector<std::string>& questions) {
  std::vector<sqlgen::TokenSeq> tokenized;
  for (const auto& q : questions) {
    tokenized.push_back(sqlgen::tokenize_question(q, lexicon));
  }
  return sqlgen::Vocabulary::build(db.schema(), tokenized);
}

// --- brute-force SQL oracle -------------------------------------------------
// Cross product of the listed tables, equality filters from the documented
// join-predicate rule, where evaluation with `and` over `or`, projection to a
// folded value set. Works row-by-row with no indexing or short cuts.

struct OracleEdge {
  int left_table;  // index into query.tables
  sqlgen::AttrRef left, right;
};

inline std::vector<OracleEdge> oracle_join_edges(
    const std::vector<std::string>& tables, const sqlgen::Schema& schema) {
  std::vector<OracleEdge> edges;
  for (std::size_t k = 1; k < tables.size(); ++k) {
    bool found = false;
    for (std::size_t e = 0; e < k && !found; ++e) {
      // Probe the earlier table's declarations first, then the new table's.
      for (const auto& fk : schema.table(tables[e]).foreign_keys) {
        if (fk.foreign_table == tables[k]) {
          edges.push_back({static_cast<int>(e),
                           {tables[e], fk.local_column},
                           {tables[k], fk.foreign_column}});
          found = true;
          break;
        }
      }
      if (found) break;
      for (const auto& fk : schema.table(tables[k]).foreign_keys) {
        if (fk.foreign_table == tables[e]) {
          edges.push_back({static_cast<int>(e),
                           {tables[k], fk.local_column},
                           {tables[e], fk.foreign_column}});
          found = true;
          break;
        }
      }
    }
    if (!found) throw std::runtime_error("oracle: unjoinable " + tables[k]);
  }
  return edges;
}

inline std::set<std::string> oracle_execute(const sqlgen::Database& db,
                                            const sqlgen::SqlQuery& query) {
  using sqlgen::fold_case;
  const sqlgen::Schema& schema = db.schema();
  std::vector<OracleEdge> edges = oracle_join_edges(query.tables, schema);

  // Table index -> position in query.tables for cell lookup.
  auto cell = [&](const std::vector<const sqlgen::Row*>& combo,
                  const sqlgen::AttrRef& attr) -> const std::string& {
    auto it = std::find(query.tables.begin(), query.tables.end(), attr.table);
    std::size_t pos = static_cast<std::size_t>(it - query.tables.begin());
    int col = schema.table(attr.table).column_index(attr.column);
    return (*combo[pos])[static_cast<std::size_t>(col)];
  };

  std::set<std::string> out;
  std::vector<const sqlgen::Row*> combo(query.tables.size(), nullptr);
  // Odometer over the cross product.
  std::vector<std::size_t> idx(query.tables.size(), 0);
  std::vector<std::size_t> sizes;
  for (const auto& t : query.tables) sizes.push_back(db.rows(t).size());
  for (std::size_t s : sizes) {
    if (s == 0) return out;
  }
  while (true) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
      combo[i] = &db.rows(query.tables[i])[idx[i]];
    }
    bool joined = true;
    for (const auto& e : edges) {
      if (!sqlgen::fold_equal(cell(combo, e.left), cell(combo, e.right))) {
        joined = false;
        break;
      }
    }
    if (joined) {
      // `and` binds tighter than `or`: split into or-groups of and-runs.
      bool any_group = false;
      bool group = true;
      for (std::size_t c = 0; c < query.conditions.size(); ++c) {
        if (c > 0 && query.connectives[c - 1] == sqlgen::Connective::Or) {
          any_group = any_group || group;
          group = true;
        }
        const auto& cond = query.conditions[c];
        group = group && sqlgen::fold_equal(cell(combo, cond.attr), cond.value);
      }
      any_group = any_group || group;
      if (query.conditions.empty()) any_group = true;
      if (any_group) out.insert(fold_case(cell(combo, query.select_attr)));
    }
    std::size_t d = 0;
    while (d < idx.size() && ++idx[d] == sizes[d]) idx[d++] = 0;
    if (d == idx.size()) break;
  }
  return out;
}

inline std::set<std::string> folded_set(const sqlgen::ResultSet& rs) {
  std::set<std::string> out;
  for (const auto& v : rs.values()) out.insert(sqlgen::fold_case(v));
  return out;
}

// --- random micro-databases and queries -------------------------------------

struct MicroDb {
  sqlgen::Database db;
  std::vector<std::string> string_pool;
};

// 2-4 tables chained by foreign keys, a few typed columns, 3-8 rows each.
// String cells are drawn from a small pool with deliberate case variants so
// folded comparisons and set projection actually matter.
inline MicroDb random_micro_db(sqlgen::Rng& rng) {
  static const std::vector<std::string> pool = {
      "red", "RED", "blue", "Blue", "green", "amber", "teal",
      "oak", "elm", "fir", "Ash", "ash", "pine", "cedar",
  };
  int n_tables = 2 + static_cast<int>(rng.below(3));
  std::vector<sqlgen::TableDef> defs;
  for (int t = 0; t < n_tables; ++t) {
    sqlgen::TableDef def;
    def.name = "t" + std::to_string(t);
    def.columns.push_back({def.name + "_id", sqlgen::ColumnKind::Number});
    def.primary_key = def.name + "_id";
    if (t > 0) {
      // Link to a random earlier table.
      int parent = static_cast<int>(rng.below(static_cast<std::size_t>(t)));
      std::string col = "ref" + std::to_string(parent);
      def.columns.push_back({col, sqlgen::ColumnKind::Number});
      def.foreign_keys.push_back(
          {col, "t" + std::to_string(parent),
           "t" + std::to_string(parent) + "_id"});
    }
    int extra = 1 + static_cast<int>(rng.below(2));
    for (int c = 0; c < extra; ++c) {
      def.columns.push_back({"v" + std::to_string(c), sqlgen::ColumnKind::String});
    }
    defs.push_back(std::move(def));
  }
  sqlgen::Schema schema(defs);

  std::map<std::string, std::vector<sqlgen::Row>> rows;
  std::vector<int> row_counts;
  for (int t = 0; t < n_tables; ++t) {
    row_counts.push_back(3 + static_cast<int>(rng.below(6)));
  }
  for (int t = 0; t < n_tables; ++t) {
    const sqlgen::TableDef& def = defs[static_cast<std::size_t>(t)];
    std::vector<sqlgen::Row> table_rows;
    for (int r = 0; r < row_counts[static_cast<std::size_t>(t)]; ++r) {
      sqlgen::Row row;
      for (const auto& col : def.columns) {
        if (col.name == def.primary_key) {
          row.push_back(std::to_string(r + 1));
        } else if (!def.foreign_keys.empty() &&
                   col.name == def.foreign_keys[0].local_column) {
          int parent = std::stoi(def.foreign_keys[0].foreign_table.substr(1));
          int parent_rows = row_counts[static_cast<std::size_t>(parent)];
          row.push_back(std::to_string(
              1 + rng.below(static_cast<std::size_t>(parent_rows))));
        } else {
          row.push_back(pool[rng.below(pool.size())]);
        }
      }
      table_rows.push_back(std::move(row));
    }
    rows[def.name] = std::move(table_rows);
  }
  return {sqlgen::Database::from_rows(std::move(schema), std::move(rows)),
          pool};
}

// A random query whose table list is join-connected by construction. The
// select attribute comes from the first table (the canonical shape); the
// conditions may reference any listed table and sometimes use values absent
// from the database.
inline sqlgen::SqlQuery random_query(const MicroDb& micro, sqlgen::Rng& rng) {
  const sqlgen::Schema& schema = micro.db.schema();
  std::size_t n_tables = schema.tables().size();
  std::vector<std::string> tables;
  tables.push_back(schema.tables()[rng.below(n_tables)].name);
  int extra = static_cast<int>(rng.below(3));
  for (int i = 0; i < extra; ++i) {
    std::vector<std::string> fresh;
    for (const auto& t : schema.tables()) {
      if (std::find(tables.begin(), tables.end(), t.name) != tables.end()) {
        continue;
      }
      for (const auto& have : tables) {
        if (schema.fk_adjacent(t.name, have)) {
          fresh.push_back(t.name);
          break;
        }
      }
    }
    if (fresh.empty()) break;
    tables.push_back(fresh[rng.below(fresh.size())]);
  }

  auto random_attr = [&](const std::string& table) {
    const auto& cols = schema.table(table).columns;
    return sqlgen::AttrRef{table, cols[rng.below(cols.size())].name};
  };

  sqlgen::SqlQuery query;
  query.tables = tables;
  query.select_attr = random_attr(tables[0]);
  int n_conds = 1 + static_cast<int>(rng.below(3));
  for (int c = 0; c < n_conds; ++c) {
    const std::string& table = tables[rng.below(tables.size())];
    sqlgen::AttrRef attr = random_attr(table);
    std::string value;
    if (rng.below(10) < 7) {
      auto values = micro.db.distinct_values(attr);
      if (!values.empty()) value = values[rng.below(values.size())];
    }
    if (value.empty()) value = micro.string_pool[rng.below(micro.string_pool.size())];
    query.conditions.push_back({attr, value});
    if (c > 0) {
      query.connectives.push_back(rng.below(2) == 0 ? sqlgen::Connective::And
                                                    : sqlgen::Connective::Or);
    }
  }
  return query;
}

// --- naive masked generate/copy mixture -------------------------------------
// Straightforward transcription: bilinear generate scores, sigmoid copy
// projection scores, one shared max-shifted softmax over the legal entries,
// then word aggregation by folded surface text.

struct NaiveWord {
  std::string folded;
  double prob = 0.0;
  std::vector<int> entries;
};

struct NaiveDist {
  std::vector<double> entry_probs;
  double generate_mass = 0.0;
  double copy_mass = 0.0;
  std::vector<NaiveWord> words;
};

inline NaiveDist naive_distribution(const Eigen::VectorXd& s_t,
                                    const sqlgen::EncoderOutput& enc,
                                    const sqlgen::MaskVector& mask,
                                    const sqlgen::Vocabulary& vocab,
                                    const sqlgen::ModelParams& params) {
  int sql = vocab.sql_size();
  int total = sql + enc.length();
  std::vector<double> scores(static_cast<std::size_t>(total), 0.0);
  for (int v = 0; v < sql; ++v) {
    long double acc = 0.0L;
    for (int k = 0; k < params.dims.d_s; ++k) {
      acc += static_cast<long double>(params.w_out(v, k)) * s_t(k);
    }
    scores[static_cast<std::size_t>(v)] = static_cast<double>(acc);
  }
  for (int j = 0; j < enc.length(); ++j) {
    // sigma(h_j^T W_c) s_t
    long double acc = 0.0L;
    for (int k = 0; k < params.dims.d_s; ++k) {
      long double pre = 0.0L;
      for (int d = 0; d < 2 * params.dims.d_h; ++d) {
        pre += static_cast<long double>(enc.states(j, d)) * params.w_copy(d, k);
      }
      long double sig = 1.0L / (1.0L + std::exp(-static_cast<double>(pre)));
      acc += sig * static_cast<long double>(s_t(k));
    }
    scores[static_cast<std::size_t>(sql + j)] = static_cast<double>(acc);
  }

  double shift = -std::numeric_limits<double>::infinity();
  for (int e = 0; e < total; ++e) {
    if (mask.legal(e)) shift = std::max(shift, scores[static_cast<std::size_t>(e)]);
  }
  long double z = 0.0L;
  for (int e = 0; e < total; ++e) {
    if (mask.legal(e)) z += std::exp(scores[static_cast<std::size_t>(e)] - shift);
  }
  NaiveDist out;
  out.entry_probs.assign(static_cast<std::size_t>(total), 0.0);
  for (int e = 0; e < total; ++e) {
    if (!mask.legal(e)) continue;
    double p = static_cast<double>(
        std::exp(scores[static_cast<std::size_t>(e)] - shift) / z);
    out.entry_probs[static_cast<std::size_t>(e)] = p;
    if (e < sql) {
      out.generate_mass += p;
    } else {
      out.copy_mass += p;
    }
    std::string folded = sqlgen::fold_case(
        e < sql ? vocab.token_of(e) : enc.tokens[static_cast<std::size_t>(e - sql)]);
    auto it = std::find_if(out.words.begin(), out.words.end(),
                           [&](const NaiveWord& w) { return w.folded == folded; });
    if (it == out.words.end()) {
      out.words.push_back({folded, p, {e}});
    } else {
      it->prob += p;
      it->entries.push_back(e);
    }
  }
  return out;
}

// --- finite-difference gradient checking ------------------------------------

// Loss of a fixed emitted token sequence under the current parameters:
// teacher-forces the tokens and applies the reward weights.
inline double forced_loss(const sqlgen::ModelParams& params,
                          const sqlgen::MaskMachine& machine,
                          const sqlgen::Vocabulary& vocab,
                          const std::vector<std::string>& tokens,
                          const std::vector<double>& rewards) {
  sqlgen::EncoderOutput enc = sqlgen::encode(machine.source(), vocab, params);
  sqlgen::Episode ep =
      sqlgen::force_decode(params, machine, std::move(enc), tokens);
  double loss = 0.0;
  for (std::size_t i = 0; i < ep.logps.size(); ++i) {
    loss -= rewards[i] * ep.logps[i];
  }
  return loss;
}

struct GradCheckStats {
  int probes = 0;
  double worst_rel_err = 0.0;
  std::string worst_tensor;
};

// Central finite differences on the largest-gradient coordinates of every
// tensor. Probing by magnitude keeps the comparison well conditioned: on a
// near-zero coordinate the difference quotient is mostly float cancellation
// noise and the relative error reflects the probe, not the gradient code.
inline GradCheckStats check_gradients(sqlgen::ModelParams params,
                                      const sqlgen::MaskMachine& machine,
                                      const sqlgen::Vocabulary& vocab,
                                      const std::vector<std::string>& tokens,
                                      const std::vector<double>& rewards,
                                      int coords_per_tensor) {
  sqlgen::EncoderOutput enc = sqlgen::encode(machine.source(), vocab, params);
  sqlgen::Episode ep = sqlgen::force_decode(params, machine, std::move(enc), tokens);
  sqlgen::LossGrads lg = sqlgen::loss_and_gradients(ep, rewards, params);

  std::vector<std::pair<std::string, Eigen::Ref<Eigen::MatrixXd>>> tensors;
  params.for_each([&](const std::string& name, Eigen::Ref<Eigen::MatrixXd> m) {
    tensors.emplace_back(name, m);
  });
  std::vector<std::pair<std::string, Eigen::Ref<Eigen::MatrixXd>>> grads;
  lg.grads.for_each([&](const std::string& name, Eigen::Ref<Eigen::MatrixXd> m) {
    grads.emplace_back(name, m);
  });

  const double h = 1e-5;
  GradCheckStats stats;
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    Eigen::Ref<Eigen::MatrixXd> theta = tensors[t].second;
    Eigen::Ref<Eigen::MatrixXd> grad = grads[t].second;

    std::vector<std::pair<Eigen::Index, Eigen::Index>> coords;
    for (Eigen::Index r = 0; r < theta.rows(); ++r) {
      for (Eigen::Index c = 0; c < theta.cols(); ++c) {
        coords.emplace_back(r, c);
      }
    }
    auto by_grad_magnitude = [&](const auto& a, const auto& b) {
      return std::abs(grad(a.first, a.second)) >
             std::abs(grad(b.first, b.second));
    };
    std::size_t k = std::min<std::size_t>(
        coords.size(), static_cast<std::size_t>(coords_per_tensor));
    std::partial_sort(coords.begin(),
                      coords.begin() + static_cast<std::ptrdiff_t>(k),
                      coords.end(), by_grad_magnitude);

    for (std::size_t probe = 0; probe < k; ++probe) {
      auto [r, c] = coords[probe];
      double saved = theta(r, c);
      theta(r, c) = saved + h;
      double up = forced_loss(params, machine, vocab, tokens, rewards);
      theta(r, c) = saved - h;
      double down = forced_loss(params, machine, vocab, tokens, rewards);
      theta(r, c) = saved;
      double fd = (up - down) / (2 * h);
      double an = grad(r, c);
      double denom = std::max(1e-6, std::abs(fd) + std::abs(an));
      double rel = std::abs(fd - an) / denom;
      ++stats.probes;
      if (rel > stats.worst_rel_err) {
        stats.worst_rel_err = rel;
        stats.worst_tensor = tensors[t].first;
      }
    }
  }
  return stats;
}

// --- literal reward transcriptions ------------------------------------------
// Direct line-by-line renderings of the two point-wise reward procedures,
// kept independent of the library implementation.

inline std::map<std::size_t, double> naive_coverage(
    const std::vector<std::string>& tokens,
    const std::vector<sqlgen::TokenRole>& roles,
    const std::vector<std::string>& value_set) {
  std::set<std::string> folded_u;
  for (const auto& v : value_set) folded_u.insert(sqlgen::fold_case(v));
  std::size_t u = folded_u.size();
  std::map<std::size_t, double> out;
  std::set<std::string> copied;
  std::size_t op_count = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string folded = sqlgen::fold_case(tokens[i]);
    switch (roles[i]) {
      case sqlgen::TokenRole::ValueWord:
        if (folded_u.count(folded) && !copied.count(folded)) {
          copied.insert(folded);
          out[i] = 1.0;
        } else {
          out[i] = -1.0;
        }
        break;
      case sqlgen::TokenRole::Operator:
        ++op_count;
        if (op_count < u) {
          out[i] = 1.0 / (static_cast<double>(u) - 1.0);
        } else if (op_count == u) {
          out[i] = -1.0;
        } else {
          out[i] = 0.0;
        }
        break;
      case sqlgen::TokenRole::Eos:
        if (op_count + 1 < u) {
          out[i] = -1.0;
        } else if (op_count + 1 == u) {
          out[i] = 1.0;
        } else {
          out[i] = 0.0;
        }
        break;
      default:
        break;
    }
  }
  return out;
}

inline std::map<std::size_t, double> naive_execution(
    const std::vector<std::string>& tokens,
    const std::vector<sqlgen::TokenRole>& roles, const sqlgen::Database& db,
    const sqlgen::ResultSet& answer) {
  using sqlgen::TokenRole;
  // Reconstruct the query prefix from roles.
  sqlgen::SqlQuery query;
  std::vector<std::size_t> b_positions;
  struct Cond {
    std::vector<std::size_t> attr_positions;
    std::size_t value_position = 0;
    bool complete = false;
  };
  std::vector<Cond> conds;
  std::vector<std::size_t> op_positions;
  bool saw_eos = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    switch (roles[i]) {
      case TokenRole::BWord: {
        b_positions.push_back(i);
        auto attr = sqlgen::AttrRef::parse(tokens[i]);
        if (attr) {
          query.select_attr = *attr;
        } else if (tokens[i] != sqlgen::Vocabulary::kSelect &&
                   tokens[i] != sqlgen::Vocabulary::kFrom &&
                   tokens[i] != sqlgen::Vocabulary::kJoin &&
                   tokens[i] != sqlgen::Vocabulary::kWhere) {
          query.tables.push_back(tokens[i]);
        }
        break;
      }
      case TokenRole::CondAttrWord: {
        auto attr = sqlgen::AttrRef::parse(tokens[i]);
        if (attr) {
          conds.push_back({});
          query.conditions.push_back({*attr, ""});
        }
        conds.back().attr_positions.push_back(i);
        break;
      }
      case TokenRole::ValueWord:
        conds.back().value_position = i;
        conds.back().complete = true;
        query.conditions.back().value = tokens[i];
        break;
      case TokenRole::Operator:
        op_positions.push_back(i);
        query.connectives.push_back(tokens[i] == sqlgen::Vocabulary::kAnd
                                        ? sqlgen::Connective::And
                                        : sqlgen::Connective::Or);
        break;
      case TokenRole::Eos:
        saw_eos = true;
        break;
    }
  }

  std::map<std::size_t, double> out;
  bool exact = false;
  if (saw_eos && !conds.empty() && conds.back().complete) {
    exact = oracle_execute(db, query) == folded_set(answer);
  }
  if (exact) {
    for (std::size_t i : b_positions) out[i] = 1.0;
    for (std::size_t i : op_positions) out[i] = 1.0;
    for (const auto& c : conds) {
      for (std::size_t i : c.attr_positions) out[i] = 1.0;
    }
    return out;
  }
  for (std::size_t i : b_positions) out[i] = -1.0;
  for (std::size_t i : op_positions) out[i] = 0.0;
  std::set<std::string> answer_folded = folded_set(answer);
  for (std::size_t k = 0; k < conds.size(); ++k) {
    double r = -1.0;
    if (conds[k].complete) {
      sqlgen::SqlQuery single = query;
      single.conditions = {query.conditions[k]};
      single.connectives.clear();
      std::set<std::string> got = oracle_execute(db, single);
      std::set<std::string> both;
      std::set_intersection(got.begin(), got.end(), answer_folded.begin(),
                            answer_folded.end(),
                            std::inserter(both, both.begin()));
      r = both.empty() ? -1.0 : 1.0;
    }
    for (std::size_t i : conds[k].attr_positions) out[i] = r;
  }
  return out;
}

// --- exhaustive episode enumeration -----------------------------------------

struct EnumeratedEpisode {
  std::vector<std::string> tokens;
  std::vector<sqlgen::TokenRole> roles;
};

// Depth-first walk of every legal word sequence of the machine. Entries that
// share a folded surface lead to the same next state, so one representative
// entry per word suffices.
inline void enumerate_episodes(const sqlgen::MaskMachine& machine,
                               const sqlgen::GrammarState& state,
                               EnumeratedEpisode& partial,
                               std::vector<EnumeratedEpisode>& out,
                               std::size_t limit) {
  if (state.done()) {
    out.push_back(partial);
    return;
  }
  if (out.size() >= limit) return;
  sqlgen::MaskVector mask = machine.legal_mask(state);
  std::set<std::string> seen;
  for (int e = 0; e < mask.size(); ++e) {
    if (!mask.legal(e)) continue;
    std::string folded = sqlgen::fold_case(machine.entry_token(e));
    if (!seen.insert(folded).second) continue;
    partial.tokens.push_back(machine.entry_token(e));
    partial.roles.push_back(machine.role_of(state, e));
    enumerate_episodes(machine, machine.advance(state, e), partial, out, limit);
    partial.tokens.pop_back();
    partial.roles.pop_back();
  }
}

}  // namespace testsupport
