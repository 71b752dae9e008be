#include "sqlgen/executor.hpp"

#include <algorithm>
#include <optional>

#include "sqlgen/errors.hpp"
#include "sqlgen/strings.hpp"

namespace sqlgen {

std::vector<JoinPredicate> infer_join_predicates(
    const std::vector<std::string>& tables, const Schema& schema) {
  std::vector<JoinPredicate> preds;
  for (std::size_t k = 1; k < tables.size(); ++k) {
    const TableDef& fresh = schema.table(tables[k]);
    std::optional<JoinPredicate> found;
    for (std::size_t e = 0; e < k && !found; ++e) {
      const TableDef& earlier = schema.table(tables[e]);
      for (const auto& fk : earlier.foreign_keys) {
        if (fk.foreign_table == fresh.name) {
          found = JoinPredicate{{fresh.name, fk.foreign_column},
                                {earlier.name, fk.local_column}};
          break;
        }
      }
      if (found) break;
      for (const auto& fk : fresh.foreign_keys) {
        if (fk.foreign_table == earlier.name) {
          found = JoinPredicate{{fresh.name, fk.local_column},
                                {earlier.name, fk.foreign_column}};
          break;
        }
      }
    }
    if (!found) {
      throw UnjoinableTables("table '" + fresh.name +
                             "' shares no foreign-key edge with any table "
                             "listed before it");
    }
    preds.push_back(*found);
  }
  return preds;
}

namespace {

struct BoundAttr {
  std::size_t table_pos;
  int column;
};

BoundAttr bind_attr(const AttrRef& attr,
                    const std::vector<std::string>& tables,
                    const Schema& schema) {
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (tables[i] == attr.table) {
      int col = schema.table(tables[i]).column_index(attr.column);
      if (col < 0) {
        throw SchemaError("unknown attribute '" + attr.qualified() + "'");
      }
      return {i, col};
    }
  }
  throw SchemaError("attribute '" + attr.qualified() +
                    "' references a table outside the from clause");
}

// One joined tuple: a row pointer per listed table.
using Tuple = std::vector<const Row*>;

std::vector<Tuple> join_tables(const Database& db,
                               const std::vector<std::string>& tables,
                               const std::vector<JoinPredicate>& preds) {
  const Schema& schema = db.schema();
  std::vector<Tuple> tuples;
  for (const Row& r : db.rows(tables[0])) {
    tuples.push_back({&r});
  }
  for (std::size_t k = 1; k < tables.size(); ++k) {
    // Each predicate links the fresh table (left side) to an earlier one.
    const JoinPredicate& p = preds[k - 1];
    BoundAttr earlier = bind_attr(p.right,
                                  {tables.begin(), tables.begin() + static_cast<std::ptrdiff_t>(k)},
                                  schema);
    int fresh_col = schema.table(tables[k]).column_index(p.left.column);
    std::vector<Tuple> next;
    for (const Tuple& t : tuples) {
      const std::string& lhs = (*t[earlier.table_pos])[static_cast<std::size_t>(earlier.column)];
      for (const Row& r : db.rows(tables[k])) {
        if (fold_equal(lhs, r[static_cast<std::size_t>(fresh_col)])) {
          Tuple grown = t;
          grown.push_back(&r);
          next.push_back(std::move(grown));
        }
      }
    }
    tuples = std::move(next);
  }
  return tuples;
}

bool condition_holds(const Tuple& t, const BoundAttr& at,
                     const std::string& value) {
  const std::string& cell = (*t[at.table_pos])[static_cast<std::size_t>(at.column)];
  return fold_equal(cell, value);
}

// `and` binds tighter than `or`: the condition list splits at each `or` into
// conjunction groups, and the clause holds when any group does.
bool where_holds(const Tuple& t, const std::vector<BoundAttr>& attrs,
                 const std::vector<Condition>& conds,
                 const std::vector<Connective>& conns) {
  std::size_t i = 0;
  while (i < conds.size()) {
    bool group = true;
    // Conjunction group: conditions i, i+1, ... chained by `and`.
    while (true) {
      group = group && condition_holds(t, attrs[i], conds[i].value);
      if (i < conns.size() && conns[i] == Connective::And) {
        ++i;
      } else {
        break;
      }
    }
    if (group) return true;
    ++i;  // step over the `or` boundary
  }
  return false;
}

ResultSet run(const Database& db, const SqlQuery& query,
              const std::vector<Condition>& conds,
              const std::vector<Connective>& conns) {
  const Schema& schema = db.schema();
  if (query.tables.empty()) throw SchemaError("query lists no tables");
  auto preds = infer_join_predicates(query.tables, schema);
  BoundAttr sel = bind_attr(query.select_attr, query.tables, schema);
  std::vector<BoundAttr> cond_attrs;
  cond_attrs.reserve(conds.size());
  for (const auto& c : conds) {
    cond_attrs.push_back(bind_attr(c.attr, query.tables, schema));
  }
  ResultSet out;
  for (const Tuple& t : join_tables(db, query.tables, preds)) {
    if (where_holds(t, cond_attrs, conds, conns)) {
      out.insert((*t[sel.table_pos])[static_cast<std::size_t>(sel.column)]);
    }
  }
  return out;
}

}  // namespace

ResultSet execute(const Database& db, const SqlQuery& query) {
  if (query.conditions.empty()) {
    throw SchemaError("query has no where clause");
  }
  return run(db, query, query.conditions, query.connectives);
}

ResultSet execute_single_condition(const Database& db, const SqlQuery& query,
                                   std::size_t index) {
  if (index >= query.conditions.size()) {
    throw InternalError("condition index out of range");
  }
  return run(db, query, {query.conditions[index]}, {});
}

}  // namespace sqlgen
