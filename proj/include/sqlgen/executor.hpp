#pragma once

#include <cstddef>
#include <vector>

#include "sqlgen/database.hpp"
#include "sqlgen/sql.hpp"

namespace sqlgen {

// Derives one equi-join predicate per table after the first. Each table is
// linked to the earliest previously listed table it shares a foreign-key edge
// with; edges are probed in the earlier table's foreign-key declaration order
// first, then the new table's. Throws UnjoinableTables when a table has no
// edge to any earlier one.
std::vector<JoinPredicate> infer_join_predicates(
    const std::vector<std::string>& tables, const Schema& schema);

// Executes the query against the database: nested-loop join over the inferred
// predicates, WHERE evaluation with `and` binding tighter than `or`, then a
// projection of the selected attribute. All string comparisons are
// case-insensitive; the result is a set.
ResultSet execute(const Database& db, const SqlQuery& query);

// Executes the query with its WHERE clause replaced by the single condition
// at `index` (same tables, same joins).
ResultSet execute_single_condition(const Database& db, const SqlQuery& query,
                                   std::size_t index);

}  // namespace sqlgen
