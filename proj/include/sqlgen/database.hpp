#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sqlgen/schema.hpp"

namespace sqlgen {

using Row = std::vector<std::string>;

// An unordered set of distinct value strings. Membership and comparison are
// case-insensitive (the executor's case rule); surface forms are preserved,
// and when two case variants collide the lexicographically smaller surface
// wins so results never depend on row order.
class ResultSet {
 public:
  void insert(const std::string& value);

  bool empty() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }
  bool contains(const std::string& value) const;

  bool operator==(const ResultSet& other) const;
  bool intersects(const ResultSet& other) const;

  // Surface forms ordered by folded key.
  std::vector<std::string> values() const;

  static ResultSet of(const std::vector<std::string>& values);

 private:
  std::map<std::string, std::string> values_;  // folded -> surface
};

// Schema plus in-memory rows, aligned to each table's column order.
// Immutable after load.
class Database {
 public:
  // Reads one tab-separated file per table from `dir`: <table>.tsv with a
  // header row naming the columns.
  static Database load(Schema schema, const std::filesystem::path& dir);

  // Assembles from in-memory rows keyed by table name, running validation.
  static Database from_rows(Schema schema, std::map<std::string, std::vector<Row>> rows);

  const Schema& schema() const { return schema_; }
  const std::vector<Row>& rows(const std::string& table) const;

  // Distinct cell values of one column, sorted, surface forms.
  std::vector<std::string> distinct_values(const AttrRef& attr) const;

 private:
  Database(Schema schema, std::vector<std::vector<Row>> rows);
  void validate() const;

  Schema schema_;
  std::vector<std::vector<Row>> rows_;  // aligned with schema_.tables()
};

}  // namespace sqlgen
