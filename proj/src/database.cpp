#include "sqlgen/database.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "sqlgen/errors.hpp"
#include "sqlgen/strings.hpp"

namespace sqlgen {

void ResultSet::insert(const std::string& value) {
  std::string key = fold_case(value);
  auto it = values_.find(key);
  if (it == values_.end()) {
    values_.emplace(std::move(key), value);
  } else if (value < it->second) {
    it->second = value;
  }
}

bool ResultSet::contains(const std::string& value) const {
  return values_.count(fold_case(value)) > 0;
}

bool ResultSet::operator==(const ResultSet& other) const {
  if (values_.size() != other.values_.size()) return false;
  auto a = values_.begin();
  auto b = other.values_.begin();
  for (; a != values_.end(); ++a, ++b) {
    if (a->first != b->first) return false;
  }
  return true;
}

bool ResultSet::intersects(const ResultSet& other) const {
  const ResultSet& small = size() <= other.size() ? *this : other;
  const ResultSet& large = size() <= other.size() ? other : *this;
  for (const auto& [key, surface] : small.values_) {
    if (large.values_.count(key)) return true;
  }
  return false;
}

std::vector<std::string> ResultSet::values() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& [key, surface] : values_) out.push_back(surface);
  return out;
}

ResultSet ResultSet::of(const std::vector<std::string>& values) {
  ResultSet rs;
  for (const auto& v : values) rs.insert(v);
  return rs;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, tab - start)));
    start = tab + 1;
  }
  return out;
}

bool parses_as_number(const std::string& s) {
  if (s.empty()) return false;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

Database Database::load(Schema schema, const std::filesystem::path& dir) {
  std::vector<std::vector<Row>> all_rows;
  for (const auto& table : schema.tables()) {
    std::filesystem::path file = dir / (table.name + ".tsv");
    std::ifstream in(file);
    if (!in) throw DataError("cannot open table file: " + file.string());
    std::string line;
    if (!std::getline(in, line)) {
      throw DataError(file.string() + ": missing header row");
    }
    auto header = split_tabs(line);
    // Header may reorder columns; rows are realigned to schema order.
    std::vector<int> source_of(table.columns.size(), -1);
    if (header.size() != table.columns.size()) {
      throw DataError(file.string() + ": header has " +
                      std::to_string(header.size()) + " columns, schema has " +
                      std::to_string(table.columns.size()));
    }
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      for (std::size_t h = 0; h < header.size(); ++h) {
        if (header[h] == table.columns[c].name) {
          source_of[c] = static_cast<int>(h);
          break;
        }
      }
      if (source_of[c] < 0) {
        throw DataError(file.string() + ": header lacks column '" +
                        table.columns[c].name + "'");
      }
    }
    std::vector<Row> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      auto cells = split_tabs(line);
      if (cells.size() != header.size()) {
        throw DataError(file.string() + ":" + std::to_string(line_no) +
                        ": row has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(header.size()));
      }
      Row row(table.columns.size());
      for (std::size_t c = 0; c < table.columns.size(); ++c) {
        row[c] = cells[static_cast<std::size_t>(source_of[c])];
      }
      rows.push_back(std::move(row));
    }
    all_rows.push_back(std::move(rows));
  }
  return Database(std::move(schema), std::move(all_rows));
}

Database Database::from_rows(Schema schema,
                             std::map<std::string, std::vector<Row>> rows) {
  std::vector<std::vector<Row>> all_rows;
  for (const auto& table : schema.tables()) {
    auto it = rows.find(table.name);
    all_rows.push_back(it == rows.end() ? std::vector<Row>{} : it->second);
  }
  return Database(std::move(schema), std::move(all_rows));
}

Database::Database(Schema schema, std::vector<std::vector<Row>> rows)
    : schema_(std::move(schema)), rows_(std::move(rows)) {
  validate();
}

const std::vector<Row>& Database::rows(const std::string& table) const {
  int idx = schema_.table_index(table);
  if (idx < 0) throw SchemaError("unknown table '" + table + "'");
  return rows_[static_cast<std::size_t>(idx)];
}

std::vector<std::string> Database::distinct_values(const AttrRef& attr) const {
  const TableDef& table = schema_.table(attr.table);
  int col = table.column_index(attr.column);
  if (col < 0) throw SchemaError("unknown attribute '" + attr.qualified() + "'");
  std::set<std::string> seen;
  for (const auto& row : rows(attr.table)) {
    seen.insert(row[static_cast<std::size_t>(col)]);
  }
  return {seen.begin(), seen.end()};
}

void Database::validate() const {
  for (std::size_t t = 0; t < schema_.tables().size(); ++t) {
    const TableDef& table = schema_.tables()[t];
    int pk_col = table.column_index(table.primary_key);
    std::set<std::string> pk_seen;
    for (const auto& row : rows_[t]) {
      if (row.size() != table.columns.size()) {
        throw DataError("table '" + table.name + "': row arity " +
                        std::to_string(row.size()) + " != column count " +
                        std::to_string(table.columns.size()));
      }
      for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (table.columns[c].kind == ColumnKind::Number &&
            !parses_as_number(row[c])) {
          throw DataError("table '" + table.name + "': cell '" + row[c] +
                          "' in numeric column '" + table.columns[c].name +
                          "' is not a number");
        }
      }
      const std::string& pk = row[static_cast<std::size_t>(pk_col)];
      if (!pk_seen.insert(fold_case(pk)).second) {
        throw DataError("table '" + table.name + "': duplicate primary key '" +
                        pk + "'");
      }
    }
  }
  // Foreign-key integrity: every FK value must hit a referenced row.
  for (std::size_t t = 0; t < schema_.tables().size(); ++t) {
    const TableDef& table = schema_.tables()[t];
    for (const auto& fk : table.foreign_keys) {
      int local = table.column_index(fk.local_column);
      const TableDef& target = schema_.table(fk.foreign_table);
      int remote = target.column_index(fk.foreign_column);
      std::set<std::string> target_values;
      for (const auto& row : rows(fk.foreign_table)) {
        target_values.insert(fold_case(row[static_cast<std::size_t>(remote)]));
      }
      for (const auto& row : rows_[t]) {
        const std::string& v = row[static_cast<std::size_t>(local)];
        if (!target_values.count(fold_case(v))) {
          throw DataError("table '" + table.name + "': foreign key value '" + v +
                          "' has no match in " + fk.foreign_table + "." +
                          fk.foreign_column);
        }
      }
    }
  }
}

}  // namespace sqlgen
