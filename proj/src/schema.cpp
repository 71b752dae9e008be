#include "sqlgen/schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "sqlgen/errors.hpp"
#include "sqlgen/strings.hpp"

namespace sqlgen {

int TableDef::column_index(const std::string& column) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == column) return static_cast<int>(i);
  }
  return -1;
}

std::optional<AttrRef> AttrRef::parse(const std::string& qualified) {
  auto dot = qualified.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == qualified.size()) {
    return std::nullopt;
  }
  return AttrRef{qualified.substr(0, dot), qualified.substr(dot + 1)};
}

Schema Schema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file: " + path.string());
  return parse(in, path.string());
}

Schema Schema::parse_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  return parse(in, origin);
}

// Line-oriented format:
//   table <name>
//     column <name> <string|number>
//     primary_key <column>
//     foreign_key <local_column> -> <table>.<column>
// '#' starts a comment; blank lines are ignored.
Schema Schema::parse(std::istream& in, const std::string& origin) {
  std::vector<TableDef> tables;
  std::string raw;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw SchemaError(origin + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    auto fields = split_whitespace(raw);
    if (fields.empty()) continue;
    const std::string& kw = fields[0];
    if (kw == "table") {
      if (fields.size() != 2) fail("expected: table <name>");
      tables.push_back(TableDef{fields[1], {}, "", {}});
    } else if (kw == "column") {
      if (tables.empty()) fail("column outside a table block");
      if (fields.size() != 3) fail("expected: column <name> <string|number>");
      ColumnKind kind;
      if (fields[2] == "string") {
        kind = ColumnKind::String;
      } else if (fields[2] == "number") {
        kind = ColumnKind::Number;
      } else {
        fail("unknown column kind '" + fields[2] + "'");
        return Schema({});  // unreachable
      }
      tables.back().columns.push_back(ColumnDef{fields[1], kind});
    } else if (kw == "primary_key") {
      if (tables.empty()) fail("primary_key outside a table block");
      if (fields.size() != 2) fail("expected: primary_key <column>");
      tables.back().primary_key = fields[1];
    } else if (kw == "foreign_key") {
      if (tables.empty()) fail("foreign_key outside a table block");
      if (fields.size() != 4 || fields[2] != "->") {
        fail("expected: foreign_key <local_column> -> <table>.<column>");
      }
      auto target = AttrRef::parse(fields[3]);
      if (!target) fail("malformed foreign key target '" + fields[3] + "'");
      tables.back().foreign_keys.push_back(
          ForeignKey{fields[1], target->table, target->column});
    } else {
      fail("unknown directive '" + kw + "'");
    }
  }
  return Schema(std::move(tables));
}

Schema::Schema(std::vector<TableDef> tables) : tables_(std::move(tables)) {
  validate();
}

const TableDef* Schema::find_table(const std::string& name) const {
  for (const auto& t : tables_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const TableDef& Schema::table(const std::string& name) const {
  const TableDef* t = find_table(name);
  if (t == nullptr) throw SchemaError("unknown table '" + name + "'");
  return *t;
}

int Schema::table_index(const std::string& name) const {
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    if (tables_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

bool Schema::has_attribute(const AttrRef& attr) const {
  const TableDef* t = find_table(attr.table);
  return t != nullptr && t->column_index(attr.column) >= 0;
}

bool Schema::fk_adjacent(const std::string& a, const std::string& b) const {
  for (const auto& t : tables_) {
    for (const auto& fk : t.foreign_keys) {
      if ((t.name == a && fk.foreign_table == b) ||
          (t.name == b && fk.foreign_table == a)) {
        return true;
      }
    }
  }
  return false;
}

std::vector<AttrRef> Schema::all_attributes() const {
  std::vector<AttrRef> out;
  for (const auto& t : tables_) {
    for (const auto& c : t.columns) out.push_back(AttrRef{t.name, c.name});
  }
  return out;
}

namespace {

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

void Schema::validate() const {
  if (tables_.empty()) throw SchemaError("schema has no tables");
  std::set<std::string> names;
  for (const auto& t : tables_) {
    if (!valid_identifier(t.name)) {
      throw SchemaError("invalid table name '" + t.name + "'");
    }
    for (const auto& c : t.columns) {
      if (!valid_identifier(c.name)) {
        throw SchemaError("invalid column name '" + c.name + "' in table '" +
                          t.name + "'");
      }
    }
    if (!names.insert(t.name).second) {
      throw SchemaError("duplicate table name '" + t.name + "'");
    }
    if (t.columns.empty()) {
      throw SchemaError("table '" + t.name + "' has no columns");
    }
    std::set<std::string> cols;
    for (const auto& c : t.columns) {
      if (!cols.insert(c.name).second) {
        throw SchemaError("duplicate column '" + c.name + "' in table '" +
                          t.name + "'");
      }
    }
    if (t.primary_key.empty()) {
      throw SchemaError("table '" + t.name + "' has no primary_key");
    }
    if (t.column_index(t.primary_key) < 0) {
      throw SchemaError("primary_key '" + t.primary_key + "' of table '" +
                        t.name + "' names no existing column");
    }
  }
  for (const auto& t : tables_) {
    for (const auto& fk : t.foreign_keys) {
      if (t.column_index(fk.local_column) < 0) {
        throw SchemaError("foreign key of table '" + t.name +
                          "' uses unknown local column '" + fk.local_column + "'");
      }
      const TableDef* target = find_table(fk.foreign_table);
      if (target == nullptr) {
        throw SchemaError("dangling foreign key: table '" + t.name +
                          "' references missing table '" + fk.foreign_table + "'");
      }
      if (target->column_index(fk.foreign_column) < 0) {
        throw SchemaError("dangling foreign key: '" + fk.foreign_table + "." +
                          fk.foreign_column + "' names no existing column");
      }
    }
  }
  // The FK graph must be connected so join predicates always exist.
  std::set<std::string> reached{tables_.front().name};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& t : tables_) {
      if (reached.count(t.name)) continue;
      for (const auto& r : reached) {
        if (fk_adjacent(t.name, r)) {
          reached.insert(t.name);
          grew = true;
          break;
        }
      }
    }
  }
  for (const auto& t : tables_) {
    if (!reached.count(t.name)) {
      throw SchemaError("foreign-key graph is disconnected: table '" + t.name +
                        "' is unreachable from '" + tables_.front().name + "'");
    }
  }
}

}  // namespace sqlgen
