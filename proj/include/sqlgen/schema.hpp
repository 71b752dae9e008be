#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sqlgen {

enum class ColumnKind { String, Number };

struct ColumnDef {
  std::string name;
  ColumnKind kind = ColumnKind::String;
};

struct ForeignKey {
  std::string local_column;
  std::string foreign_table;
  std::string foreign_column;
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;
  std::string primary_key;
  std::vector<ForeignKey> foreign_keys;

  // -1 when absent.
  int column_index(const std::string& column) const;
};

// A qualified "table.column" reference.
struct AttrRef {
  std::string table;
  std::string column;

  std::string qualified() const { return table + "." + column; }
  static std::optional<AttrRef> parse(const std::string& qualified);

  bool operator==(const AttrRef&) const = default;
  auto operator<=>(const AttrRef&) const = default;
};

// Tables, typed columns, keys and the foreign-key graph. Immutable after
// construction; every accessor is read-only.
class Schema {
 public:
  static Schema load(const std::filesystem::path& path);
  static Schema parse(std::istream& in, const std::string& origin);
  static Schema parse_text(const std::string& text, const std::string& origin = "<text>");

  // Constructs from already-assembled tables, running full validation.
  explicit Schema(std::vector<TableDef> tables);

  const std::vector<TableDef>& tables() const { return tables_; }
  const TableDef* find_table(const std::string& name) const;
  const TableDef& table(const std::string& name) const;  // throws SchemaError
  int table_index(const std::string& name) const;        // -1 when absent

  bool has_attribute(const AttrRef& attr) const;

  // True when some FK edge connects the two tables, in either direction.
  bool fk_adjacent(const std::string& a, const std::string& b) const;

  // All qualified attributes, table-major in declaration order.
  std::vector<AttrRef> all_attributes() const;

 private:
  void validate() const;

  std::vector<TableDef> tables_;
};

}  // namespace sqlgen
