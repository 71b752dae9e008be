#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sqlgen {

// Base of all library errors. The CLI maps the two branches below onto
// distinct exit codes (data = 3, internal = 4).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Problems with user-supplied inputs: malformed files, bad identifiers,
// broken referential integrity, unsatisfiable generation requests.
struct DataError : Error {
  using Error::Error;
};

// Out-of-range or inconsistent option values (usage, exit 2 in the CLI).
struct ConfigError : Error {
  using Error::Error;
};

struct SchemaError : DataError {
  using DataError::DataError;
};

struct TemplateError : DataError {
  using DataError::DataError;
};

struct CheckpointError : DataError {
  using DataError::DataError;
};

struct ExhaustedError : DataError {
  using DataError::DataError;
};

// A token sequence that deviates from the canonical query grammar.
struct GrammarViolation : DataError {
  GrammarViolation(std::size_t position_, const std::string& expected_,
                   const std::string& got_)
      : DataError("grammar violation at position " + std::to_string(position_) +
                  ": expected " + expected_ + ", got '" + got_ + "'"),
        position(position_),
        expected(expected_),
        got(got_) {}

  std::size_t position;
  std::string expected;
  std::string got;
};

struct UnjoinableTables : DataError {
  using DataError::DataError;
};

// A token fed to the grammar machine that its mask does not admit.
struct IllegalToken : DataError {
  using DataError::DataError;
};

// Contract breaches inside the library.
struct InternalError : Error {
  using Error::Error;
};

// The mask rules yielded an all-zero vector (unsatisfiable state).
struct DeadEnd : Error {
  using Error::Error;
};

struct EmptyValueSet : InternalError {
  using InternalError::InternalError;
};

struct MissingRole : InternalError {
  using InternalError::InternalError;
};

}  // namespace sqlgen
