#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace appt {

// A file could not be opened, read or written. The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid or unknown configuration key/value. Exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dataset header does not provide a column the schema requires.
class SchemaError : public std::runtime_error {
public:
    explicit SchemaError(std::string column)
        : std::runtime_error("schema error: missing column '" + column + "'"),
          column_(std::move(column)) {}

    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

// A data cell could not be parsed under its feature kind. `row` is the
// 1-based data row (header excluded).
class RowError : public std::runtime_error {
public:
    RowError(std::size_t row, std::string column, const std::string& value)
        : std::runtime_error("row " + std::to_string(row) + ": column '" + column +
                             "' has unparseable value '" + value + "'"),
          row_(row), column_(std::move(column)) {}

    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

// Exact enumeration refused because the instance is beyond toy scale.
class SizeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace appt
