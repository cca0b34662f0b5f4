#pragma once

#include <stdexcept>
#include <string>

namespace ivikit {

/// Broad failure categories. The CLI maps each to a stable exit code.
enum class ErrorCode {
    invalid_argument = 1,
    data = 2,
    numeric = 3,
    io = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(ErrorCode::invalid_argument, what) {}
};

/// Malformed or inconsistent input data. Row and column are 1-based; 0 means "not applicable".
class DataError : public Error {
public:
    DataError(const std::string& what, std::size_t row = 0, std::string column = {})
        : Error(ErrorCode::data, format(what, row, column)), row_(row), column_(std::move(column)) {}

    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    static std::string format(const std::string& what, std::size_t row, const std::string& column) {
        std::string msg = what;
        if (row != 0) msg += " (row " + std::to_string(row);
        if (!column.empty()) msg += (row != 0 ? ", column '" : " (column '") + column + "'";
        if (row != 0 || !column.empty()) msg += ")";
        return msg;
    }

    std::size_t row_;
    std::string column_;
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorCode::numeric, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};

inline void require(bool condition, const std::string& what) {
    if (!condition) throw InvalidArgument(what);
}

}  // namespace ivikit
