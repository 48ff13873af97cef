#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hdi {

/// Broad failure class; the CLI maps these onto exit codes 1, 2 and 3.
enum class ErrorKind { Usage, Data, Numeric };

/// Base of every exception thrown by the toolkit. `code()` is a stable
/// identifier such as "DuplicateKey" that tests and callers can match on.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message)
        : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

/// Error tied to a position in a text source (1-based line and column, 0 if unknown).
class ParseError : public Error {
public:
    ParseError(std::string code, const std::string& message, std::size_t line, std::size_t column)
        : Error(ErrorKind::Data, std::move(code), message), line_(line), column_(column) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

[[noreturn]] inline void throw_data(std::string code, const std::string& message) {
    throw Error(ErrorKind::Data, std::move(code), message);
}

[[noreturn]] inline void throw_usage(std::string code, const std::string& message) {
    throw Error(ErrorKind::Usage, std::move(code), message);
}

[[noreturn]] inline void throw_numeric(std::string code, const std::string& message) {
    throw Error(ErrorKind::Numeric, std::move(code), message);
}

}  // namespace hdi
