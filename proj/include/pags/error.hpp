#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pags {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Lexical or grammatical error in `.pgs`, formula, distribution or relation text.
class ParseError : public Error
{
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message), _line(line), _column(column)
    {
    }

    [[nodiscard]] std::size_t line() const { return _line; }
    [[nodiscard]] std::size_t column() const { return _column; }

private:
    std::size_t _line;
    std::size_t _column;
};

/// Semantic error: unknown identifiers, duplicate declarations, invalid tables.
class ModelError : public Error
{
public:
    using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error
{
public:
    using Error::Error;
};

/// A brute-force oracle hit its enumeration budget or numeric range.
class OracleBudgetExceeded : public Error
{
public:
    using Error::Error;
};

} // namespace pags
