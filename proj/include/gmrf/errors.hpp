#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gmrf {

/// Thrown when a Cholesky pivot falls at or below the positivity threshold.
class NotPositiveDefinite : public std::runtime_error {
public:
    NotPositiveDefinite(std::size_t pivot, double value)
        : std::runtime_error("matrix is not positive definite: pivot " + std::to_string(pivot) +
                             " has value " + std::to_string(value)),
          pivot_(pivot) {}

    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

class SingularFactor : public std::runtime_error {
public:
    explicit SingularFactor(std::size_t row)
        : std::runtime_error("triangular factor has zero diagonal at row " + std::to_string(row)),
          row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// Statistic is undefined because the input has zero variance.
class UndefinedVariance : public std::domain_error {
public:
    explicit UndefinedVariance(const std::string& what) : std::domain_error(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed text input; carries the 1-based line number where parsing failed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& msg)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + msg), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace gmrf
