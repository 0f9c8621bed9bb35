#pragma once

#include <stdexcept>
#include <string>

namespace hanforge {

// Shape disagreement between tensors/operands. Message names both shapes.
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Input outside an operation's domain (empty sequence, rate >= 1, ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

// Token id or position outside a valid range.
class IndexError : public std::out_of_range {
public:
    explicit IndexError(const std::string& msg) : std::out_of_range(msg) {}
};

// Backward pass invoked without a cached forward pass.
class StateError : public std::logic_error {
public:
    explicit StateError(const std::string& msg) : std::logic_error(msg) {}
};

// Model/CLI configuration inconsistent with the requested operation.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Malformed input file. Carries a 1-based line (or record) number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, long line = -1)
        : std::runtime_error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// Record-level contract violation (bad label, empty article, ...).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failed write or other environment-side runtime failure.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hanforge
