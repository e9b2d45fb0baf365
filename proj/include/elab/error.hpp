#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace elab {

/// Invalid argument to a pure operation (negative distance, non-unit axis,
/// dimension mismatch, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid configuration value. `key` names the offending entry when known.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& message, std::string key = {})
        : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Malformed input data. `line` is 1-based, 0 when not tied to a line.
class DataError : public std::runtime_error {
public:
    DataError(const std::string& message, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Analysis precondition not met (empty extreme group, rank-deficient design, ...).
class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace elab
