#pragma once

#include <stdexcept>
#include <string>

namespace spamdet {

/// Bad configuration or command-line usage. CLI maps this to exit code 1.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

/// Unreadable, malformed, or inconsistent input data. CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Model training failure (divergence, degenerate training set). CLI maps this to exit code 3.
class TrainError : public std::runtime_error {
public:
    explicit TrainError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace spamdet
