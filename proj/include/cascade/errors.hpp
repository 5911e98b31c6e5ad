#pragma once

#include <stdexcept>
#include <string>

namespace cascade {

// Error categories map onto the CLI exit codes: usage -> 1, data -> 2,
// numeric -> 3. Anything else escaping to main is treated as a data error.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller broke a contract: bad arguments, config invariant violations,
// backward() before a forward pass, mismatched shapes.
class UsageError : public Error {
public:
  explicit UsageError(const std::string& msg) : Error(msg) {}
};

// Input data is unusable: parse failures, bad magic/version, truncated
// files, unresolvable ids.
class DataError : public Error {
public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// A computation produced a non-finite value.
class NumericError : public Error {
public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

} // namespace cascade
