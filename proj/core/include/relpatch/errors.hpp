#pragma once

#include <stdexcept>
#include <string>

namespace relpatch {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Tensor shapes do not line up for the requested operation.
class DimError : public Error {
public:
  explicit DimError(const std::string& msg) : Error(msg) {}
};

/// An index (token, label, cut position) is out of its valid range.
class IndexError : public Error {
public:
  explicit IndexError(const std::string& msg) : Error(msg) {}
};

/// An argument violates a precondition that is not a shape or index issue.
class ArgError : public Error {
public:
  explicit ArgError(const std::string& msg) : Error(msg) {}
};

/// Invalid configuration: bad plan, unknown config key, regime violation.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Numerical failure: NaN/Inf encountered, undefined normalization.
class NumericError : public Error {
public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

/// File ingestion or checkpoint load failure.
class IoError : public Error {
public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace relpatch
