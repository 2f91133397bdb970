// Exception hierarchy shared by all marginboost components.
#pragma once

#include <stdexcept>
#include <string>

namespace marginboost {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input data (files, labels, shapes). CLI exit code 2.
class DataError : public Error {
  public:
    explicit DataError(const std::string& what) : Error(what) {}
};

/// Numerical failure (iteration caps, unattainable solves). CLI exit code 3.
class NumericError : public Error {
  public:
    explicit NumericError(const std::string& what) : Error(what) {}
};

/// Bad configuration or usage. CLI exit code 1.
class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Model file carries an unsupported format version.
class ModelVersionError : public DataError {
  public:
    explicit ModelVersionError(const std::string& what) : DataError(what) {}
};

/// Model file is truncated or not parseable at all.
class ModelParseError : public DataError {
  public:
    explicit ModelParseError(const std::string& what) : DataError(what) {}
};

/// Model file parsed but violates the schema (shapes, ranges, invariants).
class ModelSchemaError : public DataError {
  public:
    explicit ModelSchemaError(const std::string& what) : DataError(what) {}
};

}  // namespace marginboost
