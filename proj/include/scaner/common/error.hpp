#pragma once

#include <stdexcept>
#include <string>

namespace scaner {

// Base error for every failure the pipeline reports to callers. Messages are
// meant to be shown to the user as-is.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files (bad JSON, missing fields, dangling ids).
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid arguments or configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace scaner
