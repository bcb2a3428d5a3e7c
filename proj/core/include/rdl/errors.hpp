#pragma once

#include <stdexcept>
#include <string>

namespace rdl {

// Bad configuration or arguments supplied by the caller (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or unusable input data: WAV files, checkpoints, corpora (CLI exit code 3).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A tensor operation produced NaN or Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rdl
