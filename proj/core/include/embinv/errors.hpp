#pragma once

#include <stdexcept>
#include <string>

namespace embinv {

// Error categories mapped to CLI exit codes: config 2, data 3, network 4.
// Numeric preconditions deeper in the library throw std::invalid_argument;
// the pipeline layer rewraps them when they originate from user-supplied data.

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NetworkError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace embinv
