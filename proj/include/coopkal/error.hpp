#pragma once

#include <stdexcept>
#include <string>

namespace coopkal {

// Error categories follow the CLI exit codes.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated preconditions (bad shapes, asymmetric input, invalid parameters).
class ContractError : public std::invalid_argument {
public:
  explicit ContractError(const std::string& msg) : std::invalid_argument(msg) {}
};

}  // namespace coopkal
