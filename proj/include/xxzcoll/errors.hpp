#pragma once

#include <stdexcept>
#include <string>

namespace xxzcoll {

// Invalid argument to an operation (out-of-range site, bad popcount, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A requested size exceeds what the dense code path is willing to allocate.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// A function was called outside its documented domain (e.g. IPR with q != 1).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Linear algebra failed to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration problem; `key()` is the dotted key path ("noise.rc").
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace xxzcoll
