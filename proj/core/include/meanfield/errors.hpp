#pragma once

#include <stdexcept>
#include <string>

namespace mf {

/// Invalid parameters or configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A state or operator would exceed the configured entry budget (exit code 3).
class MemoryGuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Norm drift, NaN, or blow-up detected during time stepping (exit code 4).
class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reading or writing persisted results failed (exit code 5).
class PersistenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mf
