#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cavcool {

// Base for every failure the simulator reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

// Fock truncation cannot hold the requested state.
class TruncationError : public Error {
 public:
  using Error::Error;
};

// A density matrix acquired an eigenvalue below the positivity floor.
class PositivityError : public Error {
 public:
  using Error::Error;
};

// Post-selection probability vanished.
class DegenerateSelection : public Error {
 public:
  using Error::Error;
};

// Non-fatal diagnostics collected alongside results.
struct Warning {
  std::string kind;
  std::string message;
};

using Warnings = std::vector<Warning>;

inline void emit(Warnings* sink, std::string kind, std::string message) {
  if (sink != nullptr) {
    sink->push_back({std::move(kind), std::move(message)});
  }
}

}  // namespace cavcool
