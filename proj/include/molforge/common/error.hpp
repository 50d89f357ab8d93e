#pragma once

#include <stdexcept>
#include <string>

namespace molforge {

// Base class for every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (files, records, molecules).
class DataError : public Error {
 public:
  using Error::Error;
};

// A caller violated an operation's precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

}  // namespace molforge
