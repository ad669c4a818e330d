#pragma once

#include <stdexcept>
#include <string>

namespace embedgeom {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input files, ids, or configuration. The CLI maps this to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A computation that cannot proceed on the given data (e.g. zero variance).
/// The CLI maps this to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace embedgeom
