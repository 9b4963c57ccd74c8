#ifndef MEDXAI_ERRORS_HPP
#define MEDXAI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace medxai {

// Base of every error the library throws. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or layer shapes that do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid arguments or configuration (bad flags, out-of-range indices).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unreadable, malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Divergence, singular systems, non-finite results.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace medxai

#endif  // MEDXAI_ERRORS_HPP
