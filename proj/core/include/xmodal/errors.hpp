#ifndef XMODAL_ERRORS_HPP
#define XMODAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace xmodal {

/// Bad shapes, bad arguments or an invalid configuration.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation produced (or was handed) a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// A feature or model file could not be read or written.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace xmodal

#endif  // XMODAL_ERRORS_HPP
