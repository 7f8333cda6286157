#pragma once

#include <stdexcept>
#include <string>

namespace dragonking {

// Invalid input, configuration or data. The CLI maps these to exit code 1.
class validation_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class domain_error : public validation_error {
 public:
  using validation_error::validation_error;
};

class config_error : public validation_error {
 public:
  using validation_error::validation_error;
};

class window_error : public validation_error {
 public:
  using validation_error::validation_error;
};

class fit_error : public validation_error {
 public:
  using validation_error::validation_error;
};

// Raised when a tail model value M(x) falls outside (0,1) at a band abscissa.
class band_domain_error : public validation_error {
 public:
  band_domain_error(const std::string& what, double x)
      : validation_error(what), x_(x) {}
  double x() const noexcept { return x_; }

 private:
  double x_;
};

class io_error : public validation_error {
 public:
  using validation_error::validation_error;
};

// Iterative numerics that failed to converge. The CLI maps these to exit code 2.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dragonking
