#pragma once

#include <stdexcept>
#include <string>

namespace belljump {

/// Input that violates a documented invariant. `path()` locates the
/// offending entry, e.g. "$.povm[2].matrix[5]" or "hamiltonian(0,1)".
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Adaptive quadrature exhausted its evaluation budget.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(double lo, double hi, const std::string& message)
      : std::runtime_error(message), lo_(lo), hi_(hi) {}

  double worst_lo() const noexcept { return lo_; }
  double worst_hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

/// Adaptive time stepping could not proceed (step size underflow).
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(double time, std::string label, const std::string& message)
      : std::runtime_error(message), time_(time), label_(std::move(label)) {}

  double time() const noexcept { return time_; }
  const std::string& label() const noexcept { return label_; }

 private:
  double time_;
  std::string label_;
};

/// A numerical routine failed in a way its preconditions should rule out.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace belljump
