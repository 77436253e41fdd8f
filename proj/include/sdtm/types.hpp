#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sdtm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using IntMatrix = Eigen::MatrixXi;
using Seed = std::uint64_t;

/// Raised when a time step produces non-finite or runaway values.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// A requested quantity has no closed form (e.g. exact solution of Burgers).
class NotAvailableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Combination of inputs the solver deliberately does not handle.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Bad user configuration; `key` names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace sdtm
