// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ibpm {

// Base class for domain errors. `kind()` is a short machine-readable tag the
// CLI prints as the error prefix.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error("invalid-argument", message) {}
};

class InvalidGraph : public Error {
 public:
  explicit InvalidGraph(const std::string& message)
      : Error("invalid-graph", message) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message)
      : Error("format", message) {}
};

}  // namespace ibpm
