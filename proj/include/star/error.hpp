// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace star {

/// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorKind {
  usage,    // bad arguments or configuration
  data,     // malformed or missing input data
  runtime,  // anything else
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error usage_error(const std::string& what) { return {ErrorKind::usage, what}; }
inline Error data_error(const std::string& what) { return {ErrorKind::data, what}; }
inline Error runtime_error(const std::string& what) { return {ErrorKind::runtime, what}; }

}  // namespace star
