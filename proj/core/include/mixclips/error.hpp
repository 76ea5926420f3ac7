#pragma once

#include <stdexcept>
#include <string>

namespace mixclips {

enum class ErrorKind {
  invalid_parameter,
  not_positive_definite,
  data,
  contract,
  numerical,
  config,
  empty_stratum,
  io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` drives the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// CLI exit code for an error kind: 2 config, 3 data, 4 numerical.
int exit_code(ErrorKind kind) noexcept;

}  // namespace mixclips
