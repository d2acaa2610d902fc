#pragma once

#include <stdexcept>
#include <string>

namespace sve {

enum class ErrorKind {
  domain,
  invalid_parameter,
  missing_derivative,
  quadrature_failure,
  incompatible_grid,
  non_finite,
  not_convolution,
  degenerate,
  insufficient_paths,
  missing_aux,
  identical_config,
  construction_failure,
  root_not_bracketed,
  divergence_audit,
  syntax,
  validation,
  io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace sve
