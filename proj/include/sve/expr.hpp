#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace sve {

/// A compiled arithmetic expression over the variables t and x.
///
/// Grammar (lowest to highest precedence):
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('+' | '-') unary | power
///   power   := primary ('^' unary)?            right-associative
///   primary := number | 't' | 'x' | '(' expr ')' | func '(' expr (',' expr)? ')'
/// Functions: abs, sqrt, exp, sin (one argument); min, max (two arguments).
/// The UTF-8 signs × and ÷ are accepted for '*' and '/'.
class Expression {
 public:
  /// Throws Error(ErrorKind::syntax) with the 1-based column of the offending token.
  /// The variable names can be changed, e.g. to (s, t) for kernels.
  static Expression parse(std::string_view text, std::string_view first = "t", std::string_view second = "x");

  /// Evaluates with the first variable bound to `t` and the second to `x`.
  double operator()(double t, double x) const;
  const std::string& source() const noexcept { return source_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
};

}  // namespace sve
