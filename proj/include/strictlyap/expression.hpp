/**
 * @file expression.hpp
 * @brief Closed-form scalar expressions for user-supplied systems.
 *
 * Grammar (version 1):
 *
 *   expr    := term (('+' | '-') term)*
 *   term    := unary (('*' | '/') unary)*
 *   unary   := ('+' | '-') unary | power
 *   power   := primary ('^' unary)?          right associative
 *   primary := number | name | func '(' expr ')' | '(' expr ')'
 *   func    := sin | cos | tanh | atan | exp | ln | abs
 *
 * Names are resolved against a variable list fixed at compile time; `pi` is a
 * constant. State components may be written x1 or x_1.
 */
#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace strictlyap {

inline constexpr int kExpressionGrammarVersion = 1;

class ExpressionError : public std::invalid_argument {
 public:
  ExpressionError(const std::string& message, std::size_t position);
  [[nodiscard]] std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class Expression {
 public:
  /// Parses `source`; variables are referenced by their index in `variables`.
  Expression(const std::string& source, const std::vector<std::string>& variables);

  [[nodiscard]] double operator()(std::span<const double> values) const;
  [[nodiscard]] const std::string& source() const { return source_; }

  struct Node;

 private:
  std::string source_;
  std::size_t n_vars_ = 0;
  std::shared_ptr<const Node> root_;
};

/// Variable names x1..xn, t, tau (in that order) for dynamics expressions.
[[nodiscard]] std::vector<std::string> state_variables(int dim, bool with_tau);

}  // namespace strictlyap
