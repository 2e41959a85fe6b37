#pragma once

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hviheat {

// Parse failure with a 1-based column into the offending text. Config-file
// parsing re-maps the column onto the enclosing file line.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, int column)
      : std::runtime_error(msg), column_(column) {}
  int column() const { return column_; }

private:
  int column_;
};

// Dense univariate polynomial; coeffs[k] multiplies x^k.
struct Polynomial {
  std::vector<double> coeffs;

  double eval(double x) const;
  Polynomial antiderivative() const;  // constant of integration 0
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

// Immutable arithmetic expression over a fixed list of named variables.
// Grammar: + - * / ^ (right assoc), unary minus, parentheses, numeric
// literals, pi, e, and the functions sin, cos, exp, tanh, abs, sign.
class Expr {
public:
  Expr() = default;

  static Expr parse(std::string_view text, std::span<const std::string_view> variables);

  double eval(std::span<const double> args) const;
  double eval1(double x) const { return eval(std::span<const double>(&x, 1)); }

  // Exact polynomial form when the expression uses only + - * /-by-constant
  // and nonnegative integer powers of a single variable.
  std::optional<Polynomial> as_polynomial() const;

  bool empty() const { return root_ == nullptr; }
  const std::string& source() const { return source_; }

  struct Node;

private:
  std::shared_ptr<const Node> root_;
  std::string source_;
  size_t nvars_ = 0;
};

}  // namespace hviheat
