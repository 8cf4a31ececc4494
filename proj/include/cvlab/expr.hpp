#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace cvlab {

/// Value with first and second derivative, propagated in forward mode.
struct Jet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Immutable expression tree in the single variable `t`.
///
/// Grammar (whitespace-insensitive):
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?
///   primary := number | 't' | func '(' expr ')' | '(' expr ')'
///   func    := exp | ln | sqrt | min1
class ExprAst {
 public:
  enum class Op : std::uint8_t {
    Constant,
    Variable,
    Neg,
    Exp,
    Ln,
    Sqrt,
    Min1,
    Add,
    Sub,
    Mul,
    Div,
    Pow
  };

  static ExprAst constant(double value);
  static ExprAst variable();
  static ExprAst unary(Op op, ExprAst operand);
  static ExprAst binary(Op op, ExprAst lhs, ExprAst rhs);

  Op op() const;
  double constant_value() const;
  ExprAst lhs() const;
  ExprAst rhs() const;

  bool is_unary() const;
  bool is_binary() const;
  /// True when the subtree does not reference `t`.
  bool is_constant() const;
  int depth() const;

  friend bool operator==(const ExprAst& a, const ExprAst& b);

 private:
  struct Node;
  explicit ExprAst(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

ExprAst parse_expression(std::string_view src);

/// Canonical, fully parenthesised form. parse_expression(to_string(e)) == e.
std::string to_string(const ExprAst& e);

/// Throws DomainError for ln of a nonpositive value, sqrt of a negative value,
/// division by zero and non-finite results.
double evaluate(const ExprAst& e, double t);
Jet evaluate_jet(const ExprAst& e, double t);

const char* op_name(ExprAst::Op op);

}  // namespace cvlab
