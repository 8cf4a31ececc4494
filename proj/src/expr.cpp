#include "cvlab/expr.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <charconv>
#include <cmath>
#include <limits>

#include "cvlab/error.hpp"
#include "cvlab/format.hpp"

namespace cvlab {

struct ExprAst::Node {
  Op op = Op::Constant;
  double value = 0.0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
  bool constant = true;
  int depth = 1;
};

namespace {

bool unary_op(ExprAst::Op op) {
  using Op = ExprAst::Op;
  return op == Op::Neg || op == Op::Exp || op == Op::Ln || op == Op::Sqrt || op == Op::Min1;
}

bool binary_op(ExprAst::Op op) {
  using Op = ExprAst::Op;
  return op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div || op == Op::Pow;
}

}  // namespace

ExprAst ExprAst::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::Constant;
  n->value = value;
  return ExprAst(std::move(n));
}

ExprAst ExprAst::variable() {
  auto n = std::make_shared<Node>();
  n->op = Op::Variable;
  n->constant = false;
  return ExprAst(std::move(n));
}

ExprAst ExprAst::unary(Op op, ExprAst operand) {
  if (!unary_op(op)) throw Error("ExprAst::unary: not a unary operator");
  auto n = std::make_shared<Node>();
  n->op = op;
  n->constant = operand.node_->constant;
  n->depth = operand.node_->depth + 1;
  n->lhs = std::move(operand.node_);
  return ExprAst(std::move(n));
}

ExprAst ExprAst::binary(Op op, ExprAst lhs, ExprAst rhs) {
  if (!binary_op(op)) throw Error("ExprAst::binary: not a binary operator");
  auto n = std::make_shared<Node>();
  n->op = op;
  n->constant = lhs.node_->constant && rhs.node_->constant;
  n->depth = std::max(lhs.node_->depth, rhs.node_->depth) + 1;
  n->lhs = std::move(lhs.node_);
  n->rhs = std::move(rhs.node_);
  return ExprAst(std::move(n));
}

ExprAst::Op ExprAst::op() const { return node_->op; }
double ExprAst::constant_value() const { return node_->value; }
ExprAst ExprAst::lhs() const { return ExprAst(node_->lhs); }
ExprAst ExprAst::rhs() const { return ExprAst(node_->rhs); }
bool ExprAst::is_unary() const { return unary_op(node_->op); }
bool ExprAst::is_binary() const { return binary_op(node_->op); }
bool ExprAst::is_constant() const { return node_->constant; }
int ExprAst::depth() const { return node_->depth; }

namespace {

bool nodes_equal(const ExprAst& a, const ExprAst& b) {
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case ExprAst::Op::Constant:
      // Bitwise comparison so that the round trip is exact, not approximate.
      return std::bit_cast<std::uint64_t>(a.constant_value()) ==
             std::bit_cast<std::uint64_t>(b.constant_value());
    case ExprAst::Op::Variable:
      return true;
    default:
      break;
  }
  if (!nodes_equal(a.lhs(), b.lhs())) return false;
  return !a.is_binary() || nodes_equal(a.rhs(), b.rhs());
}

}  // namespace

bool operator==(const ExprAst& a, const ExprAst& b) {
  if (a.node_ == b.node_) return true;
  return nodes_equal(a, b);
}

const char* op_name(ExprAst::Op op) {
  switch (op) {
    case ExprAst::Op::Constant: return "const";
    case ExprAst::Op::Variable: return "t";
    case ExprAst::Op::Neg: return "neg";
    case ExprAst::Op::Exp: return "exp";
    case ExprAst::Op::Ln: return "ln";
    case ExprAst::Op::Sqrt: return "sqrt";
    case ExprAst::Op::Min1: return "min1";
    case ExprAst::Op::Add: return "+";
    case ExprAst::Op::Sub: return "-";
    case ExprAst::Op::Mul: return "*";
    case ExprAst::Op::Div: return "/";
    case ExprAst::Op::Pow: return "^";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  ExprAst parse() {
    skip_ws();
    if (pos_ == src_.size()) syntax("empty expression");
    ExprAst e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) syntax("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void syntax(const std::string& msg) const {
    throw ParseError(ParseError::Kind::Syntax, pos_, "syntax error: " + msg);
  }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                  src_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ == src_.size()) syntax(std::string("expected '") + c + "' but input ended");
      syntax(std::string("expected '") + c + "'");
    }
  }

  ExprAst parse_expr() {
    ExprAst lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = ExprAst::binary(ExprAst::Op::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = ExprAst::binary(ExprAst::Op::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  ExprAst parse_term() {
    ExprAst lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = ExprAst::binary(ExprAst::Op::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = ExprAst::binary(ExprAst::Op::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  ExprAst parse_unary() {
    if (accept('-')) return ExprAst::unary(ExprAst::Op::Neg, parse_unary());
    return parse_power();
  }

  ExprAst parse_power() {
    ExprAst base = parse_primary();
    if (accept('^')) return ExprAst::binary(ExprAst::Op::Pow, base, parse_unary());
    return base;
  }

  ExprAst parse_primary() {
    skip_ws();
    if (pos_ == src_.size()) syntax("expected an operand but input ended");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      ExprAst inner = parse_expr();
      expect(')');
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    syntax(std::string("unexpected character '") + c + "'");
  }

  ExprAst parse_number() {
    const std::size_t start = pos_;
    double value = 0.0;
    auto [end, ec] = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), value);
    if (ec != std::errc() || end == src_.data() + pos_) {
      pos_ = start;
      syntax("malformed number");
    }
    pos_ = static_cast<std::size_t>(end - src_.data());
    return ExprAst::constant(value);
  }

  ExprAst parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "t") return ExprAst::variable();

    ExprAst::Op op;
    if (name == "exp") {
      op = ExprAst::Op::Exp;
    } else if (name == "ln") {
      op = ExprAst::Op::Ln;
    } else if (name == "sqrt") {
      op = ExprAst::Op::Sqrt;
    } else if (name == "min1") {
      op = ExprAst::Op::Min1;
    } else {
      throw ParseError(ParseError::Kind::UnknownIdentifier, start,
                       "unknown identifier '" + std::string(name) + "'");
    }
    expect('(');
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == ')')
      throw ParseError(ParseError::Kind::Arity, pos_,
                       std::string(name) + " expects 1 argument, got 0");
    ExprAst arg = parse_expr();
    int count = 1;
    while (accept(',')) {
      parse_expr();
      ++count;
    }
    if (count != 1)
      throw ParseError(ParseError::Kind::Arity, start,
                       std::string(name) + " expects 1 argument, got " + std::to_string(count));
    expect(')');
    return ExprAst::unary(op, arg);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

ExprAst parse_expression(std::string_view src) { return Parser(src).parse(); }

std::string to_string(const ExprAst& e) {
  using Op = ExprAst::Op;
  switch (e.op()) {
    case Op::Constant:
      return format_double(e.constant_value());
    case Op::Variable:
      return "t";
    case Op::Neg:
      return "(-" + to_string(e.lhs()) + ")";
    case Op::Exp:
    case Op::Ln:
    case Op::Sqrt:
    case Op::Min1:
      return std::string(op_name(e.op())) + "(" + to_string(e.lhs()) + ")";
    default:
      return "(" + to_string(e.lhs()) + op_name(e.op()) + to_string(e.rhs()) + ")";
  }
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

[[noreturn]] void domain(const char* what, double t) {
  throw DomainError(std::string(what) + " at t=" + format_double(t));
}

struct DoubleOps {
  using T = double;
  static T constant(double c) { return c; }
  static T variable(double t) { return t; }
  static double val(T x) { return x; }
  static T neg(T a) { return -a; }
  static T add(T a, T b) { return a + b; }
  static T sub(T a, T b) { return a - b; }
  static T mul(T a, T b) { return a * b; }
  static T div(T a, T b) { return a / b; }
  static T exp(T a) { return std::exp(a); }
  static T ln(T a) { return std::log(a); }
  static T sqrt(T a) { return std::sqrt(a); }
  static T min1(T a) { return a < 1.0 ? a : 1.0; }
  static T pow_const(T a, double c) { return std::pow(a, c); }
  static T pow(T a, T b) { return std::pow(a, b); }
};

struct JetOps {
  using T = Jet;
  static T constant(double c) { return {c, 0.0, 0.0}; }
  static T variable(double t) { return {t, 1.0, 0.0}; }
  static double val(const T& x) { return x.value; }
  static T neg(const T& a) { return {-a.value, -a.d1, -a.d2}; }
  static T add(const T& a, const T& b) { return {a.value + b.value, a.d1 + b.d1, a.d2 + b.d2}; }
  static T sub(const T& a, const T& b) { return {a.value - b.value, a.d1 - b.d1, a.d2 - b.d2}; }
  static T mul(const T& a, const T& b) {
    return {a.value * b.value, a.d1 * b.value + a.value * b.d1,
            a.d2 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d2};
  }
  static T div(const T& a, const T& b) {
    const double q = a.value / b.value;
    const double q1 = (a.d1 - q * b.d1) / b.value;
    const double q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.value;
    return {q, q1, q2};
  }
  static T exp(const T& a) {
    const double e = std::exp(a.value);
    return {e, e * a.d1, e * (a.d2 + a.d1 * a.d1)};
  }
  static T ln(const T& a) {
    const double g = a.d1 / a.value;
    return {std::log(a.value), g, a.d2 / a.value - g * g};
  }
  static T sqrt(const T& a) {
    const double s = std::sqrt(a.value);
    if (s == 0.0) {
      const double inf = std::numeric_limits<double>::infinity();
      return {0.0, a.d1 == 0.0 ? 0.0 : inf, a.d1 == 0.0 && a.d2 == 0.0 ? 0.0 : inf};
    }
    return {s, a.d1 / (2.0 * s), a.d2 / (2.0 * s) - a.d1 * a.d1 / (4.0 * s * s * s)};
  }
  static T min1(const T& a) {
    if (a.value < 1.0) return a;
    return {1.0, 0.0, 0.0};
  }
  // a^c with constant exponent; terms whose coefficient vanishes are dropped so
  // that e.g. t^2 at t=0 has a finite jet.
  static T pow_const(const T& a, double c) {
    auto term = [&](double coef, double e, double factor) {
      if (coef == 0.0 || factor == 0.0) return 0.0;
      return coef * std::pow(a.value, e) * factor;
    };
    return {std::pow(a.value, c), term(c, c - 1.0, a.d1),
            term(c * (c - 1.0), c - 2.0, a.d1 * a.d1) + term(c, c - 1.0, a.d2)};
  }
  static T pow(const T& a, const T& b) { return exp(mul(b, ln(a))); }
};

template <class Ops>
typename Ops::T eval_node(const ExprAst& e, double t) {
  using Op = ExprAst::Op;
  using T = typename Ops::T;
  switch (e.op()) {
    case Op::Constant:
      return Ops::constant(e.constant_value());
    case Op::Variable:
      return Ops::variable(t);
    case Op::Neg:
      return Ops::neg(eval_node<Ops>(e.lhs(), t));
    case Op::Exp:
      return Ops::exp(eval_node<Ops>(e.lhs(), t));
    case Op::Ln: {
      T a = eval_node<Ops>(e.lhs(), t);
      if (!(Ops::val(a) > 0.0)) domain("ln of nonpositive value", t);
      return Ops::ln(a);
    }
    case Op::Sqrt: {
      T a = eval_node<Ops>(e.lhs(), t);
      if (Ops::val(a) < 0.0) domain("sqrt of negative value", t);
      return Ops::sqrt(a);
    }
    case Op::Min1:
      return Ops::min1(eval_node<Ops>(e.lhs(), t));
    case Op::Add:
      return Ops::add(eval_node<Ops>(e.lhs(), t), eval_node<Ops>(e.rhs(), t));
    case Op::Sub:
      return Ops::sub(eval_node<Ops>(e.lhs(), t), eval_node<Ops>(e.rhs(), t));
    case Op::Mul:
      return Ops::mul(eval_node<Ops>(e.lhs(), t), eval_node<Ops>(e.rhs(), t));
    case Op::Div: {
      T a = eval_node<Ops>(e.lhs(), t);
      T b = eval_node<Ops>(e.rhs(), t);
      if (Ops::val(b) == 0.0) domain("division by zero", t);
      return Ops::div(a, b);
    }
    case Op::Pow: {
      T a = eval_node<Ops>(e.lhs(), t);
      if (e.rhs().is_constant()) {
        const double c = evaluate(e.rhs(), t);
        const double base = Ops::val(a);
        if (base < 0.0 && c != std::floor(c)) domain("non-integer power of negative value", t);
        if (base == 0.0 && c < 0.0) domain("division by zero in power", t);
        return Ops::pow_const(a, c);
      }
      T b = eval_node<Ops>(e.rhs(), t);
      if (!(Ops::val(a) > 0.0)) domain("variable power of nonpositive value", t);
      return Ops::pow(a, b);
    }
  }
  domain("corrupt expression node", t);
}

}  // namespace

double evaluate(const ExprAst& e, double t) {
  const double v = eval_node<DoubleOps>(e, t);
  if (!std::isfinite(v)) domain("non-finite result", t);
  return v;
}

Jet evaluate_jet(const ExprAst& e, double t) {
  const Jet j = eval_node<JetOps>(e, t);
  if (!std::isfinite(j.value)) domain("non-finite result", t);
  return j;
}

}  // namespace cvlab
