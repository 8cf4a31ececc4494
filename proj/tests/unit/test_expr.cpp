#include <cmath>
#include <random>

#include "cvlab/error.hpp"
#include "cvlab/expr.hpp"
#include "doctest.h"

using namespace cvlab;
using Op = ExprAst::Op;

TEST_CASE("parse builds the expected tree") {
  const auto e = parse_expression("t/(1+t)");
  CHECK(e.op() == Op::Div);
  CHECK(e.lhs().op() == Op::Variable);
  CHECK(e.rhs().op() == Op::Add);
  CHECK(e.rhs().lhs().constant_value() == 1.0);
  CHECK(e.rhs().rhs().op() == Op::Variable);

  const auto g = parse_expression("0.5*(1 - exp(-t))");
  CHECK(g.op() == Op::Mul);
  CHECK(g.lhs().constant_value() == 0.5);
  CHECK(g.rhs().op() == Op::Sub);
  CHECK(g.rhs().rhs().op() == Op::Exp);
  CHECK(g.rhs().rhs().lhs().op() == Op::Neg);
}

TEST_CASE("precedence and associativity") {
  CHECK(evaluate(parse_expression("2+3*4"), 0) == 14.0);
  CHECK(evaluate(parse_expression("2^3^2"), 0) == 512.0);
  CHECK(evaluate(parse_expression("-2^2"), 0) == -4.0);
  CHECK(evaluate(parse_expression("8/4/2"), 0) == 1.0);
  CHECK(evaluate(parse_expression("10-4-3"), 0) == 3.0);
  CHECK(evaluate(parse_expression(" t * t "), 3) == 9.0);
  CHECK(evaluate(parse_expression("min1(t)"), 3) == 1.0);
  CHECK(evaluate(parse_expression("min1(t)"), 0.25) == 0.25);
  CHECK(evaluate(parse_expression("1.5e2"), 0) == 150.0);
}

TEST_CASE("syntax errors carry byte offsets") {
  try {
    parse_expression("t/(");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseError::Kind::Syntax);
    CHECK(e.offset() == 3);
  }
  try {
    parse_expression("1 + foo(t)");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseError::Kind::UnknownIdentifier);
    CHECK(e.offset() == 4);
  }
  try {
    parse_expression("exp(t, 2)");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseError::Kind::Arity);
  }
  CHECK_THROWS_AS(parse_expression(""), ParseError);
  CHECK_THROWS_AS(parse_expression("t t"), ParseError);
  CHECK_THROWS_AS(parse_expression("x"), ParseError);
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(evaluate(parse_expression("ln(t)"), 0.0), DomainError);
  CHECK_THROWS_AS(evaluate(parse_expression("sqrt(t)"), -1.0), DomainError);
  CHECK_THROWS_AS(evaluate(parse_expression("1/t"), 0.0), DomainError);
  CHECK_THROWS_AS(evaluate(parse_expression("exp(t)"), 1000.0), DomainError);
}

namespace {

ExprAst random_ast(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 11);
  const int k = depth <= 0 ? pick(rng) % 2 : pick(rng);
  switch (k) {
    case 0: {
      std::uniform_real_distribution<double> u(0.0, 100.0);
      std::uniform_int_distribution<int> style(0, 2);
      const int s = style(rng);
      if (s == 0) return ExprAst::constant(std::floor(u(rng)));
      if (s == 1) return ExprAst::constant(u(rng) * 1e-7);
      return ExprAst::constant(u(rng));
    }
    case 1: return ExprAst::variable();
    case 2: return ExprAst::unary(Op::Neg, random_ast(rng, depth - 1));
    case 3: return ExprAst::unary(Op::Exp, random_ast(rng, depth - 1));
    case 4: return ExprAst::unary(Op::Ln, random_ast(rng, depth - 1));
    case 5: return ExprAst::unary(Op::Sqrt, random_ast(rng, depth - 1));
    case 6: return ExprAst::unary(Op::Min1, random_ast(rng, depth - 1));
    case 7: return ExprAst::binary(Op::Add, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
    case 8: return ExprAst::binary(Op::Sub, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
    case 9: return ExprAst::binary(Op::Mul, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
    case 10: return ExprAst::binary(Op::Div, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
    default: return ExprAst::binary(Op::Pow, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
  }
}

}  // namespace

TEST_CASE("print then parse is the identity on 1000 random trees") {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> depth(0, 8);
  for (int i = 0; i < 1000; ++i) {
    const ExprAst e = random_ast(rng, depth(rng));
    REQUIRE(e.depth() <= 9);
    const std::string printed = to_string(e);
    INFO(printed);
    CHECK(parse_expression(printed) == e);
  }
}

TEST_CASE("jets agree with finite differences") {
  const char* exprs[] = {"t/(1+t)", "0.5*(1-exp(-t))", "sqrt(1+t^2)", "ln(1+t)*t", "t^2.5", "(1+t)^(-0.5)",
                         "exp(-t)*t^3", "min1(t)*t"};
  for (const char* src : exprs) {
    const auto e = parse_expression(src);
    for (double t : {0.3, 0.7, 1.9, 4.2}) {
      const Jet j = evaluate_jet(e, t);
      const double h = 1e-4 * std::max(1.0, t);
      const double fp = evaluate(e, t + h), fm = evaluate(e, t - h), f0 = evaluate(e, t);
      INFO(src << " at " << t);
      CHECK(j.value == doctest::Approx(f0).epsilon(1e-15));
      CHECK(j.d1 == doctest::Approx((fp - fm) / (2 * h)).epsilon(1e-6));
      CHECK(j.d2 == doctest::Approx((fp - 2 * f0 + fm) / (h * h)).epsilon(1e-4));
    }
  }
}
