#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "cvlab/error.hpp"
#include "cvlab/families.hpp"
#include "cvlab/metric.hpp"
#include "doctest.h"

using namespace cvlab;

namespace {

GeneratorProfile xi_expr(const char* src) {
  return GeneratorProfile::closed_form(ProfileKind::Xi, parse_expression(src));
}

const double kRadii[] = {1e-6, 1e-3, 0.1, 0.5, 1.0, 3.7, 42.0, 1e3, 1e5, 1e7};

}  // namespace

TEST_CASE("flat model") {
  const auto m = build_metric(xi_expr("0"), 2);
  CHECK(m.classification().cls == MetricClass::Flat);
  for (double r : kRadii) {
    const auto p = m.at_r(r);
    CHECK(p.h == 1.0);
    CHECK(p.f == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.v == doctest::Approx(r).epsilon(1e-13));
    CHECK(p.s == doctest::Approx(std::sqrt(r)).epsilon(1e-13));
  }
  CHECK(completeness_check(m));
}

TEST_CASE("rational xi has closed-form h and f") {
  for (double a : {0.25, 0.5, 0.75}) {
    const auto m = build_metric(polynomial_xi(a), 2);
    for (double r : kRadii) {
      const auto p = m.at_r(r);
      const double h = std::pow(1.0 + r, -a);
      const double v = std::expm1((1.0 - a) * std::log1p(r)) / (1.0 - a);
      INFO("a=" << a << " r=" << r);
      CHECK(p.h == doctest::Approx(h).epsilon(1e-12));
      CHECK(p.v == doctest::Approx(v).epsilon(1e-12));
      CHECK(p.xi == doctest::Approx(a * r / (1 + r)).epsilon(1e-14));
      CHECK(p.w == doctest::Approx(v - r * h).epsilon(1e-9));
    }
  }
  const auto m1 = build_metric(polynomial_xi(1.0), 2);
  for (double r : kRadii) CHECK(m1.at_r(r).v == doctest::Approx(std::log1p(r)).epsilon(1e-12));
}

TEST_CASE("distance agrees with an independent quadrature") {
  const auto m = build_metric(polynomial_xi(0.5), 3);
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double r : {0.01, 1.0, 50.0, 1e4}) {
    // s = int_0^r sqrt(h)/(2 sqrt(t)) dt with t = u^2.
    const double ref = ts.integrate([](double u) { return std::pow(1.0 + u * u, -0.25); }, 0.0, std::sqrt(r));
    CHECK(m.at_r(r).s == doctest::Approx(ref).epsilon(1e-11));
  }
}

TEST_CASE("xi_to_h and h_to_f") {
  std::vector<double> grid{0.0};
  for (int i = 0; i <= 300; ++i) grid.push_back(std::pow(10.0, -6.0 + 12.0 * i / 300.0));

  const auto flat = xi_to_h(xi_expr("0"), 1.0, grid);
  for (double h : flat.value) CHECK(h == 1.0);

  const auto h = xi_to_h(xi_expr("t/(1+t)"), 2.0, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(h.value[i] == doctest::Approx(2.0 / (1.0 + grid[i])).epsilon(1e-11));

  // -r h'/h reproduces xi, by differences on the log grid.
  for (std::size_t i = 2; i + 2 < grid.size(); ++i) {
    const double dl = std::log(grid[i + 1] / grid[i]);
    const double dlogh = (-std::log(h.value[i + 2]) + 8 * std::log(h.value[i + 1]) - 8 * std::log(h.value[i - 1]) +
                          std::log(h.value[i - 2])) /
                         (12 * dl);
    const double xi = grid[i] / (1 + grid[i]);
    CHECK(-dlogh == doctest::Approx(xi).epsilon(1e-6));
  }

  const auto f = h_to_f([](double r) { return 1.0 / (1.0 + r); }, grid);
  CHECK(f.value[0] == 1.0);
  for (std::size_t i = 1; i < grid.size(); ++i)
    CHECK(f.value[i] == doctest::Approx(std::log1p(grid[i]) / grid[i]).epsilon(1e-11));

  std::vector<double> fine{0.0};
  for (int i = 0; i <= 4000; ++i) fine.push_back(std::pow(10.0, -6.0 + 10.0 * i / 4000.0));
  Tabulated ht{fine, {}};
  for (double r : fine) ht.value.push_back(1.0 / (1.0 + r));
  const auto ft = h_to_f(ht);
  for (std::size_t i = 1; i < fine.size(); i += 37)
    CHECK(ft.value[i] == doctest::Approx(std::log1p(fine[i]) / fine[i]).epsilon(1e-6));
}

TEST_CASE("xi and F' convert into each other") {
  CHECK(fprime_from_xi(0.0) == 0.0);
  CHECK(fprime_from_xi(0.5) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(std::isinf(fprime_from_xi(1.0)));
  CHECK(xi_from_fprime(0.0) == 0.0);
  CHECK(xi_from_fprime(std::sqrt(3.0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(xi_from_fprime(INFINITY) == 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double xi = i / 1000.0;
    const double fp = fprime_from_xi(xi);
    CHECK(std::abs(xi_from_fprime(fp) - xi) <= 1e-12);
    CHECK(1.0 + fp * fp == doctest::Approx(1.0 / ((1 - xi) * (1 - xi))).epsilon(1e-12));
  }
  for (double fp : {1e-8, 0.3, 2.0, 1e3, 1e8}) CHECK(fprime_from_xi(xi_from_fprime(fp)) == doctest::Approx(fp).epsilon(1e-7));
}

TEST_CASE("x is nondecreasing and dx/dr matches (1-xi) sqrt(h/4r)") {
  for (const char* src : {"t/(1+t)", "0.5*(1-exp(-t))", "0.9*t^2/(1+t^2)"}) {
    const auto m = build_metric(xi_expr(src), 2);
    double prev = -1.0;
    for (const auto& p : m.grid_points()) {
      CHECK(p.x >= prev);
      prev = p.x;
      CHECK(p.h > 0.0);
      CHECK(p.f > 0.0);
    }
    for (double r : {0.01, 0.3, 2.0, 70.0, 5e3}) {
      const double e = 1e-5 * r;
      const double d = (m.at_r(r + e).x - m.at_r(r - e).x) / (2 * e);
      const auto p = m.at_r(r);
      CHECK(d == doctest::Approx((1 - p.xi) * std::sqrt(p.h / (4 * r))).epsilon(1e-6));
    }
    const auto o = m.at_r(0.0);
    CHECK(o.h == o.f);
  }
}

TEST_CASE("S3 ramp: rh constant and rf logarithmic past r0") {
  const auto m = s3_metric(2, 1.0);
  const auto& c = m.classification();
  REQUIRE(c.cls == MetricClass::S3);
  CHECK(c.r0 <= 1.0);
  CHECK(c.r0 >= 0.99);
  CHECK(c.volume_growth == VolumeGrowth::HalfEuclidean);
  const auto at1 = m.at_r(1.0);
  const double x0sq = at1.r * at1.h;
  CHECK(c.x0 * c.x0 == doctest::Approx(x0sq).epsilon(1e-12));
  for (double r : {1.0, 2.0, 10.0, 1e3, 1e6, 1e12, 1e100}) {
    const auto p = m.at_r(r);
    CHECK(p.r * p.h == doctest::Approx(x0sq).epsilon(1e-12));
    CHECK(p.v == doctest::Approx(x0sq * std::log(r) + at1.v).epsilon(1e-8));
  }
}

TEST_CASE("classification") {
  CHECK(build_metric(xi_expr("0"), 2).classification().cls == MetricClass::Flat);
  const auto s1 = build_metric(xi_expr("t/(2*(1+t))"), 2).classification();
  CHECK(s1.cls == MetricClass::S1);
  CHECK(s1.xi_infinity == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(s1.volume_growth == VolumeGrowth::Euclidean);
  const auto s2 = build_metric(xi_expr("t/(1+t)"), 2).classification();
  CHECK(s2.cls == MetricClass::S2);
  CHECK(s2.volume_growth == VolumeGrowth::SubEuclidean);
  CHECK(std::isinf(s2.r0));
  CHECK(s2.x0 == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(s3_metric(3, 2.0).classification().cls == MetricClass::S3);
  CHECK(build_metric(polynomial_xi(0.5, XiShape::Exponential), 2).classification().cls == MetricClass::S1);

  for (const char* src : {"0", "t/(2*(1+t))", "t/(1+t)"}) {
    BuildOptions o;
    o.grid_size = 8192;
    CHECK(build_metric(xi_expr(src), 2).classification().cls == build_metric(xi_expr(src), 2, o).classification().cls);
  }
}

TEST_CASE("x-domain models built from F''") {
  const auto m = build_metric(GeneratorProfile::closed_form(ProfileKind::Fpp, parse_expression("exp(-t)")), 2,
                              x_domain_options());
  CHECK_FALSE(m.r_domain());
  CHECK(m.classification().cls == MetricClass::S1);
  CHECK(m.classification().xi_infinity == doctest::Approx(xi_from_fprime(1.0)).epsilon(1e-6));
  for (double x : {1e-3, 0.5, 2.0, 10.0, 1e3}) {
    const auto p = m.at_x(x);
    CHECK(p.fprime == doctest::Approx(-std::expm1(-x)).epsilon(1e-12));
    CHECK(p.x == doctest::Approx(x).epsilon(1e-14));
    CHECK(p.x * p.x == doctest::Approx(p.r * p.h).epsilon(1e-12));
    CHECK(p.s == doctest::Approx(m.at_s(p.s).s).epsilon(1e-12));
  }
}

TEST_CASE("kind h and completeness") {
  const auto good = build_metric(GeneratorProfile::closed_form(ProfileKind::H, parse_expression("1/sqrt(1+t)")), 2);
  CHECK(good.classification().xi_infinity == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(completeness_check(good));
  CHECK(good.at_r(3.0).v == doctest::Approx(2.0).epsilon(1e-12));

  const auto steep = GeneratorProfile::closed_form(ProfileKind::H, parse_expression("(1+t)^(-1.2)"));
  CHECK_FALSE(validate_profile(steep).ok);
  CHECK_THROWS_AS(build_metric(steep, 2), ModelError);
  BuildOptions o;
  o.validate = false;
  CHECK_THROWS_AS(build_metric(steep, 2, o), ModelError);
  o.require_complete = false;
  const auto m = build_metric(steep, 2, o);
  CHECK(m.classification().xi_infinity == doctest::Approx(1.2).epsilon(1e-6));
  CHECK_FALSE(completeness_check(m));
}

TEST_CASE("input checks") {
  CHECK_THROWS_AS(build_metric(xi_expr("0"), 1), ModelError);
  CHECK_THROWS_AS(build_metric(xi_expr("2*t/(1+t)"), 2), ModelError);
  const auto m = build_metric(xi_expr("t/(1+t)"), 2);
  CHECK_THROWS_AS(m.at_r(1e9), ModelError);
  CHECK_THROWS_AS(m.at_r(-1.0), ModelError);
}

TEST_CASE("serial and parallel builds are bitwise identical") {
  BuildOptions serial, parallel;
  serial.policy = ExecPolicy::Serial;
  parallel.policy = ExecPolicy::Parallel;
  const auto a = yau_counterexample(3, 2, 64, [&] { auto o = x_domain_options(); o.policy = ExecPolicy::Serial; return o; }());
  const auto b = yau_counterexample(3, 2, 64, x_domain_options());
  const auto pa = a.node_points(), pb = b.node_points();
  REQUIRE(pa.size() == pb.size());
  bool same = true;
  for (std::size_t i = 0; i < pa.size(); ++i)
    same = same && pa[i].s == pb[i].s && pa[i].v == pb[i].v && pa[i].w == pb[i].w && pa[i].fprime == pb[i].fprime;
  CHECK(same);
  const auto c = build_metric(polynomial_xi(0.5), 3, serial), d = build_metric(polynomial_xi(0.5), 3, parallel);
  CHECK(c.to_json().dump() == d.to_json().dump());
}

TEST_CASE("json export") {
  const auto m = build_metric(polynomial_xi(0.5), 2);
  const auto j = m.to_json();
  CHECK(j["schema"] == 1);
  CHECK(j["n"] == 2);
  CHECK(j["classification"]["class"] == "S1");
}
