#include <cmath>
#include <numbers>

#include "cvlab/error.hpp"
#include "cvlab/families.hpp"
#include "cvlab/integrals.hpp"
#include "doctest.h"

using namespace cvlab;

namespace {

BallIntegralSeries synthetic(double slope, double noise = 0.0) {
  BallIntegralSeries s;
  const auto grid = log_spaced(1.0, 1e4, 64);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double wiggle = noise * ((i % 2) ? 1.0 : -1.0);
    s.rows.push_back({grid[i], 1.0, 0.0, 3.0 * std::pow(grid[i], slope) * std::exp(wiggle)});
  }
  return s;
}

}  // namespace

TEST_CASE("density one reproduces the volume") {
  for (const auto& m : {build_metric(polynomial_xi(0.5), 2), build_metric(polynomial_xi(1.0), 3),
                        s3_metric(2, 1.0), yau_counterexample(3, 2)}) {
    const BallIntegrator one(m, density::one());
    for (const double s : default_s_grid(m, 40)) {
      const double vol = volume_ball(m, s);
      CHECK(one.at_s(s) == doctest::Approx(vol).epsilon(1e-8));
    }
    CHECK(one.total() == doctest::Approx(m.c_n() * std::pow(m.v_end(), m.n())).epsilon(1e-8));
  }
}

TEST_CASE("flat metric integrals") {
  const auto m = build_metric(polynomial_xi(0.0), 3);
  for (double s : {0.5, 3.0, 100.0}) {
    CHECK(volume_ball(m, s) == doctest::Approx(m.c_n() * std::pow(s, 6)).epsilon(1e-12));
    CHECK(ball_integral(m, density::scalar(), s) == 0.0);
    CHECK(average_scalar_curvature(m, s) == 0.0);
    CHECK(distance_s(m, s * s) == doctest::Approx(s).epsilon(1e-13));
  }
  CHECK(m.c_n() == doctest::Approx(std::pow(std::numbers::pi, 3) / 6));
  const auto series = normalized_sigma_series(m, 2, default_s_grid(m));
  for (const auto& r : series.rows) CHECK(r.normalized == 0.0);
  const auto f = growth_fit(series, 0.5);
  CHECK(f.verdict == Verdict::Bounded);
  CHECK(f.slope == 0.0);
  CHECK(chern_number(m).value == 0.0);
}

TEST_CASE("series rows follow their definitions") {
  const auto m = build_metric(polynomial_xi(0.5), 3);
  const auto grid = default_s_grid(m);
  CHECK(grid.size() == 64);
  CHECK(grid.front() == doctest::Approx(m.at_r(1.0).s));
  CHECK(grid.back() == m.s_end());
  const auto s = normalized_sigma_series(m, 2, grid);
  CHECK(s.normalization_exponent == 2.0 * (3 - 2));
  REQUIRE(s.k);
  CHECK(*s.k == 2);
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const auto& r = s.rows[i];
    CHECK(r.normalized == r.integral / std::pow(r.s, s.normalization_exponent));
    if (i > 0) {
      CHECK(r.s > s.rows[i - 1].s);
      CHECK(r.vol >= s.rows[i - 1].vol);
    }
  }
  const auto csv = series_csv(s);
  CHECK(csv.rfind("s,vol,integral,normalized\n", 0) == 0);
  const auto j = series_json(s);
  CHECK(j["rows"].size() == 64);
  CHECK(j["normalization_exponent"] == 2.0);

  const auto serial = normalized_sigma_series(m, 2, grid, {1e-8, ExecPolicy::Serial});
  CHECK(series_csv(serial) == csv);
  CHECK_THROWS_AS(normalized_sigma_series(m, 4, grid), ModelError);
  CHECK_THROWS_AS(normalized_sigma_series(m, 2, {2.0, 1.0}), ModelError);
}

TEST_CASE("sigma_1 series is bounded and sigma_n grows") {
  for (int n : {2, 3}) {
    const auto m = build_metric(polynomial_xi(0.5), n);
    const auto grid = default_s_grid(m);
    const auto f1 = growth_fit(normalized_sigma_series(m, 1, grid), 0.5);
    CHECK(f1.verdict == Verdict::Bounded);
    const auto sn = normalized_sigma_series(m, n, grid);
    // nondecreasing past the first decade
    const double s10 = 10.0 * grid.front();
    for (std::size_t i = 1; i < sn.rows.size(); ++i)
      if (sn.rows[i - 1].s >= s10) CHECK(sn.rows[i].normalized >= sn.rows[i - 1].normalized);
    CHECK(sn.rows.back().normalized > sn.rows.front().normalized);
  }
}

TEST_CASE("chern numbers") {
  const auto m = build_metric(polynomial_xi(0.5), 2);
  const auto c = chern_number(m);
  CHECK(c.value == doctest::Approx(0.5).epsilon(1e-6));
  // Built from the extrapolated xi(inf), not from the exact 0.5.
  CHECK(c.expected == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(c.tail_share < 0.01);
  for (double a : {0.3, 1.0}) {
    for (int n : {2, 3, 4}) {
      const auto mm = build_metric(polynomial_xi(a, XiShape::Exponential), n);
      const auto cc = chern_number(mm);
      CHECK(cc.value == doctest::Approx(cc.expected).epsilon(1e-3));
      CHECK(cc.value <= cc.bound + 1e-6);
    }
  }
  // The k = n series approaches the same total.
  const auto series = normalized_chern_series(m, 2, default_s_grid(m));
  CHECK(series.rows.back().integral / std::pow(std::numbers::pi, 2) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("average scalar curvature stays in a band") {
  for (const auto& m : {build_metric(polynomial_xi(0.5), 2), build_metric(polynomial_xi(1.0), 3), s3_metric(2, 1.0)}) {
    double lo = INFINITY, hi = 0.0;
    for (const double s : default_s_grid(m, 32)) {
      const double q = average_scalar_curvature(m, s) * (1.0 + m.at_s(s).v);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    CHECK(lo > 0.0);
    CHECK(hi / lo < 50.0);
  }
}

TEST_CASE("integration by parts") {
  const auto m = build_metric(polynomial_xi(0.5), 3);
  for (double s : {2.0, 20.0}) {
    const auto c = ibp_identity(m, 2, s);
    CHECK(c.rel_diff <= 1e-6);
  }
  CHECK_THROWS_AS(ibp_identity(m, 3, 2.0), ModelError);
}

TEST_CASE("growth fits on synthetic series") {
  CHECK(growth_fit(synthetic(0.0), 0.5).verdict == Verdict::Bounded);
  const auto up = growth_fit(synthetic(1.5), 0.5);
  CHECK(up.slope == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(up.residual < 1e-12);
  CHECK(up.verdict == Verdict::UnboundedGrowth);
  CHECK(growth_fit(synthetic(-1.0), 0.5).verdict == Verdict::Bounded);
  CHECK(growth_fit(synthetic(0.08), 0.5).verdict == Verdict::Inconclusive);
  CHECK(growth_fit(synthetic(0.5, 0.5), 0.5).verdict == Verdict::Inconclusive);
  const auto half = growth_fit(synthetic(1.0), 0.5);
  CHECK(half.s_lo == doctest::Approx(100.0).epsilon(0.1));
  CHECK(half.s_hi == 1e4);
  BallIntegralSeries small;
  small.rows.resize(10);
  CHECK_THROWS_AS(growth_fit(small, 0.5), ModelError);
  CHECK_THROWS_AS(growth_fit(synthetic(1.0), 0.0), ModelError);
  const auto lf = fit_linear({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(lf.slope == doctest::Approx(2.0));
  CHECK(lf.intercept == doctest::Approx(1.0));
  CHECK(lf.correlation == doctest::Approx(1.0));
}

TEST_CASE("coordinate growth") {
  const auto flat = coordinate_growth(build_metric(polynomial_xi(0.0), 2));
  CHECK(flat.fit.slope == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(flat.stable);
  CHECK_FALSE(flat.superpolynomial);

  const auto s3 = coordinate_growth(s3_metric(2, 1.0));
  CHECK(s3.superpolynomial);
  CHECK(s3.linear_correlation > 0.999);

  // xi -> 1/2: r grows like s^4.
  const auto s1 = coordinate_growth(build_metric(polynomial_xi(0.5), 2));
  CHECK(s1.fit.slope == doctest::Approx(4.0).epsilon(0.05));
  CHECK_FALSE(s1.superpolynomial);
}

TEST_CASE("volume growth limits") {
  const auto m = build_metric(polynomial_xi(0.5), 2);
  const auto v = volume_growth_limit(m);
  CHECK(v.exponent == 4.0);
  CHECK(v.measured == doctest::Approx(m.c_n() * 0.25).epsilon(0.01));
  CHECK(v.matches == "c_n (1-xi_inf)^n");
  const auto h = volume_growth_limit(s3_metric(2, 1.0));
  CHECK(h.exponent == 2.0);
  CHECK(h.matches == "c_n (2 x0)^n");
}

TEST_CASE("volume sandwich") {
  for (const auto& m : {build_metric(polynomial_xi(0.5), 2), build_metric(polynomial_xi(1.0), 2), s3_metric(3, 1.0)}) {
    const auto grid = default_s_grid(m, 64);
    double cmin = INFINITY;
    for (std::size_t i = 32; i < grid.size(); ++i) {
      const double vol = volume_ball(m, grid[i]);
      CHECK(vol <= m.c_n() * std::pow(grid[i], 2 * m.n()) * (1 + 1e-12));
      cmin = std::min(cmin, vol / std::pow(grid[i], m.n()));
    }
    CHECK(cmin > 0.0);
  }
}
