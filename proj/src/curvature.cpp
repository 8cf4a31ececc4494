#include "cvlab/curvature.hpp"

#include <cmath>

#include <boost/math/special_functions/binomial.hpp>

#include "cvlab/error.hpp"
#include "cvlab/format.hpp"

namespace cvlab {

namespace {

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return boost::math::binomial_coefficient<double>(static_cast<unsigned>(n), static_cast<unsigned>(k));
}

}  // namespace

Abc abc_native(const RadialPoint& p) {
  const double A = p.dxi_dr / p.h;
  if (p.v == 0.0) return {A, 0.5 * A, A};
  const double v2 = p.v * p.v;
  return {A, (p.xi * p.v - p.w) / v2, 2.0 * p.w / v2};
}

Abc abc_at_r(const MetricModel& m, double r) {
  if (!(r > 0.0)) throw ModelError("abc_at_r needs r > 0");
  const RadialPoint p = m.at_r(r);
  const double hp = -p.xi * p.h / p.r;
  const double fp = (p.h - p.f) / p.r;
  const double f2 = p.f * p.f;
  return {p.dxi_dr / p.h, fp / f2 - hp / (p.h * p.f), -2.0 * fp / f2};
}

Abc abc_at_x(const MetricModel& m, double x) {
  if (!(x > 0.0)) throw ModelError("abc_at_x needs x > 0");
  const RadialPoint p = m.at_x(x);
  const double S2 = 1.0 + p.fprime * p.fprime;
  const double S = std::sqrt(S2);
  const double x2 = x * x, v2 = p.v * p.v;
  return {p.fprime * p.fpp / (2.0 * x * S2 * S2), x2 / v2 - 1.0 / (p.v * S), 2.0 / p.v - 2.0 * x2 / v2};
}

std::pair<double, double> ricci_eigenvalues(double A, double B, double C, int n) {
  return {A + (n - 1) * B, B + 0.5 * n * C};
}

double sigma_k(double lambda, double mu, int n, int k) {
  if (n < 1 || k < 1 || k > 2 * n)
    throw ModelError("sigma_k needs 1 <= k <= 2n (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
  double sum = 0.0;
  for (int j = 0; j <= std::min(2, k); ++j)
    sum += binom(2, j) * binom(2 * n - 2, k - j) * std::pow(lambda, j) * std::pow(mu, k - j);
  return sum;
}

double chern_density_k(double lambda, double mu, int n, int k) {
  if (n < 1 || k < 1 || k > n)
    throw ModelError("chern density needs 1 <= k <= n (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
  const double e = binom(n - 1, k - 1) * lambda * std::pow(mu, k - 1) + binom(n - 1, k) * std::pow(mu, k);
  return e / binom(n, k);
}

double scalar_curvature(double A, double B, double C, int n) {
  return A + 2.0 * (n - 1) * B + 0.5 * n * (n - 1) * C;
}

CurvatureSample curvature_sample(const RadialPoint& p, int n) {
  const Abc k = abc_native(p);
  const auto [lambda, mu] = ricci_eigenvalues(k.A, k.B, k.C, n);
  return {p.r, p.x, k.A, k.B, k.C, lambda, mu, scalar_curvature(k.A, k.B, k.C, n)};
}

std::vector<CurvatureSample> curvature_table(const MetricModel& m, ExecPolicy policy) {
  const auto pts = m.grid_points();
  std::vector<CurvatureSample> out(pts.size());
  parallel_for(policy, pts.size(), [&](std::size_t i) { out[i] = curvature_sample(pts[i], m.n()); });
  return out;
}

std::string curvature_table_csv(const std::vector<CurvatureSample>& rows) {
  std::string out = "r,x,A,B,C,lambda,mu,R\n";
  for (const auto& s : rows) {
    for (double v : {s.r, s.x, s.A, s.B, s.C, s.lambda, s.mu}) {
      out += format_double(v);
      out += ',';
    }
    out += format_double(s.R);
    out += '\n';
  }
  return out;
}

}  // namespace cvlab
