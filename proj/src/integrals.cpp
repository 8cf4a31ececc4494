#include "cvlab/integrals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cvlab/error.hpp"
#include "cvlab/format.hpp"
#include "metric_data.hpp"
#include "quadrature.hpp"

namespace cvlab {

namespace density {

Density one() {
  return {"one", [](const RadialPoint&, const CurvatureSample&) { return 1.0; }};
}

Density scalar() {
  return {"scalar", [](const RadialPoint&, const CurvatureSample& c) { return c.R; }};
}

Density sigma(int n, int k) {
  sigma_k(0.0, 0.0, n, k);  // range check
  return {"sigma_" + std::to_string(k),
          [n, k](const RadialPoint&, const CurvatureSample& c) { return sigma_k(c.lambda, c.mu, n, k); }};
}

Density chern(int n, int k) {
  chern_density_k(0.0, 0.0, n, k);
  return {"chern_" + std::to_string(k), [n, k](const RadialPoint&, const CurvatureSample& c) {
            return chern_density_k(c.lambda, c.mu, n, k);
          }};
}

Density a_power(double p) {
  return {"A^" + format_double(p),
          [p](const RadialPoint&, const CurvatureSample& c) { return std::pow(std::max(c.A, 0.0), p); }};
}

Density a_times_v_power(double e) {
  return {"A*v^" + format_double(e),
          [e](const RadialPoint& q, const CurvatureSample& c) { return c.A * std::pow(q.v, e); }};
}

Density ibp_remainder(int n, int k) {
  return {"ibp_remainder", [n, k](const RadialPoint& q, const CurvatureSample&) {
            return (n - k) * (1.0 - q.xi) * std::pow(q.v, -static_cast<double>(k));
          }};
}

}  // namespace density

// ---------------------------------------------------------------------------

namespace {

constexpr int kKronrodDepth = 8;

}  // namespace

BallIntegrator::BallIntegrator(const MetricModel& m, Density d, IntegralOptions opts)
    : m_(m), d_(std::move(d)), opts_(opts) {
  const auto& data = m_.data();
  const std::size_t cells = data.pieces.size();
  std::vector<double> part(cells, 0.0), err(cells, 0.0);
  parallel_for(opts_.policy, cells, [&](std::size_t k) {
    part[k] = cell(k, data.pieces[k].a, data.pieces[k].b, &err[k]);
  });
  prefix_.assign(cells + 1, 0.0);
  double l1 = 0.0;
  for (std::size_t k = 0; k < cells; ++k) {
    prefix_[k + 1] = prefix_[k] + part[k];
    l1 += std::abs(part[k]);
    error_ += err[k];
  }
  if (!std::isfinite(prefix_.back()))
    throw QuadratureError("ball integral of " + d_.name + " is not finite", error_);
  if (error_ > opts_.rel_tol * l1 + 1e-14)
    throw QuadratureError("ball integral of " + d_.name + " did not reach relative tolerance " +
                              format_double(opts_.rel_tol),
                          l1 > 0.0 ? error_ / l1 : error_);
}

double BallIntegrator::cell(std::size_t k, double a, double b, double* err) const {
  if (b <= a) {
    if (err) *err = 0.0;
    return 0.0;
  }
  const auto& data = m_.data();
  const int n = m_.n();
  auto f = [&](double t) {
    const RadialPoint q = data.point(k, t);
    const CurvatureSample c = curvature_sample(q, n);
    return d_.fn(q, c) * n * std::pow(q.v, n - 1) * q.dv_dt;
  };
  double e = 0.0;
  const double val = detail::gk15(f, a, b, opts_.rel_tol * 1e-2, kKronrodDepth, &e);
  if (err) *err = m_.c_n() * e;
  return m_.c_n() * val;
}

double BallIntegrator::up_to_native(double t) const {
  const auto& data = m_.data();
  if (!(t >= 0.0) || t > m_.native_end() * (1.0 + 1e-15))
    throw ModelError("ball radius outside the tabulated range");
  if (t >= m_.native_end()) return prefix_.back();
  const std::size_t k = data.piece_of(t);
  return prefix_[k] + cell(k, data.pieces[k].a, t, nullptr);
}

double BallIntegrator::at_s(double s) const { return up_to_native(m_.native_of_s(s)); }

double BallIntegrator::total() const { return prefix_.back(); }

// ---------------------------------------------------------------------------

double distance_s(const MetricModel& m, double r) { return m.at_r(r).s; }
double distance_s_x(const MetricModel& m, double x) { return m.at_x(x).s; }

double volume_ball(const MetricModel& m, double s) {
  return m.c_n() * std::pow(m.at_s(s).v, m.n());
}

double ball_integral(const MetricModel& m, const Density& d, double s) {
  return BallIntegrator(m, d).at_s(s);
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi > lo) || count < 2) throw ModelError("log_spaced needs 0 < lo < hi and count >= 2");
  std::vector<double> out(static_cast<std::size_t>(count));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> default_s_grid(const MetricModel& m, int count) {
  const double lo = m.r_end() > 1.0 ? distance_s(m, 1.0) : m.s_end() * 1e-3;
  return log_spaced(lo, m.s_end(), count);
}

BallIntegralSeries integral_series(const MetricModel& m, const Density& d, const std::vector<double>& s_grid,
                                   double exponent, const IntegralOptions& opts) {
  for (std::size_t i = 1; i < s_grid.size(); ++i)
    if (!(s_grid[i] > s_grid[i - 1])) throw ModelError("s grid must increase strictly");
  const BallIntegrator I(m, d, opts);
  BallIntegralSeries out;
  out.density_name = d.name;
  out.normalization_exponent = exponent;
  out.rows.resize(s_grid.size());
  parallel_for(opts.policy, s_grid.size(), [&](std::size_t i) {
    const double s = s_grid[i];
    const double t = m.native_of_s(s);
    SeriesRow row;
    row.s = s;
    row.vol = m.c_n() * std::pow(m.at_native(t).v, m.n());
    row.integral = I.up_to_native(t);
    row.normalized = row.integral / std::pow(s, exponent);
    out.rows[i] = row;
  });
  return out;
}

BallIntegralSeries normalized_sigma_series(const MetricModel& m, int k, const std::vector<double>& s_grid,
                                           const IntegralOptions& opts) {
  if (k < 1 || k > m.n()) throw ModelError("sigma series needs 1 <= k <= n");
  auto out = integral_series(m, density::sigma(m.n(), k), s_grid, 2.0 * (m.n() - k), opts);
  out.k = k;
  return out;
}

BallIntegralSeries normalized_chern_series(const MetricModel& m, int k, const std::vector<double>& s_grid,
                                           const IntegralOptions& opts) {
  if (k < 1 || k > m.n()) throw ModelError("chern series needs 1 <= k <= n");
  auto out = integral_series(m, density::chern(m.n(), k), s_grid, 2.0 * (m.n() - k), opts);
  out.k = k;
  return out;
}

BallIntegralSeries normalized_scalar_series(const MetricModel& m, const std::vector<double>& s_grid,
                                            const IntegralOptions& opts) {
  return integral_series(m, density::scalar(), s_grid, 2.0 * (m.n() - 1), opts);
}

BallIntegralSeries lp_series(const MetricModel& m, double p, const std::vector<double>& s_grid,
                             const IntegralOptions& opts) {
  if (!(p > 0.0)) throw ModelError("lp series needs p > 0");
  auto out = integral_series(m, density::a_power(p), s_grid, 0.0, opts);
  out.normalization = BallIntegralSeries::Normalization::VolumeWeighted;
  for (auto& row : out.rows) row.normalized = row.s * row.s * row.integral / row.vol;
  return out;
}

ChernNumber chern_number(const MetricModel& m) {
  const int n = m.n();
  const auto& cls = m.classification();
  const double a = cls.xi_infinity;
  if (!std::isfinite(a)) throw ModelError("chern number needs a finite xi(inf)");
  ChernNumber out;
  out.table_part = BallIntegrator(m, density::chern(n, n)).total();
  // Beyond the table xi is frozen at xi(inf). Then lambda dv = dQ with
  // Q = v mu = xi + (n-1) w/v, so the remaining integral is c_n (Q(inf)^n - Q^n).
  const RadialPoint e = m.at_native(m.native_end());
  const double q_end = a + (n - 1) * e.w / e.v;
  out.tail = m.c_n() * (std::pow(n * a, n) - std::pow(q_end, n));
  if (cls.cls == MetricClass::Flat) out.tail = 0.0;
  out.raw = out.table_part + out.tail;
  out.tail_share = out.raw != 0.0 ? out.tail / out.raw : 0.0;
  const double pin = std::pow(std::numbers::pi, n);
  out.value = out.raw / pin;
  out.expected = m.c_n() * std::pow(n * a / std::numbers::pi, n);
  out.bound = m.c_n() * std::pow(n / std::numbers::pi, n);
  return out;
}

double average_scalar_curvature(const MetricModel& m, double s) {
  if (!(s > 0.0)) throw ModelError("average scalar curvature needs s > 0");
  return ball_integral(m, density::scalar(), s) / volume_ball(m, s);
}

IbpCheck ibp_identity(const MetricModel& m, int k, double s) {
  const int n = m.n();
  if (k < 1 || k >= n) throw ModelError("integration by parts check needs 1 <= k < n");
  IbpCheck out;
  out.direct = ball_integral(m, density::a_times_v_power(1.0 - k), s);
  const RadialPoint q = m.at_s(s);
  out.boundary = -m.c_n() * n * std::pow(q.v, n - k) * (1.0 - q.xi);
  out.remainder = ball_integral(m, density::ibp_remainder(n, k), s);
  out.by_parts = out.boundary + out.remainder;
  out.rel_diff = std::abs(out.direct - out.by_parts) / std::max(std::abs(out.direct), 1e-300);
  return out;
}

std::string series_csv(const BallIntegralSeries& series) {
  std::string out = "s,vol,integral,normalized\n";
  for (const auto& r : series.rows) {
    out += format_double(r.s) + ',' + format_double(r.vol) + ',' + format_double(r.integral) + ',' +
           format_double(r.normalized) + '\n';
  }
  return out;
}

namespace {

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

nlohmann::json series_json(const BallIntegralSeries& series) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : series.rows)
    rows.push_back({{"s", num(r.s)}, {"vol", num(r.vol)}, {"integral", num(r.integral)}, {"normalized", num(r.normalized)}});
  nlohmann::json j;
  j["density"] = series.density_name;
  j["k"] = series.k ? nlohmann::json(*series.k) : nlohmann::json(nullptr);
  if (series.normalization == BallIntegralSeries::Normalization::Power) {
    j["normalization"] = "power";
    j["normalization_exponent"] = series.normalization_exponent;
  } else {
    j["normalization"] = "volume_weighted";
  }
  j["rows"] = rows;
  return j;
}

nlohmann::json fit_json(const GrowthFit& fit) {
  return {{"slope", num(fit.slope)},
          {"intercept", num(fit.intercept)},
          {"residual", num(fit.residual)},
          {"verdict", verdict_name(fit.verdict)},
          {"window", {num(fit.s_lo), num(fit.s_hi)}},
          {"spread", num(fit.spread)},
          {"points", fit.points}};
}

}  // namespace cvlab
