#include <algorithm>
#include <cmath>
#include <numeric>

#include "cvlab/error.hpp"
#include "cvlab/integrals.hpp"

namespace cvlab {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Bounded: return "Bounded";
    case Verdict::UnboundedGrowth: return "UnboundedGrowth";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ModelError("linear fit needs two or more paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw ModelError("linear fit needs distinct abscissae");
  LinearFit out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.correlation = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 1.0;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (out.intercept + out.slope * x[i]);
    ss += e * e;
  }
  out.residual = syy > 0.0 ? std::sqrt(ss / syy) : 0.0;
  return out;
}

GrowthFit fit_loglog(const std::vector<double>& s, const std::vector<double>& y) {
  if (s.size() != y.size() || s.size() < 2) throw ModelError("growth fit needs two or more paired points");
  GrowthFit out;
  out.points = s.size();
  out.s_lo = s.front();
  out.s_hi = s.back();

  double vmax = 0.0, lo = y.front(), hi = y.front();
  for (double v : y) {
    vmax = std::max(vmax, std::abs(v));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (vmax == 0.0) {
    out.verdict = Verdict::Bounded;
    return out;
  }
  out.spread = (hi - lo) / vmax;

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] == 0.0) continue;
    lx.push_back(std::log(s[i]));
    ly.push_back(std::log(std::abs(y[i])));
  }
  if (lx.size() >= 2) {
    const LinearFit f = fit_linear(lx, ly);
    out.slope = f.slope;
    out.intercept = f.intercept;
    double ss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double e = ly[i] - (f.intercept + f.slope * lx[i]);
      ss += e * e;
    }
    out.residual = std::sqrt(ss / static_cast<double>(lx.size()));
  }

  if (out.slope > 0.1 && out.residual < 0.1)
    out.verdict = Verdict::UnboundedGrowth;
  else if (std::abs(out.slope) <= 0.05 || out.spread <= 0.01 || out.slope < -0.05)
    out.verdict = Verdict::Bounded;
  else
    out.verdict = Verdict::Inconclusive;
  return out;
}

GrowthFit growth_fit_window(const BallIntegralSeries& series, double s_lo, double s_hi) {
  if (series.rows.size() < 16) throw ModelError("growth fit needs at least 16 rows");
  std::vector<double> s, y;
  for (const auto& r : series.rows) {
    if (r.s < s_lo * (1.0 - 1e-12) || r.s > s_hi * (1.0 + 1e-12)) continue;
    s.push_back(r.s);
    y.push_back(r.normalized);
  }
  if (s.size() < 2) throw ModelError("growth fit window holds fewer than two rows");
  return fit_loglog(s, y);
}

GrowthFit growth_fit(const BallIntegralSeries& series, double window_fraction) {
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) throw ModelError("window fraction must lie in (0, 1]");
  if (series.rows.size() < 16) throw ModelError("growth fit needs at least 16 rows");
  const double a = std::log(series.rows.front().s), b = std::log(series.rows.back().s);
  return growth_fit_window(series, std::exp(b - window_fraction * (b - a)), series.rows.back().s);
}

CoordinateGrowth coordinate_growth(const MetricModel& m) {
  const double s_lo = m.r_end() > 1.0 ? m.at_r(1.0).s : m.s_end() * 1e-3;
  const std::vector<double> s = log_spaced(s_lo, m.s_end(), 128);
  std::vector<double> logr(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) logr[i] = std::log(m.at_s(s[i]).r);

  const double a = std::log(s.front()), b = std::log(s.back());
  auto window = [&](double frac, std::vector<double>& ls, std::vector<double>& ss, std::vector<double>& lr) {
    const double cut = b - frac * (b - a) - 1e-12;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (std::log(s[i]) < cut) continue;
      ls.push_back(std::log(s[i]));
      ss.push_back(s[i]);
      lr.push_back(logr[i]);
    }
  };

  CoordinateGrowth out;
  for (double frac : {1.0, 0.5, 0.25}) {
    std::vector<double> ls, ss, lr;
    window(frac, ls, ss, lr);
    out.nested_slopes.push_back(fit_linear(ls, lr).slope);
    if (frac == 0.5) {
      std::vector<double> r(lr.size());
      for (std::size_t i = 0; i < lr.size(); ++i) r[i] = std::exp(lr[i]);
      out.fit = fit_loglog(ss, r);
      out.linear_correlation = fit_linear(ss, lr).correlation;
      out.loglog_correlation = fit_linear(ls, lr).correlation;
    }
  }
  const auto [mn, mx] = std::minmax_element(out.nested_slopes.begin(), out.nested_slopes.end());
  out.stable = std::isfinite(*mx) && *mn > 0.0 && (*mx - *mn) <= 0.05 * *mx;
  out.superpolynomial = out.linear_correlation > 0.999 && out.linear_correlation > out.loglog_correlation;
  return out;
}

VolumeLimit volume_growth_limit(const MetricModel& m) {
  const auto& cls = m.classification();
  const int n = m.n();
  const double cn = m.c_n();
  const bool half = cls.cls == MetricClass::S3;
  VolumeLimit out;
  out.exponent = half ? n : 2.0 * n;

  // The ratio y = sqrt(v)/s (or v/s) approaches its limit like 1/s; fit the
  // last decade linearly in 1/s and read off the intercept.
  const std::vector<double> s = log_spaced(m.s_end() / 10.0, m.s_end(), 33);
  std::vector<double> inv(s.size()), y(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const RadialPoint p = m.at_s(s[i]);
    inv[i] = 1.0 / s[i];
    y[i] = half ? p.v / s[i] : std::sqrt(p.v) / s[i];
  }
  const double lim = fit_linear(inv, y).intercept;
  const RadialPoint e = m.at_native(m.native_end());
  if (half) {
    out.measured = cn * std::pow(lim, n);
    out.lhopital = cn * std::pow(2.0 * e.x, n);
    out.candidates = {{"c_n (2 x0)^n", cn * std::pow(2.0 * cls.x0, n)}, {"2 c_n x0", 2.0 * cn * cls.x0}};
  } else {
    out.measured = cn * std::pow(lim, 2 * n);
    out.lhopital = cn * std::pow(e.x * e.x / e.v, n);
    const double a = cls.xi_infinity;
    out.candidates = {{"c_n (1-xi_inf)^n", cn * std::pow(1.0 - a, n)},
                      {"c_n (1-xi_inf)^(4n)", cn * std::pow(1.0 - a, 4 * n)}};
  }
  out.matches = "none";
  for (const auto& [name, value] : out.candidates) {
    if (std::abs(out.measured - value) <= 0.02 * std::abs(value)) {
      out.matches = name;
      break;
    }
  }
  return out;
}

}  // namespace cvlab
