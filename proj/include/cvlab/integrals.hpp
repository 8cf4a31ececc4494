#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cvlab/curvature.hpp"
#include "cvlab/metric.hpp"
#include "json.hpp"

namespace cvlab {

/// Radial density P integrated against omega^n.
struct Density {
  std::string name;
  std::function<double(const RadialPoint&, const CurvatureSample&)> fn;
};

namespace density {
Density one();
Density scalar();
Density sigma(int n, int k);
Density chern(int n, int k);
/// A^p, the radial bisectional curvature to a power.
Density a_power(double p);
/// A v^e.
Density a_times_v_power(double e);
/// (n-k)(1-xi) v^-k, the remainder after integrating A v^(1-k) by parts.
Density ibp_remainder(int n, int k);
}  // namespace density

struct IntegralOptions {
  double rel_tol = 1e-8;
  ExecPolicy policy = ExecPolicy::Parallel;
};

/// Precomputes per-cell contributions of c_n int P d(v^n) so that integrals
/// up to many radii cost one partial cell each.
class BallIntegrator {
 public:
  BallIntegrator(const MetricModel& m, Density d, IntegralOptions opts = {});

  /// Integral over the ball reaching native radius t.
  double up_to_native(double t) const;
  double at_s(double s) const;
  double total() const;
  /// Summed quadrature error estimate over the whole table.
  double error_estimate() const { return error_; }

 private:
  double cell(std::size_t k, double a, double b, double* err) const;

  MetricModel m_;
  Density d_;
  IntegralOptions opts_;
  std::vector<double> prefix_;  // prefix_[k]: integral up to the start of cell k
  double error_ = 0.0;
};

/// Geodesic distance from the origin to radius r (or to x).
double distance_s(const MetricModel& m, double r);
double distance_s_x(const MetricModel& m, double x);

/// c_n v(s)^n.
double volume_ball(const MetricModel& m, double s);

double ball_integral(const MetricModel& m, const Density& d, double s);

struct SeriesRow {
  double s = 0.0;
  double vol = 0.0;
  double integral = 0.0;
  double normalized = 0.0;
};

struct BallIntegralSeries {
  enum class Normalization { Power, VolumeWeighted };

  std::string density_name;
  std::optional<int> k;
  std::vector<SeriesRow> rows;
  /// Power: normalized = integral / s^exponent.
  /// VolumeWeighted: normalized = s^2 integral / Vol.
  Normalization normalization = Normalization::Power;
  double normalization_exponent = 0.0;
};

/// 64 log-spaced geodesic radii from s(r=1) to the end of the table.
std::vector<double> default_s_grid(const MetricModel& m, int count = 64);
std::vector<double> log_spaced(double lo, double hi, int count);

BallIntegralSeries integral_series(const MetricModel& m, const Density& d,
                                   const std::vector<double>& s_grid, double exponent,
                                   const IntegralOptions& opts = {});
BallIntegralSeries normalized_sigma_series(const MetricModel& m, int k, const std::vector<double>& s_grid,
                                           const IntegralOptions& opts = {});
BallIntegralSeries normalized_chern_series(const MetricModel& m, int k, const std::vector<double>& s_grid,
                                           const IntegralOptions& opts = {});
/// Scalar curvature normalized by s^(2n-2).
BallIntegralSeries normalized_scalar_series(const MetricModel& m, const std::vector<double>& s_grid,
                                            const IntegralOptions& opts = {});
/// (s^2 / Vol) int A^p.
BallIntegralSeries lp_series(const MetricModel& m, double p, const std::vector<double>& s_grid,
                             const IntegralOptions& opts = {});

struct ChernNumber {
  double value = 0.0;        // integral of Ric^n with Ric the first Chern form
  double raw = 0.0;          // same integral with the Ricci eigenvalues as they are
  double table_part = 0.0;   // raw contribution up to the end of the table
  double tail = 0.0;         // raw analytic completion beyond it
  double tail_share = 0.0;   // tail / raw
  double expected = 0.0;     // c_n (n xi(inf) / pi)^n
  double bound = 0.0;        // c_n (n / pi)^n
};

ChernNumber chern_number(const MetricModel& m);

/// int_{B(s)} R / Vol(B(s)).
double average_scalar_curvature(const MetricModel& m, double s);

enum class Verdict { Bounded, UnboundedGrowth, Inconclusive };
const char* verdict_name(Verdict v);

struct GrowthFit {
  double slope = 0.0;
  double intercept = 0.0;
  double s_lo = 0.0, s_hi = 0.0;
  double residual = 0.0;  // rms of the log-space residuals
  Verdict verdict = Verdict::Inconclusive;
  double spread = 0.0;    // (max - min) / max |value| over the window
  std::size_t points = 0;
};

/// Least-squares slope of log(normalized) against log(s) over the trailing
/// window_fraction of the log-s range. Needs at least 16 rows.
GrowthFit growth_fit(const BallIntegralSeries& series, double window_fraction);
GrowthFit growth_fit_window(const BallIntegralSeries& series, double s_lo, double s_hi);
/// Same fit on raw arrays.
GrowthFit fit_loglog(const std::vector<double>& s, const std::vector<double>& y);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double correlation = 0.0;
  double residual = 0.0;  // rms residual divided by the standard deviation of y
};
LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y);

struct CoordinateGrowth {
  GrowthFit fit;                     // log r against log s, trailing half
  std::vector<double> nested_slopes; // trailing 1, 1/2, 1/4 of the log-s range
  double linear_correlation = 0.0;   // log r against s
  double loglog_correlation = 0.0;   // log r against log s
  bool stable = false;               // nested slopes agree within 5%
  bool superpolynomial = false;
};

CoordinateGrowth coordinate_growth(const MetricModel& m);

/// Measured volume-growth constant next to the closed forms it could match.
struct VolumeLimit {
  double exponent = 0.0;  // power of s in Vol / s^exponent
  double measured = 0.0;
  double lhopital = 0.0;
  std::vector<std::pair<std::string, double>> candidates;
  std::string matches;    // first candidate within 2%, or "none"
};

VolumeLimit volume_growth_limit(const MetricModel& m);

/// Direct c_n int A v^(1-k) d(v^n) against its integrated-by-parts form.
struct IbpCheck {
  double direct = 0.0;
  double boundary = 0.0;
  double remainder = 0.0;
  double by_parts = 0.0;
  double rel_diff = 0.0;
};

IbpCheck ibp_identity(const MetricModel& m, int k, double s);

/// Header s,vol,integral,normalized.
std::string series_csv(const BallIntegralSeries& series);
nlohmann::json series_json(const BallIntegralSeries& series);
nlohmann::json fit_json(const GrowthFit& fit);

}  // namespace cvlab
