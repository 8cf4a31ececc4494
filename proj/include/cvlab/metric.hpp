#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "cvlab/parallel.hpp"
#include "cvlab/profile.hpp"
#include "json.hpp"

namespace cvlab {

enum class Representation { FromXi, FromF, FromH };
enum class MetricClass { Flat, S1, S2, S3 };
enum class VolumeGrowth { Euclidean, SubEuclidean, HalfEuclidean };

const char* representation_name(Representation r);
const char* class_name(MetricClass c);
const char* volume_growth_name(VolumeGrowth g);

struct ClassificationResult {
  MetricClass cls = MetricClass::Flat;
  double xi_infinity = 0.0;
  double x0 = std::numeric_limits<double>::infinity();
  double r0 = std::numeric_limits<double>::infinity();
  VolumeGrowth volume_growth = VolumeGrowth::Euclidean;
  // Set when xi(inf) lands in [1-1e-6, 1-1e-9]: reported as S2 but not trusted.
  bool ambiguous = false;
};

struct BuildOptions {
  int grid_size = 4096;
  double r_min = 1e-8;
  double r_max = 1e8;
  // Range used when the profile lives in the x-domain (kind=fpp).
  double x_min = 1e-4;
  double x_max = 1e6;
  double h0 = 1.0;
  // Relative tolerance for ball integrals over the model.
  double tolerance = 1e-8;
  bool validate = true;
  bool require_complete = true;
  ExecPolicy policy = ExecPolicy::Parallel;
};

/// Everything known about the metric at one radius.
struct RadialPoint {
  double r = 0.0;
  double x = 0.0;       // sqrt(r h)
  double s = 0.0;       // geodesic distance to the origin
  double v = 0.0;       // r f
  double w = 0.0;       // v - x^2 = integral of xi h dr
  double h = 0.0;
  double f = 0.0;
  double xi = 0.0;
  double dxi_dr = 0.0;
  double fprime = 0.0;  // F'(x)
  double fpp = 0.0;     // F''(x)
  double log_h = 0.0;
  double dv_dt = 0.0;   // dv with respect to the native variable
};

namespace detail {
struct MetricData;
}

class MetricModel {
 public:
  int n() const;
  Representation repr() const;
  /// True when the native variable is u = sqrt(r) (kinds xi and h); false for
  /// the x-domain (kind fpp).
  bool r_domain() const;
  const GeneratorProfile& profile() const;
  const ClassificationResult& classification() const;
  const BuildOptions& options() const;

  /// Grid in r (r-domain) or in x (x-domain), starting at 0.
  const std::vector<double>& grid() const;
  std::vector<RadialPoint> grid_points() const;
  /// Points at every quadrature node of the tabulation; denser than grid().
  std::vector<RadialPoint> node_points() const;

  RadialPoint at_native(double t) const;
  RadialPoint at_r(double r) const;
  RadialPoint at_x(double x) const;
  RadialPoint at_s(double s) const;

  double native_of_r(double r) const;
  double native_of_x(double x) const;
  double native_of_s(double s) const;

  double native_end() const;
  double r_end() const;
  double s_end() const;
  double v_end() const;

  /// Euclidean volume of the unit ball in C^n.
  double c_n() const;

  std::size_t piece_count() const;

  nlohmann::json to_json() const;

  const detail::MetricData& data() const { return *data_; }

 private:
  friend MetricModel build_metric(const GeneratorProfile&, int, const BuildOptions&);
  explicit MetricModel(std::shared_ptr<const detail::MetricData> d) : data_(std::move(d)) {}
  std::shared_ptr<const detail::MetricData> data_;
};

/// Tabulated function on a grid.
struct Tabulated {
  std::vector<double> t;
  std::vector<double> value;
};

/// h(r) = h0 exp(-int_0^r xi(t)/t dt) on grid_r (grid_r[0] must be 0).
Tabulated xi_to_h(const GeneratorProfile& xi, double h0, const std::vector<double>& grid_r);
/// f(r) = (1/r) int_0^r h, f(0) = h(0). The tabulated overload integrates the
/// monotone cubic interpolant of the table.
Tabulated h_to_f(const std::function<double(double)>& h, const std::vector<double>& grid_r);
Tabulated h_to_f(const Tabulated& h);

/// sqrt(xi(2-xi))/(1-xi); +inf at xi = 1.
double fprime_from_xi(double xi);
/// 1 - 1/sqrt(1+fp^2), evaluated without cancellation; fp = inf gives 1.
double xi_from_fprime(double fp);

/// validate_xi, validate_F, or for kind h: h > 0 and the induced xi checks.
ValidationReport validate_profile(const GeneratorProfile& profile);

MetricModel build_metric(const GeneratorProfile& profile, int n, const BuildOptions& opts = {});

ClassificationResult classify(const MetricModel& m);
bool completeness_check(const MetricModel& m);

}  // namespace cvlab
