#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cvlab/metric.hpp"

namespace cvlab {

struct Abc {
  double A = 0.0;  // radial-radial
  double B = 0.0;  // radial-transverse
  double C = 0.0;  // transverse-transverse
};

struct CurvatureSample {
  double r = 0.0;
  double x = 0.0;
  double A = 0.0, B = 0.0, C = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  double R = 0.0;
};

/// A = xi'/h, B = (xi v - w)/v^2, C = 2w/v^2, with the limits A = C = 2B at
/// the origin. Used by every integral: no difference of nearly equal terms.
Abc abc_native(const RadialPoint& p);

/// Printed r-form: A = xi'/h, B = f'/f^2 - h'/(hf), C = -2f'/f^2, with
/// h' = -xi h / r and f' = (h - f)/r.
Abc abc_at_r(const MetricModel& m, double r);

/// Printed x-form: A = F'F''/(2x(1+F'^2)^2), B = x^2/v^2 - 1/(v sqrt(1+F'^2)),
/// C = 2/v - 2x^2/v^2. Throws ModelError for x >= x0.
Abc abc_at_x(const MetricModel& m, double x);

/// (lambda, mu) = (A + (n-1)B, B + (n/2)C).
std::pair<double, double> ricci_eigenvalues(double A, double B, double C, int n);

/// k-th elementary symmetric function of {lambda x2, mu x(2n-2)}.
double sigma_k(double lambda, double mu, int n, int k);

/// Ric^k ^ omega^(n-k) / omega^n for Ricci eigenvalues {lambda, mu x(n-1)}.
double chern_density_k(double lambda, double mu, int n, int k);

double scalar_curvature(double A, double B, double C, int n);

CurvatureSample curvature_sample(const RadialPoint& p, int n);

/// One sample per grid point.
std::vector<CurvatureSample> curvature_table(const MetricModel& m,
                                             ExecPolicy policy = ExecPolicy::Parallel);

/// Header r,x,A,B,C,lambda,mu,R.
std::string curvature_table_csv(const std::vector<CurvatureSample>& rows);

}  // namespace cvlab
