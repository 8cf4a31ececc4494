#pragma once

#include <string>

#include "cvlab/metric.hpp"
#include "cvlab/profile.hpp"

namespace cvlab {

/// F'' made of unsmoothed rectangles.
GeneratorProfile step_profile(const StepFamilyDescriptor& d);

/// Smooths every rectangle of a step profile; factor must lie in (0, 1/2).
GeneratorProfile smooth_step_profile(const GeneratorProfile& steps, double factor);

/// Options for the x-domain families: the range in x reaches well past the
/// last step so that F' has settled.
BuildOptions x_domain_options();

/// Heights l on widths l^-5/2, smoothed, F(0) = F'(0) = 0.
MetricModel yau_counterexample(int n, int k, int l_max = 64, const BuildOptions& opts = x_domain_options());

/// Throws ConstraintError unless p > 1, alpha > 1 and 1 + alpha < beta < p(alpha - 1) + 2.
void check_lp_constraint(double p, double alpha, double beta);
/// Heights l^alpha on widths l^-beta, smoothed.
MetricModel lp_counterexample(int n, double p, double alpha, double beta, int l_max = 64,
                              const BuildOptions& opts = x_domain_options());

/// Distance grows only like log r past r0, so the r range runs far out.
BuildOptions s3_options();
MetricModel s3_metric(int n, double r0, const BuildOptions& opts = s3_options());

enum class XiShape { Rational, Exponential };

/// rational: a t/(1+t); exponential: a (1 - e^-t).
GeneratorProfile polynomial_xi(double a, XiShape shape = XiShape::Rational);

struct FamilySpec {
  std::string family;  // yau | lp | s3 | poly
  int n = 3;
  int k = 2;
  int l_max = 64;
  double smoothing = 0.25;
  double p = 2.0;
  double alpha = 2.0;
  double beta = 3.5;
  double r0 = 1.0;
  double a = 0.5;
  XiShape shape = XiShape::Rational;
};

/// Reads family=... and its parameters from a profile file's fields.
FamilySpec family_from_fields(const ProfileFields& fields);

GeneratorProfile family_profile(const FamilySpec& spec);
/// Default build options for the family.
BuildOptions family_options(const FamilySpec& spec);
MetricModel build_family(const FamilySpec& spec);
MetricModel build_family(const FamilySpec& spec, const BuildOptions& opts);

}  // namespace cvlab
