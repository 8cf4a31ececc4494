#include "cvlab/families.hpp"

#include <cmath>

#include "cvlab/error.hpp"
#include "cvlab/format.hpp"

namespace cvlab {

GeneratorProfile step_profile(const StepFamilyDescriptor& d) {
  check_descriptor(d);
  return GeneratorProfile::step_family(d, false);
}

GeneratorProfile smooth_step_profile(const GeneratorProfile& steps, double factor) {
  if (steps.source() != GeneratorProfile::Source::StepFamily)
    throw ConstraintError("smoothing needs a step profile");
  if (!(factor > 0.0 && factor < 0.5))
    throw ConstraintError("smoothing factor " + format_double(factor) + " must lie in (0, 1/2)");
  StepFamilyDescriptor d = *steps.descriptor();
  d.smoothing_width_factor = factor;
  check_descriptor(d);
  return GeneratorProfile::step_family(d, true);
}

BuildOptions x_domain_options() {
  BuildOptions o;
  o.x_min = 1e-4;
  o.x_max = 1e6;
  return o;
}

MetricModel yau_counterexample(int n, int k, int l_max, const BuildOptions& opts) {
  if (n < 3) throw ConstraintError("the k < n counterexample needs n >= 3");
  if (k < 2 || k >= n) throw ConstraintError("the k < n counterexample needs 2 <= k < n");
  StepFamilyDescriptor d;
  d.height_exponent = 1.0;
  d.width_exponent = 2.5;
  d.l_max = l_max;
  return build_metric(smooth_step_profile(step_profile(d), 0.25), n, opts);
}

void check_lp_constraint(double p, double alpha, double beta) {
  if (!(p > 1.0)) throw ConstraintError("p must exceed 1");
  if (!(alpha > 1.0)) throw ConstraintError("alpha must exceed 1");
  if (!(beta > 1.0 + alpha && beta < p * (alpha - 1.0) + 2.0))
    throw ConstraintError("need 1 + alpha < beta < p(alpha - 1) + 2, got alpha=" + format_double(alpha) +
                          " beta=" + format_double(beta) + " p=" + format_double(p));
}

MetricModel lp_counterexample(int n, double p, double alpha, double beta, int l_max, const BuildOptions& opts) {
  check_lp_constraint(p, alpha, beta);
  StepFamilyDescriptor d;
  d.height_exponent = alpha;
  d.width_exponent = beta;
  d.l_max = l_max;
  return build_metric(smooth_step_profile(step_profile(d), 0.25), n, opts);
}

BuildOptions s3_options() {
  BuildOptions o;
  o.r_max = 1e200;
  return o;
}

MetricModel s3_metric(int n, double r0, const BuildOptions& opts) {
  if (!(r0 > 0.0)) throw ConstraintError("r0 must be positive");
  return build_metric(GeneratorProfile::ramp(r0), n, opts);
}

GeneratorProfile polynomial_xi(double a, XiShape shape) {
  if (!(a >= 0.0 && a <= 1.0)) throw ConstraintError("xi(inf) must lie in [0, 1]");
  const std::string c = format_double(a);
  const std::string src = shape == XiShape::Rational ? c + "*t/(1+t)" : c + "*(1-exp(-t))";
  return GeneratorProfile::closed_form(ProfileKind::Xi, parse_expression(src));
}

namespace {

double number(const ProfileFields& f, const char* key, double fallback) {
  auto it = f.find(key);
  if (it == f.end()) return fallback;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != it->second.size() || used == 0) throw ModelError(std::string("field ") + key + " is not a number");
  return v;
}

int integer(const ProfileFields& f, const char* key, int fallback) {
  const double v = number(f, key, fallback);
  if (v != std::floor(v)) throw ModelError(std::string("field ") + key + " must be an integer");
  return static_cast<int>(v);
}

}  // namespace

FamilySpec family_from_fields(const ProfileFields& fields) {
  FamilySpec s;
  auto it = fields.find("family");
  if (it == fields.end()) throw ModelError("kind=family needs a family field");
  s.family = it->second;
  if (s.family != "yau" && s.family != "lp" && s.family != "s3" && s.family != "poly")
    throw ModelError("unknown family " + s.family + " (expected yau, lp, s3 or poly)");
  s.n = integer(fields, "n", s.n);
  s.k = integer(fields, "k", s.k);
  s.l_max = integer(fields, "l_max", s.l_max);
  s.smoothing = number(fields, "smoothing", s.smoothing);
  s.p = number(fields, "p", s.p);
  s.alpha = number(fields, "alpha", s.alpha);
  s.beta = number(fields, "beta", s.beta);
  s.r0 = number(fields, "r0", s.r0);
  s.a = number(fields, "a", s.a);
  if (auto sh = fields.find("shape"); sh != fields.end()) {
    if (sh->second == "rational")
      s.shape = XiShape::Rational;
    else if (sh->second == "exponential")
      s.shape = XiShape::Exponential;
    else
      throw ModelError("shape must be rational or exponential");
  }
  return s;
}

GeneratorProfile family_profile(const FamilySpec& spec) {
  if (spec.family == "yau" || spec.family == "lp") {
    StepFamilyDescriptor d;
    if (spec.family == "yau") {
      d.height_exponent = 1.0;
      d.width_exponent = 2.5;
    } else {
      check_lp_constraint(spec.p, spec.alpha, spec.beta);
      d.height_exponent = spec.alpha;
      d.width_exponent = spec.beta;
    }
    d.l_max = spec.l_max;
    return smooth_step_profile(step_profile(d), spec.smoothing);
  }
  if (spec.family == "s3") {
    if (!(spec.r0 > 0.0)) throw ConstraintError("r0 must be positive");
    return GeneratorProfile::ramp(spec.r0);
  }
  if (spec.family == "poly") return polynomial_xi(spec.a, spec.shape);
  throw ModelError("unknown family " + spec.family);
}

BuildOptions family_options(const FamilySpec& spec) {
  if (spec.family == "yau" || spec.family == "lp") return x_domain_options();
  if (spec.family == "s3") return s3_options();
  return {};
}

MetricModel build_family(const FamilySpec& spec) { return build_family(spec, family_options(spec)); }

MetricModel build_family(const FamilySpec& spec, const BuildOptions& opts) {
  if (spec.family == "yau" && (spec.n < 3 || spec.k < 2 || spec.k >= spec.n))
    throw ConstraintError("the k < n counterexample needs n >= 3 and 2 <= k < n");
  return build_metric(family_profile(spec), spec.n, opts);
}

}  // namespace cvlab
