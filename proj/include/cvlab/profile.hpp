#pragma once

#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cvlab/expr.hpp"

namespace cvlab {

/// What a generator function describes: xi(r), F''(x) or h(r).
enum class ProfileKind { Xi, Fpp, H };

const char* kind_name(ProfileKind kind);
ProfileKind parse_kind(std::string_view name);

/// Rectangles of height l^height_exponent on [l, l + l^-width_exponent].
struct StepFamilyDescriptor {
  double height_exponent = 1.0;
  double width_exponent = 2.5;
  int l_min = 2;
  int l_max = 64;
  double smoothing_width_factor = 0.25;
};

/// Throws ConstraintError when steps would overlap or parameters are unusable.
void check_descriptor(const StepFamilyDescriptor& d);

class GeneratorProfile {
 public:
  enum class Source { ClosedForm, Sampled, StepFamily, Ramp };

  static GeneratorProfile closed_form(ProfileKind kind, ExprAst expr,
                                      double domain_end = std::numeric_limits<double>::infinity());
  /// Monotone cubic interpolation through (t[i], v[i]); t must start at 0 and
  /// increase strictly. The domain ends at the last abscissa.
  static GeneratorProfile sampled(ProfileKind kind, std::vector<double> t, std::vector<double> v);
  /// F'' made of rectangles; with `smoothed` every edge becomes a quintic
  /// smoothstep of width factor*(step width) placed inside the rectangle.
  static GeneratorProfile step_family(const StepFamilyDescriptor& d, bool smoothed);
  /// xi rising from 0 to 1 on [r0/2, r0] along a quintic smoothstep, 1 afterwards.
  static GeneratorProfile ramp(double r0);

  ProfileKind kind() const;
  Source source() const;
  double domain_end() const;

  double value(double t) const;
  Jet jet(double t) const;

  /// Points in [lo, hi] where the profile is only piecewise smooth.
  std::vector<double> breakpoints(double lo, double hi) const;

  /// Exact running integral from 0, when the source has one in closed form.
  std::optional<double> cumulative(double t) const;
  std::optional<double> total_mass() const;

  const ExprAst* expression() const;
  const StepFamilyDescriptor* descriptor() const;
  bool smoothed() const;
  double ramp_r0() const;
  const std::vector<double>& sample_t() const;
  const std::vector<double>& sample_v() const;

  std::string describe() const;

 private:
  struct Impl;
  explicit GeneratorProfile(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

double eval_profile(const GeneratorProfile& p, double t);

struct Violation {
  std::string condition;
  double t = 0.0;
  double observed = 0.0;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;
  std::vector<double> grid_used;
  // Only filled in by validate_F.
  std::optional<double> fprime_infinity;
  bool integral_converges = true;
};

/// t = 0 followed by 512 log-spaced points up to domain_end (or 1e8 if infinite).
std::vector<double> default_validation_grid(double domain_end);

ValidationReport validate_xi(const GeneratorProfile& p, const std::vector<double>& grid);
ValidationReport validate_xi(const GeneratorProfile& p);
ValidationReport validate_F(const GeneratorProfile& p, const std::vector<double>& grid);
ValidationReport validate_F(const GeneratorProfile& p);

/// Key/value contents of a profile file.
using ProfileFields = std::map<std::string, std::string>;

/// Lines of `key=value`; '#' starts a comment; values may be double quoted.
ProfileFields parse_profile_text(std::string_view text);
ProfileFields read_profile_file(const std::string& path);

/// Reads a two-column CSV with a header row.
void read_samples_csv(const std::string& path, std::vector<double>& t, std::vector<double>& v);

/// Builds a profile from kind=xi|fpp|h with expr=... or samples=path.
/// Relative sample paths are resolved against `base_dir`.
GeneratorProfile profile_from_fields(const ProfileFields& fields, const std::string& base_dir = "");

}  // namespace cvlab
