#include "cvlab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <variant>


#include "cvlab/error.hpp"
#include "cvlab/format.hpp"
#include "quadrature.hpp"

namespace cvlab {

const char* kind_name(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::Xi: return "xi";
    case ProfileKind::Fpp: return "fpp";
    case ProfileKind::H: return "h";
  }
  return "?";
}

ProfileKind parse_kind(std::string_view name) {
  if (name == "xi") return ProfileKind::Xi;
  if (name == "fpp") return ProfileKind::Fpp;
  if (name == "h") return ProfileKind::H;
  throw ModelError("unknown profile kind '" + std::string(name) + "' (expected xi, fpp or h)");
}

void check_descriptor(const StepFamilyDescriptor& d) {
  if (d.l_min < 1 || d.l_max < d.l_min)
    throw ConstraintError("step family needs 1 <= l_min <= l_max");
  if (!(d.width_exponent > 0.0))
    throw ConstraintError("step family width exponent must be positive");
  if (!(d.smoothing_width_factor > 0.0 && d.smoothing_width_factor < 0.5))
    throw ConstraintError("smoothing width factor must lie in (0, 1/2)");
  // Step l starts at the integer l, so it overlaps step l+1 iff its width reaches 1.
  for (int l = d.l_min; l < d.l_max; ++l) {
    if (std::pow(static_cast<double>(l), -d.width_exponent) >= 1.0)
      throw ConstraintError("steps overlap at l=" + std::to_string(l));
  }
}

namespace {

// Quintic smoothstep and friends on [0,1].
double smooth(double u) { return u * u * u * (u * (6.0 * u - 15.0) + 10.0); }
double smooth_d1(double u) { return 30.0 * u * u * (1.0 - u) * (1.0 - u); }
double smooth_d2(double u) { return 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u); }
double smooth_int(double u) { return u * u * u * u * (u * (u - 3.0) + 2.5); }

struct ClosedFormSrc {
  ExprAst expr;
};

struct SampledSrc {
  std::vector<double> t, v, slope;
};

struct StepSrc {
  StepFamilyDescriptor d;
  bool smoothed = false;
  std::vector<double> height, width, edge;  // edge = smoothing transition width
  std::vector<double> prefix;               // mass of steps before index i
};

struct RampSrc {
  double r0 = 1.0;
};

// Fritsch-Butland slopes: zero at local extrema, weighted harmonic mean
// elsewhere, secants at the ends. Each slope stays within 3x the adjacent
// secants, which keeps every cubic piece monotone.
std::vector<double> monotone_slopes(const std::vector<double>& t, const std::vector<double>& v) {
  const std::size_t n = t.size();
  std::vector<double> d(n, 0.0);
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = t[i + 1] - t[i];
    delta[i] = (v[i + 1] - v[i]) / h[i];
  }
  d[0] = delta[0];
  d[n - 1] = delta[n - 2];
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double a = delta[k - 1], b = delta[k];
    if (a * b <= 0.0) {
      d[k] = 0.0;
    } else {
      const double h0 = h[k - 1], h1 = h[k];
      d[k] = 3.0 * (h0 + h1) / ((2.0 * h1 + h0) / a + (h1 + 2.0 * h0) / b);
    }
  }
  return d;
}

}  // namespace

struct GeneratorProfile::Impl {
  ProfileKind kind = ProfileKind::Xi;
  double domain_end = std::numeric_limits<double>::infinity();
  std::variant<ClosedFormSrc, SampledSrc, StepSrc, RampSrc> src{RampSrc{}};
};

GeneratorProfile GeneratorProfile::closed_form(ProfileKind kind, ExprAst expr, double domain_end) {
  if (!(domain_end > 0.0)) throw ModelError("profile domain must extend beyond 0");
  auto impl = std::make_shared<Impl>();
  impl->kind = kind;
  impl->domain_end = domain_end;
  impl->src = ClosedFormSrc{std::move(expr)};
  return GeneratorProfile(std::move(impl));
}

GeneratorProfile GeneratorProfile::sampled(ProfileKind kind, std::vector<double> t,
                                           std::vector<double> v) {
  if (t.size() != v.size()) throw ModelError("sample columns differ in length");
  if (t.size() < 2) throw ModelError("need at least two samples");
  if (t.front() != 0.0) throw ModelError("samples must start at t=0");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(v[i])) throw ModelError("non-finite sample");
    if (i > 0 && !(t[i] > t[i - 1]))
      throw ModelError("sample abscissae must increase strictly (row " + std::to_string(i) + ")");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = kind;
  impl->domain_end = t.back();
  SampledSrc s;
  s.slope = monotone_slopes(t, v);
  s.t = std::move(t);
  s.v = std::move(v);
  impl->src = std::move(s);
  return GeneratorProfile(std::move(impl));
}

GeneratorProfile GeneratorProfile::step_family(const StepFamilyDescriptor& d, bool smoothed) {
  check_descriptor(d);
  StepSrc s;
  s.d = d;
  s.smoothed = smoothed;
  double mass = 0.0;
  for (int l = d.l_min; l <= d.l_max; ++l) {
    const double ld = static_cast<double>(l);
    const double H = std::pow(ld, d.height_exponent);
    const double w = std::pow(ld, -d.width_exponent);
    const double e = smoothed ? d.smoothing_width_factor * w : 0.0;
    s.height.push_back(H);
    s.width.push_back(w);
    s.edge.push_back(e);
    s.prefix.push_back(mass);
    mass += H * (w - e);
  }
  s.prefix.push_back(mass);
  auto impl = std::make_shared<Impl>();
  impl->kind = ProfileKind::Fpp;
  impl->src = std::move(s);
  return GeneratorProfile(std::move(impl));
}

GeneratorProfile GeneratorProfile::ramp(double r0) {
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw ModelError("ramp needs a finite r0 > 0");
  auto impl = std::make_shared<Impl>();
  impl->kind = ProfileKind::Xi;
  impl->src = RampSrc{r0};
  return GeneratorProfile(std::move(impl));
}

ProfileKind GeneratorProfile::kind() const { return impl_->kind; }

GeneratorProfile::Source GeneratorProfile::source() const {
  return static_cast<Source>(impl_->src.index());
}

double GeneratorProfile::domain_end() const { return impl_->domain_end; }

namespace {

void check_domain(const GeneratorProfile& p, double t) {
  if (!(t >= 0.0)) throw DomainError("profile evaluated at negative t=" + format_double(t));
  if (t > p.domain_end()) {
    if (p.source() == GeneratorProfile::Source::Sampled)
      throw DomainError("extrapolation beyond last sample t=" + format_double(p.domain_end()) +
                        " requested at t=" + format_double(t));
    throw DomainError("t=" + format_double(t) + " beyond profile domain end " +
                      format_double(p.domain_end()));
  }
}

Jet sampled_jet(const SampledSrc& s, double t) {
  auto it = std::upper_bound(s.t.begin(), s.t.end(), t);
  std::size_t i = it == s.t.begin() ? 0 : static_cast<std::size_t>(it - s.t.begin()) - 1;
  if (i + 1 >= s.t.size()) i = s.t.size() - 2;
  const double h = s.t[i + 1] - s.t[i];
  const double u = (t - s.t[i]) / h;
  const double y0 = s.v[i], y1 = s.v[i + 1];
  const double m0 = s.slope[i] * h, m1 = s.slope[i + 1] * h;
  const double u2 = u * u, u3 = u2 * u;
  const double value = (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * m0 +
                       (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * m1;
  const double d1 = (6 * u2 - 6 * u) * y0 + (3 * u2 - 4 * u + 1) * m0 + (-6 * u2 + 6 * u) * y1 +
                    (3 * u2 - 2 * u) * m1;
  const double d2 = (12 * u - 6) * y0 + (6 * u - 4) * m0 + (-12 * u + 6) * y1 + (6 * u - 2) * m1;
  return {value, d1 / h, d2 / (h * h)};
}

// Index of the step containing t, or -1.
int step_index(const StepSrc& s, double t) {
  const double fl = std::floor(t);
  if (fl < s.d.l_min || fl > s.d.l_max) return -1;
  const int i = static_cast<int>(fl) - s.d.l_min;
  if (t - fl < s.width[static_cast<std::size_t>(i)]) return i;
  return -1;
}

Jet step_jet(const StepSrc& s, double t) {
  const int i = step_index(s, t);
  if (i < 0) return {0.0, 0.0, 0.0};
  const auto k = static_cast<std::size_t>(i);
  const double H = s.height[k];
  if (!s.smoothed) return {H, 0.0, 0.0};
  const double e = s.edge[k];
  const double local = t - std::floor(t);
  const double w = s.width[k];
  if (local < e) {
    const double u = local / e;
    return {H * smooth(u), H * smooth_d1(u) / e, H * smooth_d2(u) / (e * e)};
  }
  if (local > w - e) {
    const double u = (w - local) / e;
    return {H * smooth(u), -H * smooth_d1(u) / e, H * smooth_d2(u) / (e * e)};
  }
  return {H, 0.0, 0.0};
}

double step_cumulative(const StepSrc& s, double t) {
  const double fl = std::floor(t);
  if (fl < s.d.l_min) return 0.0;
  if (fl > s.d.l_max) return s.prefix.back();
  const auto k = static_cast<std::size_t>(static_cast<int>(fl) - s.d.l_min);
  const double H = s.height[k], w = s.width[k], e = s.edge[k];
  const double local = t - fl;
  const double full = s.prefix[k + 1] - s.prefix[k];
  double part;
  if (local >= w) {
    part = full;
  } else if (!s.smoothed) {
    part = H * local;
  } else if (local < e) {
    part = H * e * smooth_int(local / e);
  } else if (local <= w - e) {
    part = H * e * 0.5 + H * (local - e);
  } else {
    part = full - H * e * smooth_int((w - local) / e);
  }
  return s.prefix[k] + part;
}

Jet ramp_jet(double r0, double t) {
  const double a = 0.5 * r0, len = 0.5 * r0;
  if (t <= a) return {0.0, 0.0, 0.0};
  if (t >= r0) return {1.0, 0.0, 0.0};
  const double u = (t - a) / len;
  return {smooth(u), smooth_d1(u) / len, smooth_d2(u) / (len * len)};
}

}  // namespace

double GeneratorProfile::value(double t) const {
  check_domain(*this, t);
  return std::visit(
      [t](const auto& src) -> double {
        using S = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<S, ClosedFormSrc>) {
          return evaluate(src.expr, t);
        } else if constexpr (std::is_same_v<S, SampledSrc>) {
          return sampled_jet(src, t).value;
        } else if constexpr (std::is_same_v<S, StepSrc>) {
          return step_jet(src, t).value;
        } else {
          return ramp_jet(src.r0, t).value;
        }
      },
      impl_->src);
}

Jet GeneratorProfile::jet(double t) const {
  check_domain(*this, t);
  return std::visit(
      [t](const auto& src) -> Jet {
        using S = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<S, ClosedFormSrc>) {
          return evaluate_jet(src.expr, t);
        } else if constexpr (std::is_same_v<S, SampledSrc>) {
          return sampled_jet(src, t);
        } else if constexpr (std::is_same_v<S, StepSrc>) {
          return step_jet(src, t);
        } else {
          return ramp_jet(src.r0, t);
        }
      },
      impl_->src);
}

std::vector<double> GeneratorProfile::breakpoints(double lo, double hi) const {
  std::vector<double> out;
  auto keep = [&](double b) {
    if (b > lo && b < hi) out.push_back(b);
  };
  if (const auto* s = std::get_if<SampledSrc>(&impl_->src)) {
    for (double t : s->t) keep(t);
  } else if (const auto* s = std::get_if<StepSrc>(&impl_->src)) {
    for (std::size_t k = 0; k < s->height.size(); ++k) {
      const double a = static_cast<double>(s->d.l_min) + static_cast<double>(k);
      keep(a);
      if (s->smoothed) {
        keep(a + s->edge[k]);
        keep(a + s->width[k] - s->edge[k]);
      }
      keep(a + s->width[k]);
    }
  } else if (const auto* s = std::get_if<RampSrc>(&impl_->src)) {
    keep(0.5 * s->r0);
    keep(s->r0);
  }
  return out;
}

std::optional<double> GeneratorProfile::cumulative(double t) const {
  if (const auto* s = std::get_if<StepSrc>(&impl_->src)) return step_cumulative(*s, t);
  return std::nullopt;
}

std::optional<double> GeneratorProfile::total_mass() const {
  if (const auto* s = std::get_if<StepSrc>(&impl_->src)) return s->prefix.back();
  return std::nullopt;
}

const ExprAst* GeneratorProfile::expression() const {
  const auto* s = std::get_if<ClosedFormSrc>(&impl_->src);
  return s ? &s->expr : nullptr;
}

const StepFamilyDescriptor* GeneratorProfile::descriptor() const {
  const auto* s = std::get_if<StepSrc>(&impl_->src);
  return s ? &s->d : nullptr;
}

bool GeneratorProfile::smoothed() const {
  const auto* s = std::get_if<StepSrc>(&impl_->src);
  return s && s->smoothed;
}

double GeneratorProfile::ramp_r0() const {
  const auto* s = std::get_if<RampSrc>(&impl_->src);
  return s ? s->r0 : std::numeric_limits<double>::quiet_NaN();
}

const std::vector<double>& GeneratorProfile::sample_t() const {
  static const std::vector<double> empty;
  const auto* s = std::get_if<SampledSrc>(&impl_->src);
  return s ? s->t : empty;
}

const std::vector<double>& GeneratorProfile::sample_v() const {
  static const std::vector<double> empty;
  const auto* s = std::get_if<SampledSrc>(&impl_->src);
  return s ? s->v : empty;
}

std::string GeneratorProfile::describe() const {
  std::string out = std::string(kind_name(kind())) + ":";
  switch (source()) {
    case Source::ClosedForm:
      return out + to_string(*expression());
    case Source::Sampled:
      return out + "samples(" + std::to_string(sample_t().size()) + ")";
    case Source::StepFamily: {
      const auto& d = *descriptor();
      out += smoothed() ? "smoothed_steps(" : "steps(";
      out += "height=l^" + format_double(d.height_exponent) + ",width=l^-" +
             format_double(d.width_exponent) + ",l=" + std::to_string(d.l_min) + ".." +
             std::to_string(d.l_max);
      if (smoothed()) out += ",factor=" + format_double(d.smoothing_width_factor);
      return out + ")";
    }
    case Source::Ramp:
      return out + "ramp(r0=" + format_double(ramp_r0()) + ")";
  }
  return out;
}

double eval_profile(const GeneratorProfile& p, double t) { return p.value(t); }

// ---------------------------------------------------------------------------
// Validation

std::vector<double> default_validation_grid(double domain_end) {
  const double hi = std::isfinite(domain_end) ? domain_end : 1e8;
  const double lo = 1e-8 * std::min(1.0, hi);
  constexpr int kPoints = 512;
  std::vector<double> g;
  g.reserve(kPoints + 1);
  g.push_back(0.0);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < kPoints; ++i) {
    const double t = i == kPoints - 1 ? hi : std::exp(a + (b - a) * i / (kPoints - 1));
    g.push_back(t);
  }
  return g;
}

namespace {

constexpr double kXiAtZeroTol = 1e-12;
constexpr double kSlopeTol = -1e-9;
constexpr double kXiCeilingTol = 1e-12;

void check_grid(const std::vector<double>& grid) {
  if (grid.empty() || grid.front() != 0.0) throw ModelError("validation grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ModelError("validation grid must increase strictly");
}

// Evaluates p on the grid, recording points where evaluation fails.
std::vector<double> sample_on(const GeneratorProfile& p, const std::vector<double>& grid,
                              ValidationReport& rep) {
  std::vector<double> vals(grid.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    try {
      vals[i] = p.value(grid[i]);
    } catch (const DomainError&) {
      rep.violations.push_back({"evaluable", grid[i], std::numeric_limits<double>::quiet_NaN()});
    }
  }
  return vals;
}

}  // namespace

ValidationReport validate_xi(const GeneratorProfile& p, const std::vector<double>& grid) {
  check_grid(grid);
  ValidationReport rep;
  rep.grid_used = grid;
  if (p.kind() != ProfileKind::Xi) {
    rep.violations.push_back({"kind_is_xi", 0.0, 0.0});
    rep.ok = false;
    return rep;
  }
  const auto vals = sample_on(p, grid, rep);
  if (std::isfinite(vals[0]) && std::abs(vals[0]) > kXiAtZeroTol)
    rep.violations.push_back({"xi(0)=0", 0.0, vals[0]});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::isfinite(vals[i]) && vals[i] > 1.0 + kXiCeilingTol)
      rep.violations.push_back({"xi<=1", grid[i], vals[i]});
    if (i > 0 && std::isfinite(vals[i]) && std::isfinite(vals[i - 1])) {
      const double slope = (vals[i] - vals[i - 1]) / (grid[i] - grid[i - 1]);
      if (slope < kSlopeTol) rep.violations.push_back({"xi'>=0", grid[i], slope});
    }
  }
  rep.ok = rep.violations.empty();
  return rep;
}

ValidationReport validate_xi(const GeneratorProfile& p) {
  return validate_xi(p, default_validation_grid(p.domain_end()));
}

ValidationReport validate_F(const GeneratorProfile& p, const std::vector<double>& grid) {
  check_grid(grid);
  ValidationReport rep;
  rep.grid_used = grid;
  if (p.kind() != ProfileKind::Fpp) {
    rep.violations.push_back({"kind_is_fpp", 0.0, 0.0});
    rep.ok = false;
    return rep;
  }
  const auto vals = sample_on(p, grid, rep);
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::isfinite(vals[i]) && vals[i] < kSlopeTol) rep.violations.push_back({"F''>=0", grid[i], vals[i]});

  // F'(infinity): exact for step families, otherwise cell-wise Gauss-Kronrod.
  if (auto m = p.total_mass()) {
    rep.fprime_infinity = *m;
    rep.integral_converges = true;
  } else if (rep.violations.empty()) {
    std::vector<double> cum(grid.size(), 0.0);
    auto f = [&](double t) { return p.value(t); };
    bool finite = true;
    for (std::size_t i = 1; i < grid.size() && finite; ++i) {
      cum[i] = cum[i - 1] +
               detail::gk15(f, grid[i - 1], grid[i], 1e-12, 10);
      finite = std::isfinite(cum[i]);
    }
    const double end = grid.back();
    const auto it = std::upper_bound(grid.begin(), grid.end(), end / 10.0);
    const std::size_t j = static_cast<std::size_t>(it - grid.begin()) - 1;
    const double total = cum.back();
    rep.integral_converges =
        finite && j > 0 && std::abs(total - cum[j]) <= 1e-6 * std::max(1.0, std::abs(total));
    if (rep.integral_converges) rep.fprime_infinity = total;
  }
  rep.ok = rep.violations.empty();
  return rep;
}

ValidationReport validate_F(const GeneratorProfile& p) {
  return validate_F(p, default_validation_grid(p.domain_end()));
}

}  // namespace cvlab
