#include "cvlab/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "cvlab/curvature.hpp"
#include "cvlab/error.hpp"
#include "cvlab/families.hpp"
#include "cvlab/format.hpp"
#include "cvlab/integrals.hpp"

namespace cvlab {

namespace {

struct UsageError : Error {
  using Error::Error;
};

struct RunConfig {
  std::string command;
  std::string expr;
  std::string kind = "xi";
  std::string profile_path;
  std::string family;
  std::optional<int> n, k;
  std::string mode = "sigma";
  std::optional<double> r_max, x_max, tol;
  std::optional<int> grid;
  std::string out;
  std::string format;
  double window = 0.5;
  std::optional<double> fit_x_lo, fit_x_hi;
  int points = 64;
  bool serial = false;
  // family parameters; unset ones keep the family defaults
  std::optional<double> a, r0, p, alpha, beta, smoothing;
  std::optional<int> l_max;
  std::string shape;
};

struct Source {
  GeneratorProfile profile = GeneratorProfile::ramp(1.0);
  std::optional<FamilySpec> family;
  int n = 2;
  int k = 2;
};

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

std::optional<double> env_number(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || v[used] != '\0') throw UsageError(std::string(name) + " is not a number: " + v);
  return d;
}

Source resolve_source(const RunConfig& c) {
  const int given = !c.family.empty() + !c.profile_path.empty() + !c.expr.empty();
  if (given != 1) throw UsageError("give exactly one of --expr, --profile, --family");
  Source src;
  auto apply_family = [&](FamilySpec spec) {
    if (c.n) spec.n = *c.n;
    if (c.k) spec.k = *c.k;
    if (c.a) spec.a = *c.a;
    if (c.r0) spec.r0 = *c.r0;
    if (c.p) spec.p = *c.p;
    if (c.alpha) spec.alpha = *c.alpha;
    if (c.beta) spec.beta = *c.beta;
    if (c.smoothing) spec.smoothing = *c.smoothing;
    if (c.l_max) spec.l_max = *c.l_max;
    if (!c.shape.empty()) spec.shape = c.shape == "exponential" ? XiShape::Exponential : XiShape::Rational;
    src.profile = family_profile(spec);
    src.n = spec.n;
    src.k = spec.k;
    src.family = spec;
  };
  if (!c.family.empty()) {
    FamilySpec spec;
    spec.family = c.family;
    if (c.family != "yau" && c.family != "lp") spec.n = 2;
    if (c.family == "lp") spec.k = 2;
    apply_family(spec);
    return src;
  }
  if (!c.profile_path.empty()) {
    ProfileFields fields;
    try {
      fields = read_profile_file(c.profile_path);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    auto kind = fields.find("kind");
    if (kind != fields.end() && kind->second == "family") {
      apply_family(family_from_fields(fields));
      return src;
    }
    const auto dir = std::filesystem::path(c.profile_path).parent_path().string();
    src.profile = profile_from_fields(fields, dir);
  } else {
    src.profile = GeneratorProfile::closed_form(parse_kind(c.kind), parse_expression(c.expr));
  }
  src.n = c.n.value_or(2);
  src.k = c.k.value_or(src.n);
  return src;
}

BuildOptions build_options(const RunConfig& c, const Source& src) {
  BuildOptions o = src.family ? family_options(*src.family) : BuildOptions{};
  if (auto g = env_number("CVLAB_GRID")) o.grid_size = static_cast<int>(*g);
  if (auto t = env_number("CVLAB_TOL")) o.tolerance = *t;
  if (auto r = env_number("CVLAB_RMAX")) o.r_max = *r;
  if (c.grid) o.grid_size = *c.grid;
  if (c.tol) o.tolerance = *c.tol;
  if (c.r_max) o.r_max = *c.r_max;
  if (c.x_max) o.x_max = *c.x_max;
  if (c.serial) o.policy = ExecPolicy::Serial;
  return o;
}

std::string metric_name(const Source& src) {
  if (src.family) return "family=" + src.family->family;
  return src.profile.describe();
}

nlohmann::json classification_json(const MetricModel& m) {
  const auto& c = m.classification();
  return {{"class", class_name(c.cls)},
          {"xi_infinity", num(c.xi_infinity)},
          {"x0", num(c.x0)},
          {"r0", num(c.r0)},
          {"volume_growth", volume_growth_name(c.volume_growth)},
          {"ambiguous", c.ambiguous},
          {"complete", completeness_check(m)}};
}

std::string key_value_csv(const nlohmann::json& j) {
  std::string out = "field,value\n";
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& v = it.value();
    std::string s;
    if (v.is_string())
      s = v.get<std::string>();
    else if (v.is_number_float())
      s = format_double(v.get<double>());
    else
      s = v.dump();
    out += it.key() + ',' + s + '\n';
  }
  return out;
}

class Runner {
 public:
  Runner(const RunConfig& c, std::ostream& out, std::ostream& err) : c_(c), out_(out), err_(err) {}

  int run() {
    if (c_.command == "validate") return validate();
    const Source src = resolve_source(c_);
    const BuildOptions opts = build_options(c_, src);
    const MetricModel m = build_metric(src.profile, src.n, opts);
    if (c_.command == "classify") return classify(m);
    if (c_.command == "curvature-table") return table(m, opts);
    if (c_.command == "series") return series(m, src, opts);
    if (c_.command == "chern") return chern(m);
    if (c_.command == "report") return report(m, src, opts);
    throw UsageError("unknown command " + c_.command);
  }

 private:
  bool json() const { return c_.format == "json"; }

  void emit(const std::string& text) {
    if (c_.out.empty())
      out_ << text;
    else
      write_file_atomic(c_.out, text);
  }

  int validate() {
    const Source src = resolve_source(c_);
    const ValidationReport rep = validate_profile(src.profile);
    nlohmann::json v = nlohmann::json::array();
    for (const auto& x : rep.violations)
      v.push_back({{"condition", x.condition}, {"t", num(x.t)}, {"observed", num(x.observed)}});
    nlohmann::json j{{"ok", rep.ok},
                     {"kind", kind_name(src.profile.kind())},
                     {"violations", v},
                     {"grid_points", rep.grid_used.size()},
                     {"integral_converges", rep.integral_converges}};
    j["fprime_infinity"] = rep.fprime_infinity ? num(*rep.fprime_infinity) : nlohmann::json(nullptr);
    emit(j.dump(2) + "\n");
    return rep.ok ? 0 : 1;
  }

  int classify(const MetricModel& m) {
    const auto j = classification_json(m);
    emit(json() ? j.dump(2) + "\n" : key_value_csv(j));
    return 0;
  }

  int table(const MetricModel& m, const BuildOptions& o) {
    const auto rows = curvature_table(m, o.policy);
    if (!json()) {
      emit(curvature_table_csv(rows));
      return 0;
    }
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows)
      arr.push_back({{"r", num(r.r)}, {"x", num(r.x)}, {"A", num(r.A)}, {"B", num(r.B)}, {"C", num(r.C)},
                     {"lambda", num(r.lambda)}, {"mu", num(r.mu)}, {"R", num(r.R)}});
    emit(nlohmann::json{{"n", m.n()}, {"rows", arr}}.dump(2) + "\n");
    return 0;
  }

  BallIntegralSeries make_series(const MetricModel& m, int k, const BuildOptions& o) const {
    const auto grid = default_s_grid(m, c_.points);
    const IntegralOptions io{o.tolerance, o.policy};
    if (c_.mode == "sigma") return normalized_sigma_series(m, k, grid, io);
    if (c_.mode == "chern") return normalized_chern_series(m, k, grid, io);
    if (c_.mode == "scalar") return normalized_scalar_series(m, grid, io);
    if (c_.mode == "lp") return lp_series(m, c_.p.value_or(2.0), grid, io);
    throw UsageError("unknown mode " + c_.mode);
  }

  GrowthFit fit(const MetricModel& m, const BallIntegralSeries& s) const {
    if (c_.fit_x_lo || c_.fit_x_hi) {
      const double lo = c_.fit_x_lo ? distance_s_x(m, *c_.fit_x_lo) : s.rows.front().s;
      const double hi = c_.fit_x_hi ? distance_s_x(m, *c_.fit_x_hi) : s.rows.back().s;
      return growth_fit_window(s, lo, hi);
    }
    return growth_fit(s, c_.window);
  }

  int series(const MetricModel& m, const Source& src, const BuildOptions& o) {
    const auto s = make_series(m, src.k, o);
    const auto f = fit(m, s);
    if (json()) {
      nlohmann::json j{{"metric", metric_name(src)}, {"n", m.n()}, {"k", src.k}, {"mode", c_.mode},
                       {"series", series_json(s)}, {"fit", fit_json(f)}};
      emit(j.dump(2) + "\n");
      return 0;
    }
    emit(series_csv(s));
    std::ostream& note = c_.out.empty() ? err_ : out_;
    note << "fit slope=" << format_double(f.slope) << " residual=" << format_double(f.residual)
         << " verdict=" << verdict_name(f.verdict) << "\n";
    return 0;
  }

  int chern(const MetricModel& m) {
    const ChernNumber c = chern_number(m);
    nlohmann::json j{{"value", num(c.value)},       {"expected", num(c.expected)}, {"bound", num(c.bound)},
                     {"raw", num(c.raw)},           {"table_part", num(c.table_part)},
                     {"tail", num(c.tail)},         {"tail_share", num(c.tail_share)}};
    emit(json() ? j.dump(2) + "\n" : key_value_csv(j));
    return 0;
  }

  int report(const MetricModel& m, const Source& src, const BuildOptions& o) {
    const auto s = make_series(m, src.k, o);
    const auto f = fit(m, s);
    nlohmann::json j{{"metric", metric_name(src)},
                     {"n", m.n()},
                     {"k", src.k},
                     {"mode", c_.mode},
                     {"classification", classification_json(m)},
                     {"fit", fit_json(f)}};
    const auto& cls = m.classification();
    if (cls.cls != MetricClass::Flat) {
      const VolumeLimit vl = volume_growth_limit(m);
      nlohmann::json cand = nlohmann::json::object();
      for (const auto& [name, value] : vl.candidates) cand[name] = num(value);
      j["volume_limit"] = {{"exponent", vl.exponent}, {"measured", num(vl.measured)},
                           {"lhopital", num(vl.lhopital)}, {"candidates", cand}, {"matches", vl.matches}};
    }
    if (std::isfinite(cls.xi_infinity)) {
      const ChernNumber c = chern_number(m);
      j["chern_number"] = {{"value", num(c.value)}, {"expected", num(c.expected)}, {"tail_share", num(c.tail_share)}};
    }
    emit(j.dump(2) + "\n");
    return 0;
  }

  const RunConfig& c_;
  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Radial U(n)-invariant Kahler metrics: curvature and ball-integral experiments", "cvlab"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--expr", c.expr, "generator expression in t");
    sub->add_option("--kind", c.kind, "what --expr describes")->check(CLI::IsMember({"xi", "fpp", "h"}));
    sub->add_option("--profile", c.profile_path, "profile file (key=value lines)");
    sub->add_option("--family", c.family, "built-in family")->check(CLI::IsMember({"yau", "lp", "s3", "poly"}));
    sub->add_option("--n", c.n, "complex dimension")->check(CLI::Range(2, 64));
    sub->add_option("--k", c.k, "curvature degree")->check(CLI::Range(1, 64));
    sub->add_option("--a", c.a, "poly: xi(inf)");
    sub->add_option("--shape", c.shape, "poly: rational or exponential")
        ->check(CLI::IsMember({"rational", "exponential"}));
    sub->add_option("--r0", c.r0, "s3: end of the ramp");
    sub->add_option("--p", c.p, "lp: exponent");
    sub->add_option("--alpha", c.alpha, "lp: height exponent");
    sub->add_option("--beta", c.beta, "lp: width exponent");
    sub->add_option("--lmax", c.l_max, "yau/lp: last step")->check(CLI::Range(2, 10000));
    sub->add_option("--smoothing", c.smoothing, "yau/lp: transition width factor");
    sub->add_option("--rmax", c.r_max, "end of the r range");
    sub->add_option("--xmax", c.x_max, "end of the x range (kind fpp)");
    sub->add_option("--grid", c.grid, "grid size")->check(CLI::Range(8, 1 << 24));
    sub->add_option("--tol", c.tol, "relative tolerance of ball integrals");
    sub->add_option("--out", c.out, "write to this file instead of stdout");
    sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--serial", c.serial, "run every kernel on one thread");
  };
  auto series_opts = [&](CLI::App* sub) {
    sub->add_option("--mode", c.mode, "sigma, chern, scalar or lp")
        ->check(CLI::IsMember({"sigma", "chern", "scalar", "lp"}));
    sub->add_option("--window", c.window, "trailing fraction of the log-s range to fit")
        ->check(CLI::Range(1e-6, 1.0));
    sub->add_option("--fit-xlo", c.fit_x_lo, "fit window start, given in x");
    sub->add_option("--fit-xhi", c.fit_x_hi, "fit window end, given in x");
    sub->add_option("--points", c.points, "number of geodesic radii")->check(CLI::Range(16, 100000));
  };

  const std::pair<const char*, const char*> commands[] = {
      {"validate", "check a generator against the curvature conditions"},
      {"classify", "build the metric and report its class"},
      {"curvature-table", "A, B, C, Ricci eigenvalues and R on the grid"},
      {"series", "normalized ball integrals and their growth fit"},
      {"chern", "integral of Ric^n against its closed form"},
      {"report", "classification, growth fit, volume limit and Chern number"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    common(sub);
    if (std::string(name) == "series" || std::string(name) == "report") series_opts(sub);
    sub->callback([&c, name] { c.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c.format.empty()) c.format = (c.command == "validate" || c.command == "report") ? "json" : "csv";
    if (c.k && c.n && *c.k > *c.n && (c.mode == "sigma" || c.mode == "chern"))
      throw UsageError("k must not exceed n");
    return Runner(c, out, err).run();
  } catch (const QuadratureError& e) {
    err << "cvlab: quadrature failed: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    err << "cvlab: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    err << "cvlab: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "cvlab: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace cvlab
