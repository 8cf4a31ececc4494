#include "cvlab/metric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "cvlab/error.hpp"
#include "cvlab/format.hpp"
#include "metric_data.hpp"
#include "quadrature.hpp"

namespace cvlab {

using detail::kChebNodes;
using detail::NodeArray;
using detail::Piece;

const char* representation_name(Representation r) {
  switch (r) {
    case Representation::FromXi: return "FromXi";
    case Representation::FromF: return "FromF";
    case Representation::FromH: return "FromH";
  }
  return "?";
}

const char* class_name(MetricClass c) {
  switch (c) {
    case MetricClass::Flat: return "Flat";
    case MetricClass::S1: return "S1";
    case MetricClass::S2: return "S2";
    case MetricClass::S3: return "S3";
  }
  return "?";
}

const char* volume_growth_name(VolumeGrowth g) {
  switch (g) {
    case VolumeGrowth::Euclidean: return "Euclidean";
    case VolumeGrowth::SubEuclidean: return "SubEuclidean";
    case VolumeGrowth::HalfEuclidean: return "HalfEuclidean";
  }
  return "?";
}

double fprime_from_xi(double xi) {
  if (xi >= 1.0) return std::numeric_limits<double>::infinity();
  if (xi <= 0.0) return 0.0;
  return std::sqrt(xi * (2.0 - xi)) / (1.0 - xi);
}

double xi_from_fprime(double fp) {
  if (std::isinf(fp)) return 1.0;
  // 1 - 1/S = fp^2 / (S (S + 1)) with S = sqrt(1 + fp^2).
  const double S = std::hypot(1.0, fp);
  return fp * fp / (S * (S + 1.0));
}

namespace detail {

constexpr double kTailTol = 1e-13;
constexpr int kMaxDepth = 40;
// Per-leaf absolute error allowed in log h (or F'). Generators evaluated with
// cancellation near t = 0 produce a rounding staircase that a relative test
// alone would chase down to kMaxDepth.
constexpr double kLogHAbsTol = 1e-18;
constexpr double kLogROverflow = 690.0;

std::size_t MetricData::piece_of(double t) const {
  auto it = std::upper_bound(starts.begin(), starts.end(), t);
  if (it == starts.begin()) return 0;
  return static_cast<std::size_t>(it - starts.begin()) - 1;
}

XiJet MetricData::xi_at_r(double r) const {
  if (repr == Representation::FromXi) {
    const Jet j = profile.jet(r);
    return {j.value, j.d1};
  }
  // xi = -r h'/h from the h profile.
  const Jet j = profile.jet(r);
  const double g = j.d1 / j.value;
  const double g1 = j.d2 / j.value - g * g;
  return {-r * g, -g - r * g1};
}

RadialPoint MetricData::point(std::size_t k, double t) const {
  const Piece& p = pieces[k];
  auto at = [&](const NodeArray& a) { return interpolate(a, p.a, p.b, t); };
  RadialPoint q;
  q.s = at(p.s);
  q.v = at(p.v);
  q.w = at(p.w);
  const double G = at(p.G);
  if (r_domain) {
    const double u = t;
    q.r = u * u;
    q.log_h = std::log(h0) - G;
    q.h = h0 * std::exp(-G);
    q.x = u * std::sqrt(q.h);
    const XiJet xj = xi_at_r(q.r);
    q.xi = xj.xi;
    q.dxi_dr = xj.dxi;
    q.dv_dt = 2.0 * u * q.h;
    q.fprime = fprime_from_xi(q.xi);
    if (q.r == 0.0) {
      q.fpp = std::sqrt(std::max(0.0, 2.0 * q.dxi_dr / h0));
    } else if (q.xi >= 1.0) {
      q.fpp = std::numeric_limits<double>::infinity();
    } else if (q.xi <= 0.0) {
      q.fpp = 0.0;
    } else {
      const double om = 1.0 - q.xi;
      q.fpp = q.dxi_dr * 2.0 * std::sqrt(q.r / q.h) / (std::sqrt(q.xi * (2.0 - q.xi)) * om * om * om);
    }
  } else {
    const double x = t;
    const double L = at(p.L);
    q.x = x;
    q.fprime = G;
    q.fpp = profile.value(x);
    q.log_h = std::log(h0) + L;
    q.h = h0 * std::exp(L);
    q.r = x * x / q.h;
    const double S = std::hypot(1.0, G);
    q.xi = G * G / (S * (S + 1.0));
    if (x == 0.0) {
      q.dxi_dr = 0.5 * q.fpp * q.fpp * h0;
    } else {
      const double S2 = S * S;
      q.dxi_dr = G * q.fpp * q.h / (2.0 * x * S2 * S2);
    }
    q.dv_dt = 2.0 * x * S;
  }
  q.f = q.r > 0.0 ? q.v / q.r : q.h;
  return q;
}

namespace {

struct Leaf {
  double a, b;
  NodeArray t;
  std::array<NodeArray, 4> cum;
  int depth;
};

// Adaptive bisection until every channel's Chebyshev tail is negligible.
// eval(t, out) fills `channels` integrand arrays at the nodes t.
template <class Eval>
//
// Channel 2, when present, integrates xi times channel 1 with |xi| <= 1. The
// generator is only known to absolute rounding, so its noise scales with
// channel 1 rather than with itself.
void refine(double a, double b, int channels, const Eval& eval, std::vector<Leaf>& out,
            double& worst, double abs_tol = 0.0, int depth = 0) {
  const NodeArray t = mapped_nodes(a, b);
  std::array<NodeArray, 4> f{};
  eval(t, f);
  Leaf leaf{a, b, t, {}, depth};
  bool ok = true;
  double rel = 0.0;
  for (int c = 0; c < channels; ++c) {
    for (double v : f[static_cast<std::size_t>(c)])
      if (!std::isfinite(v))
        throw QuadratureError("non-finite integrand on [" + format_double(a) + ", " + format_double(b) + "]",
                              std::numeric_limits<double>::infinity());
    const auto& fc = f[static_cast<std::size_t>(c)];
    const Cumulative cu = cumulative_integral(fc, a, b);
    leaf.cum[static_cast<std::size_t>(c)] = cu.values;
    // Nodes carry an absolute rounding error of eps*|t|; variation of f over
    // that distance is noise no amount of bisection can remove.
    const auto [lo, hi] = std::minmax_element(fc.begin(), fc.end());
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                         std::max(std::abs(a), std::abs(b)) / (b - a) * (*hi - *lo);
    double floor = std::max(noise, abs_tol / (0.5 * (b - a)));
    if (c == 2) {
      const auto& f1 = f[1];
      double s1 = 0.0;
      for (double v : f1) s1 = std::max(s1, std::abs(v));
      floor = std::max(floor, 64.0 * std::numeric_limits<double>::epsilon() * s1);
    }
    if (cu.tail > std::max(kTailTol * cu.scale, floor)) {
      ok = false;
      rel = std::max(rel, cu.tail / cu.scale);
    }
  }
  const bool tiny = (b - a) <= 1e-13 * std::max(std::abs(a), std::abs(b));
  if (ok || tiny || depth >= kMaxDepth) {
    if (!ok) worst = std::max(worst, rel);
    out.push_back(leaf);
    return;
  }
  const double m = 0.5 * (a + b);
  refine(a, m, channels, eval, out, worst, abs_tol, depth + 1);
  refine(m, b, channels, eval, out, worst, abs_tol, depth + 1);
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(static_cast<std::size_t>(count));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

// Geometric (Aitken) extrapolation of y3 from three equally log-spaced samples.
double extrapolate(double y1, double y2, double y3, bool& converging) {
  const double d1 = y2 - y1, d2 = y3 - y2;
  converging = true;
  if (d2 == 0.0) return y3;
  if (d1 == 0.0 || d1 * d2 < 0.0) return y3;
  const double rho = d2 / d1;
  if (rho >= 0.9) {
    converging = false;
    return y3;
  }
  return y3 + d2 * rho / (1.0 - rho);
}

ValidationReport validation_report(const GeneratorProfile& p, const MetricData& d) {
  ValidationReport rep;
  switch (p.kind()) {
    case ProfileKind::Xi:
      rep = validate_xi(p);
      break;
    case ProfileKind::Fpp:
      rep = validate_F(p);
      break;
    case ProfileKind::H: {
      // h > 0 and the induced xi must satisfy the xi conditions.
      const auto grid = default_validation_grid(p.domain_end());
      double prev = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        double h = 0.0, xi = 0.0;
        try {
          h = p.value(grid[i]);
          xi = d.xi_at_r(grid[i]).xi;
        } catch (const DomainError&) {
          rep.violations.push_back({"evaluable", grid[i], std::numeric_limits<double>::quiet_NaN()});
          continue;
        }
        if (!(h > 0.0)) rep.violations.push_back({"h>0", grid[i], h});
        if (xi > 1.0 + 1e-12) rep.violations.push_back({"xi<=1", grid[i], xi});
        if (i > 0 && (xi - prev) / (grid[i] - grid[i - 1]) < -1e-9)
          rep.violations.push_back({"xi'>=0", grid[i], xi - prev});
        prev = xi;
      }
      rep.ok = rep.violations.empty();
      break;
    }
  }
  return rep;
}

void validate_or_throw(const GeneratorProfile& p, const MetricData& d) {
  const ValidationReport rep = validation_report(p, d);
  if (!rep.ok) {
    const auto& v = rep.violations.front();
    throw ModelError("invalid " + std::string(kind_name(p.kind())) + " profile: " + v.condition +
                     " fails at t=" + format_double(v.t) + " (observed " + format_double(v.observed) +
                     ")");
  }
}

}  // namespace

}  // namespace detail

// ---------------------------------------------------------------------------

int MetricModel::n() const { return data_->n; }
Representation MetricModel::repr() const { return data_->repr; }
bool MetricModel::r_domain() const { return data_->r_domain; }
const GeneratorProfile& MetricModel::profile() const { return data_->profile; }
const ClassificationResult& MetricModel::classification() const { return data_->cls; }
const BuildOptions& MetricModel::options() const { return data_->opts; }
const std::vector<double>& MetricModel::grid() const { return data_->grid; }
double MetricModel::c_n() const { return data_->cn; }
std::size_t MetricModel::piece_count() const { return data_->pieces.size(); }
double MetricModel::native_end() const { return data_->pieces.back().b; }
double MetricModel::r_end() const { return data_->end_r.back(); }
double MetricModel::s_end() const { return data_->end_s.back(); }
double MetricModel::v_end() const { return data_->pieces.back().v[kChebNodes - 1]; }

RadialPoint MetricModel::at_native(double t) const {
  if (!(t >= 0.0) || t > native_end() * (1.0 + 1e-15))
    throw ModelError("radius outside the tabulated range: " + format_double(t));
  t = std::min(t, native_end());
  return data_->point(data_->piece_of(t), t);
}

std::vector<RadialPoint> MetricModel::grid_points() const {
  std::vector<RadialPoint> out;
  out.reserve(grid().size());
  for (double g : grid()) {
    const double t = data_->r_domain ? std::sqrt(g) : g;
    if (t > native_end()) break;
    out.push_back(at_native(t));
  }
  return out;
}

std::vector<RadialPoint> MetricModel::node_points() const {
  std::vector<RadialPoint> out;
  out.reserve(data_->pieces.size() * (kChebNodes - 1) + 1);
  for (std::size_t k = 0; k < data_->pieces.size(); ++k) {
    const auto& p = data_->pieces[k];
    for (int j = (k == 0 ? 0 : 1); j < kChebNodes; ++j) out.push_back(data_->point(k, p.t[static_cast<std::size_t>(j)]));
  }
  return out;
}

namespace {

// Solves q(t) = target for t in the piece whose end values bracket it.
template <class Q>
double invert(const detail::MetricData& d, const std::vector<double>& ends, double target, Q q,
              const char* what) {
  if (!(target >= 0.0) || target > ends.back() * (1.0 + 1e-13))
    throw ModelError(std::string(what) + "=" + format_double(target) + " outside the tabulated range");
  if (target == 0.0) return 0.0;
  auto it = std::lower_bound(ends.begin(), ends.end(), target);
  if (it == ends.end()) return d.pieces.back().b;
  const auto k = static_cast<std::size_t>(it - ends.begin());
  const Piece& p = d.pieces[k];
  auto f = [&](double t) { return q(p, t) - target; };
  double fa = f(p.a), fb = f(p.b);
  if (fa >= 0.0) return p.a;
  if (fb <= 0.0) return p.b;
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(f, p.a, p.b, fa, fb,
                                             boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace

double MetricModel::native_of_s(double s) const {
  return invert(*data_, data_->end_s, s,
                [](const Piece& p, double t) { return detail::interpolate(p.s, p.a, p.b, t); }, "s");
}

double MetricModel::native_of_r(double r) const {
  if (data_->r_domain) {
    if (!(r >= 0.0) || r > r_end() * (1.0 + 1e-13))
      throw ModelError("r=" + format_double(r) + " outside the tabulated range");
    return std::min(std::sqrt(r), native_end());
  }
  const double h0 = data_->h0;
  return invert(*data_, data_->end_r, r,
                [h0](const Piece& p, double t) {
                  return t * t / (h0 * std::exp(detail::interpolate(p.L, p.a, p.b, t)));
                },
                "r");
}

double MetricModel::native_of_x(double x) const {
  if (!data_->r_domain) {
    if (!(x >= 0.0) || x > native_end() * (1.0 + 1e-15))
      throw ModelError("x=" + format_double(x) + " outside the tabulated range");
    return std::min(x, native_end());
  }
  const auto& c = data_->cls;
  if (c.cls == MetricClass::S3 && x >= c.x0 * (1.0 - 1e-12))
    throw ModelError("x=" + format_double(x) + " is not below x0=" + format_double(c.x0));
  const double h0 = data_->h0;
  return invert(*data_, data_->end_x, x,
                [h0](const Piece& p, double t) {
                  return t * std::sqrt(h0 * std::exp(-detail::interpolate(p.G, p.a, p.b, t)));
                },
                "x");
}

RadialPoint MetricModel::at_r(double r) const { return at_native(native_of_r(r)); }
RadialPoint MetricModel::at_x(double x) const { return at_native(native_of_x(x)); }
RadialPoint MetricModel::at_s(double s) const { return at_native(native_of_s(s)); }

nlohmann::json MetricModel::to_json() const {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return format_double(v);
  };
  nlohmann::json j;
  j["schema"] = 1;
  j["n"] = n();
  j["repr"] = representation_name(repr());
  j["profile"] = profile().describe();
  j["coordinate"] = r_domain() ? "r" : "x";
  const auto pts = grid_points();
  nlohmann::json grid = nlohmann::json::array(), r = grid, x = grid, h = grid, f = grid, xi = grid,
                 fp = grid, s = grid, v = grid;
  for (const auto& p : pts) {
    grid.push_back(num(r_domain() ? p.r : p.x));
    r.push_back(num(p.r));
    x.push_back(num(p.x));
    h.push_back(num(p.h));
    f.push_back(num(p.f));
    xi.push_back(num(p.xi));
    fp.push_back(num(p.fprime));
    s.push_back(num(p.s));
    v.push_back(num(p.v));
  }
  j["grid"] = grid;
  j["r"] = r;
  j["x"] = x;
  j["h"] = h;
  j["f"] = f;
  j["xi"] = xi;
  j["fprime"] = fp;
  j["s"] = s;
  j["v"] = v;
  const auto& c = classification();
  j["classification"] = {{"class", class_name(c.cls)},
                         {"xi_infinity", num(c.xi_infinity)},
                         {"x0", num(c.x0)},
                         {"r0", num(c.r0)},
                         {"volume_growth", volume_growth_name(c.volume_growth)},
                         {"ambiguous", c.ambiguous}};
  return j;
}

// ---------------------------------------------------------------------------

ValidationReport validate_profile(const GeneratorProfile& profile) {
  detail::MetricData d(profile);
  if (profile.kind() == ProfileKind::H) d.repr = Representation::FromH;
  return detail::validation_report(profile, d);
}

MetricModel build_metric(const GeneratorProfile& profile, int n, const BuildOptions& opts) {
  using namespace detail;
  if (n < 2) throw ModelError("complex dimension must be at least 2, got " + std::to_string(n));
  if (opts.grid_size < 8) throw ModelError("grid needs at least 8 points");

  auto d = std::make_shared<MetricData>(profile);
  d->n = n;
  d->opts = opts;
  switch (profile.kind()) {
    case ProfileKind::Xi: d->repr = Representation::FromXi; break;
    case ProfileKind::Fpp: d->repr = Representation::FromF; break;
    case ProfileKind::H: d->repr = Representation::FromH; break;
  }
  d->r_domain = d->repr != Representation::FromF;
  d->cn = std::pow(std::numbers::pi, n) / std::tgamma(n + 1.0);
  d->h0 = d->repr == Representation::FromH ? profile.value(0.0) : opts.h0;
  if (!(d->h0 > 0.0)) throw ModelError("h(0) must be positive");

  if (opts.validate) validate_or_throw(profile, *d);

  // Natural grid and cell edges in the native variable.
  const double lo = d->r_domain ? opts.r_min : opts.x_min;
  double hi = d->r_domain ? opts.r_max : opts.x_max;
  hi = std::min(hi, profile.domain_end());
  if (!(lo > 0.0 && hi > lo)) throw ModelError("empty radial range");
  d->grid = log_grid(lo, hi, opts.grid_size);
  d->grid.insert(d->grid.begin(), 0.0);

  std::vector<double> edges;
  edges.reserve(d->grid.size() + 64);
  for (double g : d->grid) edges.push_back(d->r_domain ? std::sqrt(g) : g);
  for (double b : profile.breakpoints(0.0, hi)) edges.push_back(d->r_domain ? std::sqrt(b) : b);
  std::sort(edges.begin(), edges.end());
  std::vector<double> cells;
  for (double e : edges)
    if (cells.empty() || e - cells.back() > 1e-14 * std::max(1.0, e)) cells.push_back(e);
  if (cells.back() < edges.back()) cells.back() = edges.back();
  const std::size_t ncells = cells.size() - 1;

  const bool rdom = d->r_domain;
  const double h0 = d->h0;
  const MetricData& md = *d;

  // Pass 1: G' (xi-driven log decay of h, or F'').
  auto g_integrand = [&](const NodeArray& t, std::array<NodeArray, 4>& f) {
    for (int j = 0; j < kChebNodes; ++j) {
      const double tj = t[static_cast<std::size_t>(j)];
      if (rdom) {
        f[0][static_cast<std::size_t>(j)] = tj == 0.0 ? 0.0 : 2.0 * md.xi_at_r(tj * tj).xi / tj;
      } else {
        f[0][static_cast<std::size_t>(j)] = md.profile.value(tj);
      }
    }
  };
  std::vector<std::vector<Leaf>> pass1(ncells);
  std::vector<double> worst1(ncells, 0.0);
  parallel_for(opts.policy, ncells, [&](std::size_t i) {
    refine(cells[i], cells[i + 1], 1, g_integrand, pass1[i], worst1[i], kLogHAbsTol);
  });

  struct GPiece {
    double a, b;
    NodeArray t, G;
  };
  std::vector<GPiece> gp;
  double offset = 0.0;
  for (const auto& cell : pass1) {
    for (const auto& leaf : cell) {
      GPiece g{leaf.a, leaf.b, leaf.t, {}};
      for (int j = 0; j < kChebNodes; ++j)
        g.G[static_cast<std::size_t>(j)] = offset + leaf.cum[0][static_cast<std::size_t>(j)];
      offset = g.G[kChebNodes - 1];
      gp.push_back(g);
    }
  }

  // Pass 2: s, v, w (and log h in the x-domain), with G interpolated from pass 1.
  std::vector<std::vector<Leaf>> pass2(gp.size());
  std::vector<double> worst2(gp.size(), 0.0);
  parallel_for(opts.policy, gp.size(), [&](std::size_t i) {
    const GPiece& g = gp[i];
    auto integrands = [&](const NodeArray& t, std::array<NodeArray, 4>& f) {
      for (int j = 0; j < kChebNodes; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        const double tj = t[jj];
        const double G = interpolate(g.G, g.a, g.b, tj);
        if (rdom) {
          const double h = h0 * std::exp(-G);
          const double xi = tj == 0.0 ? 0.0 : md.xi_at_r(tj * tj).xi;
          f[0][jj] = std::sqrt(h);
          f[1][jj] = 2.0 * tj * h;
          f[2][jj] = 2.0 * tj * xi * h;
          f[3][jj] = 0.0;
        } else {
          const double S = std::hypot(1.0, G);
          const double q = G * G / (S + 1.0);
          f[0][jj] = S;
          f[1][jj] = 2.0 * tj * S;
          f[2][jj] = 2.0 * tj * q;
          f[3][jj] = tj == 0.0 ? 0.0 : -2.0 * q / tj;
        }
      }
    };
    refine(g.a, g.b, rdom ? 3 : 4, integrands, pass2[i], worst2[i]);
  });

  double s_off = 0.0, v_off = 0.0, w_off = 0.0, l_off = 0.0;
  for (std::size_t i = 0; i < gp.size(); ++i) {
    const GPiece& g = gp[i];
    for (const auto& leaf : pass2[i]) {
      Piece p;
      p.a = leaf.a;
      p.b = leaf.b;
      p.t = leaf.t;
      for (int j = 0; j < kChebNodes; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        p.G[jj] = interpolate(g.G, g.a, g.b, leaf.t[jj]);
        p.s[jj] = s_off + leaf.cum[0][jj];
        p.v[jj] = v_off + leaf.cum[1][jj];
        p.w[jj] = w_off + leaf.cum[2][jj];
        p.L[jj] = l_off + leaf.cum[3][jj];
      }
      s_off = p.s[kChebNodes - 1];
      v_off = p.v[kChebNodes - 1];
      w_off = p.w[kChebNodes - 1];
      l_off = p.L[kChebNodes - 1];
      // Past this point r = x^2/h overflows; the x-domain table stops here.
      if (!rdom && 2.0 * std::log(std::max(p.b, 1e-300)) - p.L[kChebNodes - 1] > kLogROverflow) {
        d->truncated = true;
        break;
      }
      d->pieces.push_back(p);
    }
    if (d->truncated) break;
  }
  if (d->pieces.empty()) throw ModelError("tabulation produced no cells");
  for (double w : worst1) d->worst_tail = std::max(d->worst_tail, w);
  for (double w : worst2) d->worst_tail = std::max(d->worst_tail, w);

  for (const auto& p : d->pieces) {
    d->starts.push_back(p.a);
    d->end_s.push_back(p.s[kChebNodes - 1]);
    const RadialPoint q = d->point(d->end_s.size() - 1, p.b);
    d->end_r.push_back(q.r);
    d->end_x.push_back(q.x);
  }
  // x stops increasing once xi = 1; keep the table usable for lower_bound.
  for (std::size_t i = 1; i < d->end_x.size(); ++i) d->end_x[i] = std::max(d->end_x[i], d->end_x[i - 1]);

  MetricModel m(d);
  d->cls = classify(m);
  if (opts.require_complete && !completeness_check(m))
    throw ModelError("metric is not complete: xi(inf)=" + format_double(d->cls.xi_infinity) + " > 1");
  return m;
}

// ---------------------------------------------------------------------------

ClassificationResult classify(const MetricModel& m) {
  const auto& d = m.data();
  ClassificationResult c;
  const auto pts = m.node_points();
  double sup = 0.0;
  for (const auto& p : pts) sup = std::max(sup, p.xi);
  if (sup <= 1e-10) {
    c.cls = MetricClass::Flat;
    c.xi_infinity = 0.0;
    return c;
  }

  constexpr double kReach = 1.0 - 1e-9;
  constexpr double kS1 = 1.0 - 1e-6;

  // S3: xi reaches 1 at a finite radius and stays there for at least a decade.
  if (d.r_domain && pts.back().xi >= kReach) {
    std::size_t k = pts.size() - 1;
    while (k > 0 && pts[k - 1].xi >= kReach) --k;
    const bool settles = std::all_of(pts.begin() + static_cast<std::ptrdiff_t>(k), pts.end(),
                                     [](const RadialPoint& p) { return p.xi <= 1.0 + 1e-9; });
    if (k > 0 && settles && pts[k].r <= m.r_end() / 10.0) {
      auto reaches = [&](double r, double level) { return d.xi_at_r(r).xi >= level; };
      double lo = pts[k - 1].r, hi = pts[k].r;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (reaches(mid, kReach) ? hi : lo) = mid;
      }
      // Sharpen to where xi becomes 1 to working precision, if it ever does.
      const double level = 1.0 - 4.0 * std::numeric_limits<double>::epsilon();
      double lo2 = hi, hi2 = pts.back().r;
      if (reaches(hi2, level)) {
        if (reaches(lo2, level)) hi2 = lo2;
        for (int it = 0; it < 200 && hi2 - lo2 > 1e-15 * hi2; ++it) {
          const double mid = hi2 > 2.0 * lo2 && lo2 > 0.0 ? std::sqrt(lo2) * std::sqrt(hi2) : 0.5 * (lo2 + hi2);
          (reaches(mid, level) ? hi2 : lo2) = mid;
        }
        hi = hi2;
      }
      c.cls = MetricClass::S3;
      c.r0 = hi;
      const RadialPoint q = m.at_r(hi);
      c.x0 = std::sqrt(q.r * q.h);
      c.xi_infinity = 1.0;
      c.volume_growth = VolumeGrowth::HalfEuclidean;
      return c;
    }
  }

  // xi(inf) and x(inf) from the last three decades of the native range.
  const double te = m.native_end();
  const double step = d.r_domain ? std::sqrt(10.0) : 10.0;  // one decade in r or x
  const RadialPoint p1 = m.at_native(te / (step * step));
  const RadialPoint p2 = m.at_native(te / step);
  const RadialPoint p3 = m.at_native(te);
  bool conv = true;
  c.xi_infinity = std::max(0.0, detail::extrapolate(p1.xi, p2.xi, p3.xi, conv));

  if (c.xi_infinity < kS1) {
    c.cls = MetricClass::S1;
    c.volume_growth = VolumeGrowth::Euclidean;
    return c;
  }
  c.cls = MetricClass::S2;
  c.volume_growth = VolumeGrowth::SubEuclidean;
  c.ambiguous = c.xi_infinity <= kReach;
  bool xconv = true;
  const double x0 = detail::extrapolate(p1.x, p2.x, p3.x, xconv);
  if (xconv && p3.x - p2.x < p2.x - p1.x) c.x0 = x0;
  return c;
}

bool completeness_check(const MetricModel& m) {
  // The tail of sqrt(h/r) behaves like r^(-(1+xi(inf))/2), which is not
  // integrable exactly when xi(inf) <= 1.
  return m.classification().xi_infinity <= 1.0 + 1e-9;
}

// ---------------------------------------------------------------------------

Tabulated xi_to_h(const GeneratorProfile& xi, double h0, const std::vector<double>& grid_r) {
  if (grid_r.empty() || grid_r.front() != 0.0) throw ModelError("grid_r must start at 0");
  Tabulated out{grid_r, std::vector<double>(grid_r.size(), h0)};
  auto integrand = [&](double u) { return u == 0.0 ? 0.0 : 2.0 * xi.value(u * u) / u; };
  double G = 0.0;
  for (std::size_t i = 1; i < grid_r.size(); ++i) {
    const double a = grid_r[i - 1], b = grid_r[i];
    std::vector<double> cuts{std::sqrt(a)};
    for (double bp : xi.breakpoints(a, b)) cuts.push_back(std::sqrt(bp));
    cuts.push_back(std::sqrt(b));
    for (std::size_t j = 1; j < cuts.size(); ++j) {
      G += detail::gk15(integrand, cuts[j - 1], cuts[j], 1e-13, 15);
    }
    out.value[i] = h0 * std::exp(-G);
  }
  return out;
}

Tabulated h_to_f(const std::function<double(double)>& h, const std::vector<double>& grid_r) {
  if (grid_r.empty() || grid_r.front() != 0.0) throw ModelError("grid_r must start at 0");
  Tabulated out{grid_r, std::vector<double>(grid_r.size(), 0.0)};
  out.value[0] = h(0.0);
  double v = 0.0;
  for (std::size_t i = 1; i < grid_r.size(); ++i) {
    v += detail::gk15(h, grid_r[i - 1], grid_r[i], 1e-13, 15);
    out.value[i] = v / grid_r[i];
  }
  return out;
}

Tabulated h_to_f(const Tabulated& h) {
  const GeneratorProfile interp = GeneratorProfile::sampled(ProfileKind::H, h.t, h.value);
  std::vector<double> grid = h.t;
  Tabulated out{grid, std::vector<double>(grid.size(), 0.0)};
  out.value[0] = h.value[0];
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double t) { return interp.value(t); };
  double v = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    // The interpolant is a cubic per cell, so one Kronrod pass is exact.
    v += gauss_kronrod<double, 15>::integrate(f, grid[i - 1], grid[i], 0);
    out.value[i] = v / grid[i];
  }
  return out;
}

}  // namespace cvlab
