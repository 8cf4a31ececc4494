#pragma once

// Tabulated state behind MetricModel. Internal to the library.

#include <vector>

#include "chebyshev.hpp"
#include "cvlab/metric.hpp"

namespace cvlab::detail {

// One tabulation cell in the native variable (u = sqrt(r) or x). Every
// quantity is stored at the cell's Lobatto nodes and is accurate to
// near machine precision under barycentric interpolation.
struct Piece {
  double a = 0.0, b = 0.0;
  NodeArray t{};
  NodeArray G{};  // r-domain: log(h0/h); x-domain: F'
  NodeArray L{};  // x-domain: log(h/h0); unused in the r-domain
  NodeArray s{}, v{}, w{};
};

struct XiJet {
  double xi = 0.0;
  double dxi = 0.0;  // with respect to r
};

struct MetricData {
  explicit MetricData(GeneratorProfile p) : profile(std::move(p)) {}

  GeneratorProfile profile;
  int n = 2;
  Representation repr = Representation::FromXi;
  bool r_domain = true;
  BuildOptions opts;
  double h0 = 1.0;
  double cn = 0.0;

  std::vector<double> grid;  // natural coordinate (r or x), grid[0] = 0
  std::vector<Piece> pieces;
  std::vector<double> starts;  // pieces[i].a
  std::vector<double> end_s, end_r, end_x;
  // Largest unresolved Chebyshev tail relative to its scale, for diagnostics.
  double worst_tail = 0.0;
  bool truncated = false;

  ClassificationResult cls;

  std::size_t piece_of(double t) const;
  RadialPoint point(std::size_t piece, double t) const;
  XiJet xi_at_r(double r) const;  // r-domain profiles only
};

}  // namespace cvlab::detail
