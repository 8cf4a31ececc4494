#pragma once

// Spectral cumulative integration on Chebyshev-Lobatto nodes. Internal to the
// library; used by the metric tabulation.

#include <array>
#include <cstddef>

namespace cvlab::detail {

constexpr int kChebDegree = 16;
constexpr int kChebNodes = kChebDegree + 1;

using NodeArray = std::array<double, kChebNodes>;

/// Ascending Lobatto nodes -cos(j pi / N) on [-1, 1].
const NodeArray& reference_nodes();

/// Nodes mapped to [a, b]; the end points are reproduced exactly.
NodeArray mapped_nodes(double a, double b);

struct Cumulative {
  NodeArray values{};  // integral from a to each node
  double tail = 0.0;   // magnitude of the two highest Chebyshev coefficients
  double scale = 0.0;  // max |f| on the nodes
};

/// Integrates the interpolant of f (sampled at mapped_nodes(a, b)) from a.
Cumulative cumulative_integral(const NodeArray& f, double a, double b);

/// Barycentric interpolation of node values at t in [a, b].
double interpolate(const NodeArray& values, double a, double b, double t);

}  // namespace cvlab::detail
