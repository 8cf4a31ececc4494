#include "chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cvlab::detail {

namespace {

constexpr int N = kChebDegree;

struct Tables {
  NodeArray nodes{};
  NodeArray weights{};
  // cos(k j pi / N) for k = 0..N+1, j = 0..N
  std::array<std::array<double, kChebNodes>, kChebNodes + 1> cosines{};

  Tables() {
    for (int j = 0; j <= N; ++j) {
      nodes[j] = -std::cos(j * std::numbers::pi / N);
      weights[j] = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j == N) ? 0.5 : 1.0);
    }
    nodes[0] = -1.0;
    nodes[N] = 1.0;
    nodes[N / 2] = 0.0;
    for (int k = 0; k <= N + 1; ++k)
      for (int j = 0; j <= N; ++j) cosines[k][j] = std::cos(static_cast<double>(k * j % (2 * N)) * std::numbers::pi / N);
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

}  // namespace

const NodeArray& reference_nodes() { return tables().nodes; }

NodeArray mapped_nodes(double a, double b) {
  const auto& x = tables().nodes;
  NodeArray out;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int j = 0; j <= N; ++j) out[j] = mid + half * x[j];
  out[0] = a;
  out[N] = b;
  return out;
}

Cumulative cumulative_integral(const NodeArray& f, double a, double b) {
  const auto& T = tables();
  // Chebyshev coefficients of the interpolant. With ascending nodes
  // T_k(x_j) = (-1)^k cos(k j pi / N).
  std::array<double, kChebNodes + 1> c{};
  for (int k = 0; k <= N; ++k) {
    double sum = 0.0;
    for (int j = 0; j <= N; ++j) {
      const double wj = (j == 0 || j == N) ? 0.5 : 1.0;
      sum += wj * f[j] * T.cosines[k][j];
    }
    sum *= 2.0 / N;
    if (k % 2 == 1) sum = -sum;
    if (k == 0 || k == N) sum *= 0.5;
    c[k] = sum;
  }
  c[N + 1] = 0.0;

  // Antiderivative coefficients.
  std::array<double, kChebNodes + 1> ib{};
  ib[1] = c[0] - 0.5 * c[2];
  for (int k = 2; k <= N + 1; ++k) ib[k] = (c[k - 1] - (k + 1 <= N ? c[k + 1] : 0.0)) / (2.0 * k);
  double at_minus_one = 0.0;
  for (int k = 1; k <= N + 1; ++k) at_minus_one += (k % 2 == 0 ? ib[k] : -ib[k]);
  ib[0] = -at_minus_one;

  Cumulative out;
  const double half = 0.5 * (b - a);
  for (int j = 0; j <= N; ++j) {
    double sum = 0.0;
    for (int k = 0; k <= N + 1; ++k) sum += (k % 2 == 0 ? ib[k] : -ib[k]) * T.cosines[k][j];
    out.values[j] = sum * half;
  }
  out.values[0] = 0.0;
  out.tail = std::max(std::abs(c[N - 1]), std::abs(c[N]));
  double scale = 0.0;
  for (double v : f) scale = std::max(scale, std::abs(v));
  out.scale = scale;
  return out;
}

double interpolate(const NodeArray& values, double a, double b, double t) {
  const auto& T = tables();
  const double x = (2.0 * t - a - b) / (b - a);
  double num = 0.0, den = 0.0;
  for (int j = 0; j <= N; ++j) {
    const double d = x - T.nodes[j];
    if (d == 0.0) return values[j];
    const double q = T.weights[j] / d;
    num += q * values[j];
    den += q;
  }
  return num / den;
}

}  // namespace cvlab::detail
