#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace cvlab::detail {

// Adaptive G7/K15 by bisection. Boost's own recursion reports its error on
// the reference interval [-1, 1], which overstates it by 2/(b-a) on short
// cells; here every error is scaled back to the cell.
template <class F>
double gk15(const F& f, double a, double b, double rel_tol, int depth, double* err = nullptr,
            double* l1 = nullptr) {
  double e = 0.0, l = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &e, &l);
  e *= 0.5 * (b - a);
  if (depth > 0 && e > rel_tol * l) {
    const double mid = 0.5 * (a + b);
    if (mid > a && mid < b) {
      double e1 = 0.0, e2 = 0.0, l1a = 0.0, l1b = 0.0;
      const double out = gk15(f, a, mid, rel_tol, depth - 1, &e1, &l1a) +
                         gk15(f, mid, b, rel_tol, depth - 1, &e2, &l1b);
      if (err) *err = e1 + e2;
      if (l1) *l1 = l1a + l1b;
      return out;
    }
  }
  if (err) *err = e;
  if (l1) *l1 = l;
  return v;
}

}  // namespace cvlab::detail
