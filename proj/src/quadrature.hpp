#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace soliton_lab::detail {

// Adaptive Gauss-Kronrod on [from, to] after an affine map onto [-1, 1];
// the library's error test is only scale-consistent on the reference interval.
template <class F>
double gk_integrate(F&& h, double from, double to, double tol = 1e-13, unsigned depth = 12,
                    double* error = nullptr) {
  if (from == to) return 0.0;
  const double mid = 0.5 * (from + to);
  const double half = 0.5 * (to - from);
  auto mapped = [&](double u) { return half * h(mid + half * u); };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(mapped, -1.0, 1.0, depth,
                                                                       tol, error);
}

}  // namespace soliton_lab::detail
