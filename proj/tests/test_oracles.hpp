#pragma once

// Test-only numerical oracles, kept independent of the library code paths
// they are used to check.

#include <cmath>
#include <functional>

namespace oracles {

// Central difference with one Richardson step: O(h^4).
inline double fd_central(const std::function<double(double)>& f, double x,
                         double h = 1e-4) {
  auto d = [&](double hh) { return (f(x + hh) - f(x - hh)) / (2.0 * hh); };
  const double d1 = d(h);
  const double d2 = d(0.5 * h);
  return (4.0 * d2 - d1) / 3.0;
}

inline double fd_central_plain(const std::function<double(double)>& f, double x,
                               double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double fd_second(const std::function<double(double)>& f, double x,
                        double h = 1e-4) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

inline double rel_err(double got, double want) {
  const double scale = std::max(1.0, std::abs(want));
  return std::abs(got - want) / scale;
}

}  // namespace oracles
