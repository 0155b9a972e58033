#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "casimir/policy.hpp"

namespace casimir {

// Root of f on a sign-changing bracket [a, b], refined to near machine
// precision with TOMS 748.
template <typename F>
double find_root(F&& f, double a, double b) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0))
    throw std::invalid_argument("find_root: endpoints do not bracket a sign change");
  boost::math::tools::eps_tolerance<double> tol(52);
  std::uintmax_t max_iter = 200;
  auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, max_iter);
  return 0.5 * (r.first + r.second);
}

// Local minimum of f on [a, b] (Brent). Returns {argmin, min value}.
template <typename F>
std::pair<double, double> find_minimum(F&& f, double a, double b) {
  std::uintmax_t max_iter = 200;
  return boost::math::tools::brent_find_minima(f, a, b, 40, max_iter);
}

}  // namespace casimir
