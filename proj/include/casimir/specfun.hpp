#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "casimir/policy.hpp"
#include "casimir/roots.hpp"

namespace casimir::specfun {

namespace detail {

inline void require_bessel_args(double order, double x, char const* name) {
  if (!(order >= 0.0))
    throw std::domain_error(std::string(name) + ": order must be real and >= 0");
  if (!(x > 0.0))
    throw std::domain_error(std::string(name) + ": argument must be positive");
}

}  // namespace detail

// Modified Bessel function of the first kind, real order >= 0, x > 0.
// Overflow is signalled (std::overflow_error), never saturated.
inline double bessel_i(double order, double x, EvalPolicy const& pol = {}) {
  pol.validate();
  detail::require_bessel_args(order, x, "bessel_i");
  return boost::math::cyl_bessel_i(order, x);
}

// Modified Bessel function of the second kind, real order >= 0, x > 0.
inline double bessel_k(double order, double x, EvalPolicy const& pol = {}) {
  pol.validate();
  detail::require_bessel_args(order, x, "bessel_k");
  return boost::math::cyl_bessel_k(order, x);
}

// Bessel function of the first kind (oscillatory), used by the zero finders
// and available for spectra built from cylindrical harmonics.
inline double bessel_j(double order, double x) {
  return boost::math::cyl_bessel_j(order, x);
}

// Derivative J'_nu via the standard recurrence.
inline double bessel_j_prime(double order, double x) {
  if (order == 0.0) return -boost::math::cyl_bessel_j(1.0, x);
  return 0.5 * (boost::math::cyl_bessel_j(order - 1.0, x) -
                boost::math::cyl_bessel_j(order + 1.0, x));
}

// k-th positive zero of J_nu (k >= 1), integer nu >= 0.
inline double bessel_j_zero(int order, int k) {
  if (order < 0) throw std::domain_error("bessel_j_zero: order must be >= 0");
  if (k < 1) throw std::domain_error("bessel_j_zero: zero index must be >= 1");
  return boost::math::cyl_bessel_j_zero(static_cast<double>(order), k);
}

// k-th positive zero of J'_nu (k >= 1), integer nu >= 0. For nu = 0 the
// trivial root at x = 0 is excluded, so the first returned zero is
// j'_{0,1} = j_{1,1} = 3.8317...; for nu >= 1 the zeros interlace as
// nu < j'_{nu,1} < j_{nu,1} < j'_{nu,2} < j_{nu,2} < ...
inline double bessel_jprime_zero(int order, int k) {
  if (order < 0) throw std::domain_error("bessel_jprime_zero: order must be >= 0");
  if (k < 1) throw std::domain_error("bessel_jprime_zero: zero index must be >= 1");
  if (order == 0) return boost::math::cyl_bessel_j_zero(1.0, k);
  double const nu = order;
  double lo = (k == 1) ? nu : boost::math::cyl_bessel_j_zero(nu, k - 1);
  double hi = boost::math::cyl_bessel_j_zero(nu, k);
  auto dj = [nu](double x) { return bessel_j_prime(nu, x); };
  // Nudge off the exact bracket ends, where J' can evaluate to zero slope
  // numerically for large nu.
  double const pad = 1e-12 * hi;
  return find_root(dj, lo + pad, hi - pad);
}

// Riemann zeta for real s > 1 (simple pole at s = 1 is reported).
inline double zeta(double s) {
  if (s == 1.0) throw std::domain_error("zeta: pole at s = 1");
  if (!(s > 1.0)) throw std::domain_error("zeta: defined here for s > 1 only");
  return boost::math::zeta(s);
}

// Polylogarithm Li_s(z) for s > 0 and z in [0, 1], by direct series with a
// geometric remainder bound. Li_1(z) = -log(1 - z); Li_s(1) = zeta(s) needs
// s > 1 and is a domain error otherwise (divergent sum).
inline double polylog(double s, double z, EvalPolicy const& pol = {}) {
  pol.validate();
  if (!(s > 0.0)) throw std::domain_error("polylog: s must be positive");
  if (z < 0.0 || z > 1.0) throw std::domain_error("polylog: z must lie in [0, 1]");
  if (z == 0.0) return 0.0;
  if (z == 1.0) {
    if (!(s > 1.0)) throw std::domain_error("polylog: series diverges at z = 1 for s <= 1");
    return boost::math::zeta(s);
  }
  if (s == 1.0) return -std::log1p(-z);
  double sum = 0.0;
  double zn = 1.0;
  for (std::size_t n = 1; n <= pol.max_terms; ++n) {
    zn *= z;
    sum += zn / std::pow(static_cast<double>(n), s);
    // Remainder after n terms is below z^{n+1} / ((n+1)^s (1-z)).
    double bound = zn * z / (std::pow(static_cast<double>(n) + 1.0, s) * (1.0 - z));
    if (bound <= pol.rel_tol * sum) return sum;
  }
  throw ConvergenceError("polylog: series did not converge within max_terms");
}

}  // namespace casimir::specfun
