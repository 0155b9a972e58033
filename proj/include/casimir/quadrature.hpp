#pragma once

#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "casimir/policy.hpp"

namespace casimir {

// Adaptive Gauss–Kronrod on a finite interval. Suitable for smooth or
// piecewise-smooth integrands without endpoint singularities.
template <typename F>
double integrate(F&& f, double a, double b, EvalPolicy const& pol = {}) {
  pol.validate();
  double error = 0.0;
  double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, pol.max_subdivisions, pol.rel_tol, &error);
  if (std::isnan(value))
    throw ConvergenceError("integrate: quadrature returned NaN");
  return value;
}

// Finite interval with possible integrable endpoint singularities.
template <typename F>
double integrate_singular(F&& f, double a, double b, EvalPolicy const& pol = {}) {
  pol.validate();
  boost::math::quadrature::tanh_sinh<double> integrator(pol.max_subdivisions);
  double value = integrator.integrate(f, a, b, pol.rel_tol);
  if (std::isnan(value))
    throw ConvergenceError("integrate_singular: quadrature returned NaN");
  return value;
}

// Semi-infinite [a, inf) for integrands with eventual exponential decay.
template <typename F>
double integrate_to_inf(F&& f, double a, EvalPolicy const& pol = {}) {
  pol.validate();
  boost::math::quadrature::exp_sinh<double> integrator(pol.max_subdivisions);
  auto shifted = [&f, a](double t) { return f(a + t); };
  double error = 0.0, l1 = 0.0;
  double value = integrator.integrate(shifted, pol.rel_tol, &error, &l1);
  if (std::isnan(value))
    throw ConvergenceError("integrate_to_inf: quadrature returned NaN");
  return value;
}

}  // namespace casimir
