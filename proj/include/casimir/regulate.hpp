#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "casimir/policy.hpp"
#include "casimir/quadrature.hpp"
#include "casimir/specfun.hpp"

namespace casimir::regulate {

// Diagonal quadratic form sum_i a_i n_i^2 + omega^2 over integer vectors n.
struct QuadraticFormDiag {
  std::vector<double> coefficients;  // diagonal entries a_i > 0 (inverse squared lengths)
  double omega = 0.0;                // uniform shift (mass/gap), >= 0

  void validate() const {
    if (coefficients.empty() || coefficients.size() > 2)
      throw std::domain_error("QuadraticFormDiag: dimension must be 1 or 2");
    for (double a : coefficients)
      if (!(a > 0.0)) throw std::domain_error("QuadraticFormDiag: coefficients must be positive");
    if (!(omega >= 0.0)) throw std::domain_error("QuadraticFormDiag: omega must be >= 0");
  }
};

// Thermal sum configuration in reduced units (k_B = hbar = c = 1).
struct ThermalState {
  double temperature = 0.0;       // >= 0; exactly 0 selects the integral form
  std::size_t n_max = 1000000;    // Matsubara index budget
  static constexpr double zero_mode_weight = 0.5;  // n = 0 enters with weight 1/2

  void validate() const {
    if (!(temperature >= 0.0)) throw std::domain_error("ThermalState: temperature must be >= 0");
    if (n_max < 4) throw std::domain_error("ThermalState: n_max too small");
  }
};

namespace detail {

inline bool is_nonpositive_integer(double x, double tol = 1e-12) {
  if (x > 0.5) return false;
  return std::abs(x - std::round(x)) < tol;
}

}  // namespace detail

// Two-piece evaluation of Z_1(s; alpha, omega) = sum_{n in Z} (alpha^2 n^2 + omega^2)^{-s}:
// a power-law term in omega plus an exponentially convergent Bessel-K series,
//   Z_1 = (sqrt(pi)/(alpha Gamma(s))) [ Gamma(s - 1/2) omega^{1-2s}
//         + 4 sum_{m>=1} (pi m / (alpha omega))^{s-1/2} K_{s-1/2}(2 pi m omega / alpha) ].
struct ChowlaSelbergParts {
  double leading = 0.0;     // omega power term (the L-free density piece)
  double bessel_sum = 0.0;  // exponentially small remainder
  double total() const { return leading + bessel_sum; }
};

inline ChowlaSelbergParts chowla_selberg_1d(double s, double alpha, double omega,
                                            EvalPolicy const& pol = {}) {
  pol.validate();
  if (!(alpha > 0.0)) throw std::domain_error("chowla_selberg_1d: alpha must be positive");
  if (!(omega > 0.0))
    throw std::domain_error("chowla_selberg_1d: omega must be positive (n = 0 term diverges)");
  if (detail::is_nonpositive_integer(s - 0.5))
    throw std::domain_error("chowla_selberg_1d: pole of the regularized sum at this s");

  double const prefac = std::sqrt(M_PI) / (alpha * boost::math::tgamma(s));
  ChowlaSelbergParts parts;
  parts.leading = prefac * boost::math::tgamma(s - 0.5) * std::pow(omega, 1.0 - 2.0 * s);

  double const nu = s - 0.5;
  double const beta = 2.0 * M_PI * omega / alpha;  // K argument step
  double sum = 0.0;
  std::size_t small_streak = 0;
  for (std::size_t m = 1; m <= pol.max_terms; ++m) {
    double const arg = beta * static_cast<double>(m);
    double kv;
    try {
      kv = boost::math::cyl_bessel_k(std::abs(nu), arg);
    } catch (std::underflow_error const&) {
      kv = 0.0;
    }
    double const term =
        (kv == 0.0) ? 0.0
                    : std::pow(M_PI * static_cast<double>(m) / (alpha * omega), nu) * kv;
    sum += term;
    double const scale = std::abs(parts.leading + 4.0 * prefac * sum);
    if (std::abs(4.0 * prefac * term) <= pol.rel_tol * (scale > 0.0 ? scale : 1.0)) {
      if (++small_streak >= 2) break;
    } else {
      small_streak = 0;
    }
    if (m == pol.max_terms)
      throw ConvergenceError("chowla_selberg_1d: Bessel series did not converge");
  }
  parts.bessel_sum = 4.0 * prefac * sum;
  return parts;
}

// Bessel series of Z_1 alone, without the omega power term. Finite for every
// real s (the gamma-function poles live in the power term only; at
// non-positive integer s the 1/Gamma(s) prefactor kills the series), so this
// stays usable at s = 1/2, -1/2, ... where combinations of Z_1 values cancel
// their poles and only the exponentially small parts survive.
inline double chowla_selberg_bessel(double s, double alpha, double omega,
                                    EvalPolicy const& pol = {}) {
  pol.validate();
  if (!(alpha > 0.0)) throw std::domain_error("chowla_selberg_bessel: alpha must be positive");
  if (!(omega > 0.0)) throw std::domain_error("chowla_selberg_bessel: omega must be positive");
  if (detail::is_nonpositive_integer(s)) return 0.0;

  double const prefac = std::sqrt(M_PI) / (alpha * boost::math::tgamma(s));
  double const nu = s - 0.5;
  double const beta = 2.0 * M_PI * omega / alpha;
  double sum = 0.0;
  std::size_t small_streak = 0;
  for (std::size_t m = 1; m <= pol.max_terms; ++m) {
    double const arg = beta * static_cast<double>(m);
    double kv;
    try {
      kv = boost::math::cyl_bessel_k(std::abs(nu), arg);
    } catch (std::underflow_error const&) {
      kv = 0.0;
    }
    double const term =
        (kv == 0.0) ? 0.0
                    : std::pow(M_PI * static_cast<double>(m) / (alpha * omega), nu) * kv;
    sum += term;
    if (std::abs(term) <= pol.rel_tol * (std::abs(sum) + 1e-300)) {
      if (++small_streak >= 2) break;
    } else {
      small_streak = 0;
    }
    if (m == pol.max_terms)
      throw ConvergenceError("chowla_selberg_bessel: Bessel series did not converge");
  }
  return 4.0 * prefac * sum;
}

// Regularized Epstein-like sum over 1D or 2D integer lattices,
//   Z_p(s) = sum_{n in Z^p} (sum_i a_i n_i^2 + omega^2)^{-s},
// evaluated by recursive Poisson resummation. Poles where s - p/2 is a
// non-positive integer are reported as domain errors.
inline double elizalde_z(QuadraticFormDiag const& q, double s, EvalPolicy const& pol = {}) {
  pol.validate();
  q.validate();
  std::size_t const p = q.coefficients.size();
  if (!(q.omega > 0.0))
    throw std::domain_error("elizalde_z: omega must be positive (zero mode diverges)");
  if (p == 1) {
    return chowla_selberg_1d(s, std::sqrt(q.coefficients[0]), q.omega, pol).total();
  }
  // p == 2: resum the n_1 direction, leaving a 1D regularized sum plus a
  // doubly exponential Bessel tail.
  if (detail::is_nonpositive_integer(s - 1.0))
    throw std::domain_error("elizalde_z: pole of the regularized sum at this s");
  double const a1 = q.coefficients[0];
  double const a2 = q.coefficients[1];
  double const sqa1 = std::sqrt(a1);
  double const nu = s - 0.5;
  double const gamma_s = boost::math::tgamma(s);

  double const leading = std::sqrt(M_PI) * boost::math::tgamma(nu) / (sqa1 * gamma_s) *
                         chowla_selberg_1d(nu, std::sqrt(a2), q.omega, pol).total();

  auto inner = [&](double sigma) {
    double sum = 0.0;
    std::size_t streak = 0;
    for (std::size_t m = 1; m <= pol.max_terms; ++m) {
      double const arg = 2.0 * M_PI * static_cast<double>(m) * sigma / sqa1;
      double kv;
      try {
        kv = boost::math::cyl_bessel_k(std::abs(nu), arg);
      } catch (std::underflow_error const&) {
        kv = 0.0;
      }
      double const term =
          (kv == 0.0) ? 0.0
                      : std::pow(M_PI * static_cast<double>(m) / (sqa1 * sigma), nu) * kv;
      sum += term;
      if (std::abs(term) <= 0.25 * pol.rel_tol * (std::abs(sum) + 1e-300)) {
        if (++streak >= 2) return sum;
      } else {
        streak = 0;
      }
    }
    throw ConvergenceError("elizalde_z: inner Bessel series did not converge");
  };

  double const tail_prefac = 4.0 * std::sqrt(M_PI) / (sqa1 * gamma_s);
  double tail = inner(q.omega);  // n_2 = 0
  for (std::size_t n2 = 1; n2 <= pol.max_terms; ++n2) {
    double const sigma = std::sqrt(a2 * static_cast<double>(n2) * static_cast<double>(n2) +
                                   q.omega * q.omega);
    double const contrib = 2.0 * inner(sigma);
    tail += contrib;
    double const scale = std::abs(leading + tail_prefac * tail);
    if (std::abs(tail_prefac * contrib) <= pol.rel_tol * (scale > 0.0 ? scale : 1.0)) break;
    if (n2 == pol.max_terms)
      throw ConvergenceError("elizalde_z: outer lattice series did not converge");
  }
  return leading + tail_prefac * tail;
}

// Y_1(s; alpha, omega) = sum_{n in Z} alpha^2 n^2 (alpha^2 n^2 + omega^2)^{-s}
//                      = Z_1(s-1) - omega^2 Z_1(s).
// At omega = 0 the sum collapses to 2 alpha^{2-2s} zeta(2s-2) (s > 3/2).
inline double y1(double s, double alpha, double omega, EvalPolicy const& pol = {}) {
  pol.validate();
  if (!(alpha > 0.0)) throw std::domain_error("y1: alpha must be positive");
  if (omega == 0.0) {
    if (!(s > 1.5)) throw std::domain_error("y1: omega = 0 requires s > 3/2");
    return 2.0 * std::pow(alpha, 2.0 - 2.0 * s) * specfun::zeta(2.0 * s - 2.0);
  }
  return chowla_selberg_1d(s - 1.0, alpha, omega, pol).total() -
         omega * omega * chowla_selberg_1d(s, alpha, omega, pol).total();
}

// Thermal sum over Matsubara frequencies kappa_n = 2 pi n T with the n = 0
// term at half weight,
//   S[f] = T [ f(0)/2 + sum_{n>=1} f(kappa_n) ],
// truncated once a geometric bound built from the last three terms certifies
// the tail. T = 0 is an explicit caller choice and evaluates the integral
// (1/2pi) int_0^inf f(kappa) dkappa instead.
inline double matsubara_sum(std::function<double(double)> const& f, ThermalState const& state,
                            EvalPolicy const& pol = {}) {
  pol.validate();
  state.validate();
  double const T = state.temperature;
  if (T == 0.0) {
    return integrate_to_inf(f, 0.0, pol) / (2.0 * M_PI);
  }
  double partial = ThermalState::zero_mode_weight * f(0.0);
  double prev2 = 0.0, prev1 = 0.0;
  for (std::size_t n = 1; n <= state.n_max; ++n) {
    double const term = f(2.0 * M_PI * static_cast<double>(n) * T);
    partial += term;
    double const a2 = std::abs(prev2), a1 = std::abs(prev1), a0 = std::abs(term);
    if (n >= 3) {
      if (a0 == 0.0 && a1 == 0.0 && a2 == 0.0) return T * partial;
      if (a1 > 0.0 && a2 > 0.0) {
        double const r = std::max(a0 / a1, a1 / a2);
        if (r < 1.0) {
          double const tail = a0 * r / (1.0 - r);
          if (tail <= pol.rel_tol * std::abs(partial)) return T * partial;
        }
      }
    }
    prev2 = prev1;
    prev1 = term;
  }
  throw ConvergenceError("matsubara_sum: geometric tail bound not met within n_max");
}

}  // namespace casimir::regulate
