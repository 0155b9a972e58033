#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "casimir/quadrature.hpp"
#include "casimir/specfun.hpp"

namespace sf = casimir::specfun;

// ---------------------------------------------------------------------------
// Independent oracles. These deliberately avoid the library code paths under
// test: power series summed term by term, integral representations evaluated
// by quadrature, and plain bisection for roots.
// ---------------------------------------------------------------------------

namespace {

// Ascending series for I_nu(x).
double oracle_bessel_i(double nu, double x) {
  double sum = 0.0;
  double term = std::pow(0.5 * x, nu) / std::tgamma(nu + 1.0);
  for (int k = 0; k < 400; ++k) {
    sum += term;
    term *= 0.25 * x * x / ((k + 1.0) * (k + 1.0 + nu));
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

// Integral representation K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt.
double oracle_bessel_k(double nu, double x) {
  double tmax = std::acosh(760.0 / x) + 2.0;
  auto integrand = [nu, x](double t) { return std::exp(-x * std::cosh(t)) * std::cosh(nu * t); };
  casimir::EvalPolicy pol;
  pol.rel_tol = 1e-14;
  return casimir::integrate(integrand, 0.0, tmax, pol);
}

// Alternating ascending series for J_nu(x), adequate for x <= 13.
double oracle_bessel_j(double nu, double x) {
  double sum = 0.0;
  double term = std::pow(0.5 * x, nu) / std::tgamma(nu + 1.0);
  for (int k = 0; k < 200; ++k) {
    sum += term;
    term *= -0.25 * x * x / ((k + 1.0) * (k + 1.0 + nu));
    if (std::abs(term) < 1e-17) break;
  }
  return sum;
}

// Plain bisection on a sign-changing bracket.
template <typename F>
double oracle_bisect(F f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Dilogarithm by its defining integral, -int_0^z log(1-t)/t dt.
double oracle_dilog(double z) {
  auto integrand = [](double t) { return (t == 0.0) ? 1.0 : -std::log1p(-t) / t; };
  casimir::EvalPolicy pol;
  pol.rel_tol = 1e-14;
  return casimir::integrate(integrand, 0.0, z, pol);
}

}  // namespace

TEST_CASE("modified Bessel I matches its ascending series") {
  for (double nu : {0.0, 0.5, 1.0, 1.5, 2.0, 3.7}) {
    for (double x : {0.1, 1.0, 5.0, 20.0}) {
      double ref = oracle_bessel_i(nu, x);
      REQUIRE_THAT(sf::bessel_i(nu, x),
                   Catch::Matchers::WithinRel(ref, 1e-12));
    }
  }
}

TEST_CASE("modified Bessel K matches its integral representation") {
  for (double nu : {0.0, 1.0, 2.3}) {
    for (double x : {0.5, 2.0, 10.0}) {
      double ref = oracle_bessel_k(nu, x);
      REQUIRE_THAT(sf::bessel_k(nu, x),
                   Catch::Matchers::WithinRel(ref, 1e-10));
    }
  }
}

TEST_CASE("half-integer orders reduce to elementary closed forms") {
  for (double x : {0.2, 1.0, 3.0, 10.0}) {
    double i_half = std::sqrt(2.0 / (M_PI * x)) * std::sinh(x);
    double k_half = std::sqrt(M_PI / (2.0 * x)) * std::exp(-x);
    double i_3half = std::sqrt(2.0 / (M_PI * x)) * (std::cosh(x) - std::sinh(x) / x);
    double k_3half = std::sqrt(M_PI / (2.0 * x)) * std::exp(-x) * (1.0 + 1.0 / x);
    REQUIRE_THAT(sf::bessel_i(0.5, x), Catch::Matchers::WithinRel(i_half, 1e-12));
    REQUIRE_THAT(sf::bessel_k(0.5, x), Catch::Matchers::WithinRel(k_half, 1e-12));
    REQUIRE_THAT(sf::bessel_i(1.5, x), Catch::Matchers::WithinRel(i_3half, 1e-12));
    REQUIRE_THAT(sf::bessel_k(1.5, x), Catch::Matchers::WithinRel(k_3half, 1e-12));
  }
}

TEST_CASE("I and K satisfy the cross-product identity 1/x") {
  for (double nu : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    for (double x : {0.1, 0.3, 1.0, 3.0, 10.0, 30.0}) {
      double lhs = sf::bessel_i(nu, x) * sf::bessel_k(nu + 1.0, x) +
                   sf::bessel_i(nu + 1.0, x) * sf::bessel_k(nu, x);
      REQUIRE_THAT(lhs * x, Catch::Matchers::WithinAbs(1.0, 1e-10));
    }
  }
}

TEST_CASE("Bessel domain violations and overflow are signalled") {
  REQUIRE_THROWS_AS(sf::bessel_i(-1.0, 1.0), std::domain_error);
  REQUIRE_THROWS_AS(sf::bessel_i(0.0, 0.0), std::domain_error);
  REQUIRE_THROWS_AS(sf::bessel_i(0.0, -2.0), std::domain_error);
  REQUIRE_THROWS_AS(sf::bessel_k(1.0, -1.0), std::domain_error);
  REQUIRE_THROWS_AS(sf::bessel_i(0.0, 800.0), std::overflow_error);
}

TEST_CASE("zeros of J: anchor value, bisection oracle, ordering, sign change") {
  REQUIRE_THAT(sf::bessel_j_zero(0, 1),
               Catch::Matchers::WithinAbs(2.404825557695773, 1e-10));

  // Bisection on the series-evaluated J, brackets from a coarse scan.
  for (int nu : {0, 1}) {
    double prev = 0.1;
    for (int k = 1; k <= 3; ++k) {
      auto f = [nu](double x) { return oracle_bessel_j(nu, x); };
      double lo = prev, hi = prev;
      double flo = f(lo);
      for (double x = prev + 0.05; x < 14.0; x += 0.05) {
        if ((f(x) > 0.0) != (flo > 0.0)) {
          hi = x;
          break;
        }
        lo = x;
        flo = f(lo);
      }
      double ref = oracle_bisect(f, lo, hi);
      REQUIRE_THAT(sf::bessel_j_zero(nu, k), Catch::Matchers::WithinAbs(ref, 1e-8));
      prev = ref + 0.2;
    }
  }

  for (int nu : {0, 1, 2, 7}) {
    double prev = 0.0;
    for (int k = 1; k <= 8; ++k) {
      double z = sf::bessel_j_zero(nu, k);
      REQUIRE(z > prev);
      REQUIRE(sf::bessel_j(nu, z - 1e-6) * sf::bessel_j(nu, z + 1e-6) < 0.0);
      prev = z;
    }
  }
}

TEST_CASE("zeros of J': anchors, nu=0 convention, interlacing") {
  REQUIRE_THAT(sf::bessel_jprime_zero(1, 1),
               Catch::Matchers::WithinAbs(1.8411837813406593, 1e-10));
  // nu = 0: trivial root excluded, first zero is j_{1,1}.
  REQUIRE_THAT(sf::bessel_jprime_zero(0, 1),
               Catch::Matchers::WithinAbs(3.831705970207512, 1e-10));

  for (int nu : {1, 2, 5}) {
    double prev = static_cast<double>(nu);
    for (int k = 1; k <= 5; ++k) {
      double zp = sf::bessel_jprime_zero(nu, k);
      double z = sf::bessel_j_zero(nu, k);
      REQUIRE(zp > prev);
      REQUIRE(zp < z);
      REQUIRE(sf::bessel_j_prime(nu, zp - 1e-6) * sf::bessel_j_prime(nu, zp + 1e-6) < 0.0);
      prev = z;
    }
  }
}

TEST_CASE("polylogarithm: series vs integral oracle, closed forms, monotonicity") {
  REQUIRE_THAT(sf::polylog(1.0, 0.37),
               Catch::Matchers::WithinRel(-std::log(0.63), 1e-13));

  for (double z : {0.2, 0.5, 0.9, 0.99}) {
    REQUIRE_THAT(sf::polylog(2.0, z),
                 Catch::Matchers::WithinRel(oracle_dilog(z), 1e-10));
  }
  REQUIRE_THAT(sf::polylog(2.0, 0.5),
               Catch::Matchers::WithinRel(
                   M_PI * M_PI / 12.0 - 0.5 * std::log(2.0) * std::log(2.0), 1e-12));
  REQUIRE_THAT(sf::polylog(3.0, 1.0),
               Catch::Matchers::WithinRel(1.2020569031595943, 1e-13));

  for (double s : {1.5, 3.0}) {
    double prev = -1.0;
    for (double z = 0.0; z < 0.999; z += 0.1) {
      double v = sf::polylog(s, z);
      REQUIRE(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("polylogarithm domain errors") {
  REQUIRE_THROWS_AS(sf::polylog(1.0, 1.0), std::domain_error);
  REQUIRE_THROWS_AS(sf::polylog(0.5, 1.0), std::domain_error);
  REQUIRE_THROWS_AS(sf::polylog(2.0, 1.2), std::domain_error);
  REQUIRE_THROWS_AS(sf::polylog(2.0, -0.1), std::domain_error);
  REQUIRE_THROWS_AS(sf::polylog(0.0, 0.5), std::domain_error);
}

TEST_CASE("zeta anchors and pole") {
  REQUIRE_THAT(sf::zeta(2.0), Catch::Matchers::WithinRel(M_PI * M_PI / 6.0, 1e-14));
  REQUIRE_THAT(sf::zeta(3.0), Catch::Matchers::WithinRel(1.2020569031595943, 1e-14));
  REQUIRE_THROWS_AS(sf::zeta(1.0), std::domain_error);
  REQUIRE_THROWS_AS(sf::zeta(0.5), std::domain_error);
}

TEST_CASE("evaluation policy validation") {
  casimir::EvalPolicy pol;
  pol.rel_tol = 0.0;
  REQUIRE_THROWS_AS(pol.validate(), std::invalid_argument);
  pol.rel_tol = 1e-2;
  REQUIRE_THROWS_AS(pol.validate(), std::invalid_argument);
  pol.rel_tol = 1e-10;
  pol.max_terms = 8;
  REQUIRE_THROWS_AS(pol.validate(), std::invalid_argument);
  pol.max_terms = 100;
  pol.max_subdivisions = 0;
  REQUIRE_THROWS_AS(pol.validate(), std::invalid_argument);
}
