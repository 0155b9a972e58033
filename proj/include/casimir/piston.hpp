#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/expm1.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <boost/math/tools/roots.hpp>

#include "casimir/policy.hpp"
#include "casimir/regulate.hpp"

// Casimir force on a perfect-metal piston of arbitrary cross section, driven
// entirely by the spectrum of the transverse 2D Laplacian: Dirichlet
// eigenvalues carry one polarization and Neumann (zero mode excluded) the
// other.  Includes the finite-temperature and zero-temperature sums, the
// short/long-distance closed forms, and the force-variance evaluator.

namespace casimir::piston {

struct SpectrumEntry {
  double lambda = 0.0;  // transverse eigenvalue, units 1/length
  int degeneracy = 1;
};

struct SpectrumEV {
  std::vector<SpectrumEntry> entries;  // ascending in lambda

  std::size_t total() const {
    std::size_t n = 0;
    for (auto const& e : entries) n += static_cast<std::size_t>(e.degeneracy);
    return n;
  }
  void validate() const {
    double prev = 0.0;
    for (auto const& e : entries) {
      if (!(e.lambda > 0.0))
        throw std::domain_error("SpectrumEV: eigenvalues must be positive (zero mode excluded)");
      if (e.degeneracy < 1) throw std::domain_error("SpectrumEV: degeneracy must be >= 1");
      if (e.lambda < prev) throw std::domain_error("SpectrumEV: eigenvalues must be sorted");
      prev = e.lambda;
    }
  }
};

enum class Polarization { te, tm, total };

struct CrossSection {
  SpectrumEV dirichlet;  // TM transverse modes
  SpectrumEV neumann;    // TE transverse modes, zero eigenvalue dropped
  double area = 0.0;
  double perimeter = 0.0;
  double chi = 0.0;  // constant density-of-states term (1/6 for a disc)

  void validate() const {
    dirichlet.validate();
    neumann.validate();
    if (dirichlet.entries.empty() && neumann.entries.empty())
      throw std::domain_error("CrossSection: spectrum is empty");
    if (!(area > 0.0) || !(perimeter > 0.0))
      throw std::domain_error("CrossSection: area and perimeter must be positive");
  }
};

inline CrossSection explicit_section(SpectrumEV dirichlet, SpectrumEV neumann, double area,
                                     double perimeter, double chi) {
  CrossSection cs{std::move(dirichlet), std::move(neumann), area, perimeter, chi};
  cs.validate();
  return cs;
}

namespace detail {

inline double dirichlet_zero(int nu, int k) {
  return boost::math::cyl_bessel_j_zero(static_cast<double>(nu), k);
}

// Zeros of J_nu'.  For nu = 0 they coincide with the zeros of J_1; otherwise
// each one is bracketed by consecutive zeros of J_nu (the first by nu itself).
inline double neumann_zero(int nu, int k) {
  if (nu == 0) return boost::math::cyl_bessel_j_zero(1.0, k);
  double const n = static_cast<double>(nu);
  auto deriv = [n](double x) {
    return 0.5 * (boost::math::cyl_bessel_j(n - 1.0, x) - boost::math::cyl_bessel_j(n + 1.0, x));
  };
  double lo = k == 1 ? n : dirichlet_zero(nu, k - 1);
  double hi = dirichlet_zero(nu, k);
  boost::math::tools::eps_tolerance<double> tol(52);
  std::uintmax_t iters = 80;
  auto const r = boost::math::tools::toms748_solve(deriv, lo, hi, tol, iters);
  return 0.5 * (r.first + r.second);
}

inline void collect_family(bool neumann_family, double cap,
                           std::vector<SpectrumEntry>& out) {
  for (int nu = 0;; ++nu) {
    double first = neumann_family ? neumann_zero(nu, 1) : dirichlet_zero(nu, 1);
    if (first > cap) break;
    int const g = nu == 0 ? 1 : 2;
    for (int k = 1;; ++k) {
      double const z = k == 1 ? first
                              : (neumann_family ? neumann_zero(nu, k) : dirichlet_zero(nu, k));
      if (z > cap) break;
      out.push_back({z, g});
    }
  }
  std::sort(out.begin(), out.end(),
            [](SpectrumEntry const& a, SpectrumEntry const& b) { return a.lambda < b.lambda; });
}

inline SpectrumEV truncate_family(std::vector<SpectrumEntry> const& sorted, std::size_t count) {
  SpectrumEV ev;
  std::size_t total = 0;
  for (auto const& e : sorted) {
    if (total >= count) break;
    ev.entries.push_back(e);
    total += static_cast<std::size_t>(e.degeneracy);
  }
  if (total < count)
    throw ConvergenceError("spectrum_circular: internal cap produced too few eigenvalues");
  return ev;
}

}  // namespace detail

// Disc spectrum: Dirichlet eigenvalues are zeros of J_nu divided by R, Neumann
// ones are zeros of J_nu' (zero excluded); degeneracy 2 for nu >= 1, else 1.
// Each family keeps `count` eigenvalues counted with degeneracy.
inline CrossSection spectrum_circular(double radius, std::size_t count) {
  if (!(radius > 0.0)) throw std::domain_error("spectrum_circular: radius must be positive");
  if (count == 0) throw std::domain_error("spectrum_circular: need at least one eigenvalue");
  double cap = 2.0 * std::sqrt(static_cast<double>(count)) + 10.0;
  std::vector<SpectrumEntry> d_raw, n_raw;
  for (;;) {
    d_raw.clear();
    n_raw.clear();
    detail::collect_family(false, cap, d_raw);
    detail::collect_family(true, cap, n_raw);
    std::size_t d_total = 0, n_total = 0;
    for (auto const& e : d_raw) d_total += static_cast<std::size_t>(e.degeneracy);
    for (auto const& e : n_raw) n_total += static_cast<std::size_t>(e.degeneracy);
    if (d_total >= count && n_total >= count) break;
    cap *= 1.25;
  }
  CrossSection cs;
  cs.dirichlet = detail::truncate_family(d_raw, count);
  cs.neumann = detail::truncate_family(n_raw, count);
  if (radius != 1.0) {
    for (auto& e : cs.dirichlet.entries) e.lambda /= radius;
    for (auto& e : cs.neumann.entries) e.lambda /= radius;
  }
  cs.area = M_PI * radius * radius;
  cs.perimeter = 2.0 * M_PI * radius;
  cs.chi = 1.0 / 6.0;  // smooth boundary: curvature integral over the circle
  return cs;
}

namespace detail {

// Applies fn to every (lambda, degeneracy) of both families and returns the
// contribution of the largest eigenvalue for the truncation check.
template <class Fn>
inline double sum_spectrum(CrossSection const& cs, Fn&& fn, double& last_contribution) {
  double sum = 0.0;
  double last_lambda = 0.0;
  last_contribution = 0.0;
  for (auto const* family : {&cs.dirichlet, &cs.neumann})
    for (auto const& e : family->entries) {
      double const c = static_cast<double>(e.degeneracy) * fn(e.lambda);
      sum += c;
      if (e.lambda > last_lambda) {
        last_lambda = e.lambda;
        last_contribution = c;
      }
    }
  return sum;
}

inline void check_truncation(double last_contribution, double sum, double rel_tol,
                             char const* who) {
  if (!(std::abs(last_contribution) <= rel_tol * std::abs(sum)))
    throw ConvergenceError(std::string(who) +
                           ": spectrum truncation insufficient at this distance; "
                           "supply more eigenvalues or use the short-distance formula");
}

// Contribution of the spectrum beyond the last kept eigenvalue, estimated from
// the smoothed counting function N(lambda) ~ (A/4pi) lambda^2 -+ (P/4pi) lambda
// (- Dirichlet, + Neumann).  Integrated over u = L lambda so that the node set
// is invariant under the (L, R) -> (L/s, R/s) rescaling of circular sections.
template <class Fn>
inline double smooth_tail(SpectrumEV const& family, bool neumann_family, double area,
                          double perimeter, double L, Fn&& per_mode) {
  if (family.entries.empty()) return 0.0;
  double const slope = area / (2.0 * M_PI);
  double const offset = (neumann_family ? 1.0 : -1.0) * perimeter / (4.0 * M_PI);
  double const u_min = L * family.entries.back().lambda;
  auto integrand = [&](double u) {
    double const lambda = u / L;
    double const v = per_mode(lambda);
    if (v == 0.0) return 0.0;
    return (slope * lambda + offset) * v / L;
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(integrand, u_min, std::numeric_limits<double>::infinity(), 1e-9);
}

template <class Fn>
inline double spectral_sum(CrossSection const& cs, double L, double rel_tol, bool with_tail,
                           char const* who, Fn&& per_mode) {
  double last = 0.0;
  double sum = sum_spectrum(cs, per_mode, last);
  check_truncation(last, sum, rel_tol, who);
  if (with_tail) {
    sum += smooth_tail(cs.dirichlet, false, cs.area, cs.perimeter, L, per_mode);
    sum += smooth_tail(cs.neumann, true, cs.area, cs.perimeter, L, per_mode);
  }
  return sum;
}

}  // namespace detail

// Zero-temperature force, -(1/2pi) sum_{p,n} g_p lambda_p^2 [K0 + K2](2 n L lambda_p).
// with_tail extends the truncated spectrum by the smoothed-density integral.
inline double piston_force_T0(CrossSection const& cs, double L, double rel_tol = 1e-6,
                              bool with_tail = true) {
  cs.validate();
  if (!(L > 0.0)) throw std::domain_error("piston_force_T0: L must be positive");
  auto per_mode = [L](double lambda) {
    double acc = 0.0;
    for (int n = 1;; ++n) {
      double const arg = 2.0 * n * L * lambda;
      if (!(arg < 690.0)) break;
      double const term = lambda * lambda *
                          (boost::math::cyl_bessel_k(0, arg) + boost::math::cyl_bessel_k(2, arg));
      acc += term;
      if (!(term > 1e-18 * acc)) break;
    }
    return acc;
  };
  return -detail::spectral_sum(cs, L, rel_tol, with_tail, "piston_force_T0", per_mode) /
         (2.0 * M_PI);
}

// Finite-temperature force from the Matsubara-summed compact form,
// F = -T sum_p sum_{m in Z} sqrt(m^2 Lambda^2 + lambda_p^2) /
//     (exp(2 L sqrt(m^2 Lambda^2 + lambda_p^2)) - 1),  Lambda = 2 pi T.
// T = 0 falls back to the Bessel representation (its Abel-Plana limit).
inline double piston_force(CrossSection const& cs, double L, regulate::ThermalState const& state,
                           double rel_tol = 1e-6, bool with_tail = true) {
  cs.validate();
  state.validate();
  if (!(L > 0.0)) throw std::domain_error("piston_force: L must be positive");
  if (state.temperature == 0.0) return piston_force_T0(cs, L, rel_tol, with_tail);

  double const Lambda = 2.0 * M_PI * state.temperature;
  std::size_t const budget = state.n_max;
  auto per_mode = [L, Lambda, budget](double lambda) {
    auto term = [L, Lambda, lambda](std::size_t m) {
      double const x = std::hypot(static_cast<double>(m) * Lambda, lambda);
      double const e = boost::math::expm1(2.0 * L * x);
      return std::isfinite(e) ? x / e : 0.0;
    };
    double acc = term(0);
    for (std::size_t m = 1;; ++m) {
      if (m > budget)
        throw ConvergenceError("piston_force: Matsubara budget exhausted before the "
                               "frequency sum converged");
      double const t = 2.0 * term(m);
      acc += t;
      if (!(t > 1e-18 * acc)) break;
    }
    return acc;
  };
  return -state.temperature *
         detail::spectral_sum(cs, L, rel_tol, with_tail, "piston_force", per_mode);
}

// Classical (static-mode) force, -kT sum_p g_p lambda_p / (exp(2 L lambda_p) - 1).
inline double piston_force_classical(CrossSection const& cs, double L, double temperature,
                                     double rel_tol = 1e-6, bool with_tail = true) {
  cs.validate();
  if (!(L > 0.0)) throw std::domain_error("piston_force_classical: L must be positive");
  if (!(temperature > 0.0))
    throw std::domain_error("piston_force_classical: temperature must be positive");
  auto per_mode = [L](double lambda) {
    double const e = boost::math::expm1(2.0 * L * lambda);
    return std::isfinite(e) ? lambda / e : 0.0;
  };
  return -temperature *
         detail::spectral_sum(cs, L, rel_tol, with_tail, "piston_force_classical", per_mode);
}

// Short-distance expansion from the smoothed density of states.  TE carries
// the Neumann (+P) branch and TM the Dirichlet (-P) branch; the perimeter
// terms cancel in the total.
inline double piston_force_near(double area, double perimeter, double chi, double L,
                                Polarization pol = Polarization::total) {
  if (!(L > 0.0)) throw std::domain_error("piston_force_near: L must be positive");
  if (!(area > 0.0) || !(perimeter > 0.0))
    throw std::domain_error("piston_force_near: area and perimeter must be positive");
  double const zeta3 = boost::math::zeta(3.0);
  double const a4 = M_PI * M_PI * area / (480.0 * L * L * L * L);
  double const p3 = zeta3 * perimeter / (32.0 * M_PI * L * L * L);
  double const c2 = M_PI / (24.0 * L * L);
  switch (pol) {
    case Polarization::te:
      return -(a4 + p3 + c2 * (chi - 1.0));
    case Polarization::tm:
      return -(a4 - p3 + c2 * chi);
    case Polarization::total:
      return -(2.0 * a4 + c2 * (2.0 * chi - 1.0));
  }
  throw std::logic_error("piston_force_near: unknown polarization");
}

// Long-distance limit at T = 0: only the smallest eigenvalue survives.
inline double piston_far_T0(double lambda1, int degeneracy1, double L) {
  if (!(lambda1 > 0.0) || degeneracy1 < 1 || !(L > 0.0))
    throw std::domain_error("piston_far_T0: invalid arguments");
  return -degeneracy1 * std::pow(lambda1, 1.5) * std::exp(-2.0 * L * lambda1) /
         (2.0 * std::sqrt(M_PI * L));
}

// Classical limits of the static-mode sum.  The short-distance area term
// follows the sum-over-images-first branch; summing the transverse integral
// first instead removes the (2 chi - 1) piece, so the two orders of
// operations genuinely disagree and this is the printed choice.
inline double piston_classical_short(double area, double chi, double L, double temperature) {
  if (!(L > 0.0) || !(temperature > 0.0) || !(area > 0.0))
    throw std::domain_error("piston_classical_short: invalid arguments");
  double const zeta3 = boost::math::zeta(3.0);
  return -temperature *
         (zeta3 * area / (4.0 * M_PI * L * L * L) + (2.0 * chi - 1.0) / (2.0 * L));
}

inline double piston_classical_far(double lambda1, int degeneracy1, double L,
                                   double temperature) {
  if (!(lambda1 > 0.0) || degeneracy1 < 1 || !(L > 0.0) || !(temperature > 0.0))
    throw std::domain_error("piston_classical_far: invalid arguments");
  return -temperature * degeneracy1 * lambda1 * std::exp(-2.0 * L * lambda1);
}

// Matsubara-summed weight of one mode, (1/lambda)[1 + 2/(e^{lambda/T} - 1)];
// 1/lambda at T = 0.
inline double thermal_weight(double lambda, double temperature) {
  if (!(lambda > 0.0)) throw std::domain_error("thermal_weight: lambda must be positive");
  if (!(temperature >= 0.0))
    throw std::domain_error("thermal_weight: temperature must be >= 0");
  if (temperature == 0.0) return 1.0 / lambda;
  double const e = boost::math::expm1(lambda / temperature);
  double const tail = std::isfinite(e) ? 2.0 / e : 0.0;
  return (1.0 + tail) / lambda;
}

// Variance of the fluctuating surface force for an arbitrary mode basis:
// sigma^2 = (1/2) sum_{n,m} w_n w_m S_nm S_mn with S the cross-mode surface
// stress matrix.  When S factorizes (eigenfunctions constant over each face)
// this collapses to twice the squared mean force.
inline double variance_double_sum(std::vector<double> const& weight,
                                  std::vector<std::vector<double>> const& stress) {
  std::size_t const n = weight.size();
  if (n == 0) throw std::domain_error("variance_double_sum: empty mode set");
  if (stress.size() != n)
    throw std::domain_error("variance_double_sum: stress matrix must match the weights");
  for (auto const& row : stress)
    if (row.size() != n)
      throw std::domain_error("variance_double_sum: stress matrix must be square");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      acc += weight[i] * weight[j] * stress[i][j] * stress[j][i];
  return 0.5 * acc;
}

// For pistons every face-constant eigenfunction factorizes the stress matrix,
// and the double sum collapses to sigma^2 = 2 F^2 at any temperature.
inline double piston_variance(CrossSection const& cs, double L,
                              regulate::ThermalState const& state, double rel_tol = 1e-6,
                              bool with_tail = true) {
  double const f = piston_force(cs, L, state, rel_tol, with_tail);
  return 2.0 * f * f;
}

// Plain-text spectrum import: one "lambda degeneracy family" triple per line,
// family D (Dirichlet) or N (Neumann); '#' starts a comment.
inline std::pair<SpectrumEV, SpectrumEV> read_spectrum(std::istream& in) {
  SpectrumEV dirichlet, neumann;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto const hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double lambda = 0.0;
    int degeneracy = 0;
    std::string family;
    if (!(row >> lambda)) continue;  // blank line
    if (!(row >> degeneracy >> family) || (family != "D" && family != "N"))
      throw std::invalid_argument("read_spectrum: line " + std::to_string(line_no) +
                                  " must read 'lambda degeneracy D|N'");
    std::string extra;
    if (row >> extra)
      throw std::invalid_argument("read_spectrum: trailing fields on line " +
                                  std::to_string(line_no));
    (family == "D" ? dirichlet : neumann).entries.push_back({lambda, degeneracy});
  }
  auto ascending = [](SpectrumEntry const& a, SpectrumEntry const& b) {
    return a.lambda < b.lambda;
  };
  std::sort(dirichlet.entries.begin(), dirichlet.entries.end(), ascending);
  std::sort(neumann.entries.begin(), neumann.entries.end(), ascending);
  dirichlet.validate();
  neumann.validate();
  return {std::move(dirichlet), std::move(neumann)};
}

}  // namespace casimir::piston
