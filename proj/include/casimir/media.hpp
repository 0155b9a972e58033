#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "casimir/policy.hpp"
#include "casimir/quadrature.hpp"
#include "casimir/regulate.hpp"
#include "casimir/specfun.hpp"

// Casimir forces per unit area between parallel plates immersed in classical
// media kept out of equilibrium by stochastic driving. Forces are reported in
// reduced units (hbar = c = kB = 1) with scales fixed by the noise intensity
// and the transport coefficients; positive force = attraction.
namespace casimir::media {

// ---------------------------------------------------------------------------
// Problem description types
// ---------------------------------------------------------------------------

struct PlatesGeometry {
  double gap = 1.0;  // plate separation L
  double k0 = 0.0;   // inverse correlation length of the medium

  void validate() const {
    if (!(gap > 0.0)) throw std::domain_error("PlatesGeometry: gap must be positive");
    if (!(k0 >= 0.0)) throw std::domain_error("PlatesGeometry: k0 must be nonnegative");
  }
};

enum class NoiseKind { white, temporal_exponential, spatial_homogeneous, quenched };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::white;
  double gamma = 1.0;  // intensity
  double a = 0.0;      // inverse correlation time (temporal_exponential only)

  static NoiseSpec white(double gamma) { return validated({NoiseKind::white, gamma, 0.0}); }
  static NoiseSpec temporal_exponential(double gamma, double a) {
    return validated({NoiseKind::temporal_exponential, gamma, a});
  }
  static NoiseSpec spatial_homogeneous(double gamma) {
    return validated({NoiseKind::spatial_homogeneous, gamma, 0.0});
  }
  // Frozen disorder: the zero-rate limit of exponential temporal correlations,
  // with the transient contribution removed analytically.
  static NoiseSpec quenched(double gamma) {
    return validated({NoiseKind::quenched, gamma, 0.0});
  }

  void validate() const {
    if (!(gamma > 0.0)) throw std::domain_error("NoiseSpec: gamma must be positive");
    if (!(a >= 0.0)) throw std::domain_error("NoiseSpec: correlation rate a must be nonnegative");
  }

 private:
  static NoiseSpec validated(NoiseSpec n) {
    n.validate();
    return n;
  }
};

// Linear media only: each kind maps onto a linear evolution kernel whose
// spectrum the force formulas below assume. There is deliberately no
// constructor for nonlinear field equations.
enum class MediumKind { reaction_diffusion, nematic, two_field, generalized_p };

struct MediumSpec {
  MediumKind kind = MediumKind::reaction_diffusion;

  // reaction_diffusion: relaxation rate lambda, diffusivity D
  double lambda = 0.0;
  double D = 0.0;
  // nematic: rotational viscosity lambda (reused), elastic constants kappa1, kappa2
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  // two_field: relaxation rates lambda1 != lambda2, one-way coupling lambda12,
  // shared diffusivity D (reused), stress coupling kappa
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda12 = 0.0;
  double kappa = 0.0;
  // generalized_p: order p of the time-derivative kernel, mobility c_p
  int p = 0;
  double c_p = 0.0;

  static MediumSpec reaction_diffusion(double lambda, double D) {
    if (!(lambda > 0.0) || !(D > 0.0))
      throw std::domain_error("MediumSpec: reaction-diffusion coefficients must be positive");
    MediumSpec m;
    m.kind = MediumKind::reaction_diffusion;
    m.lambda = lambda;
    m.D = D;
    return m;
  }
  static MediumSpec nematic(double lambda, double kappa1, double kappa2) {
    if (!(lambda > 0.0) || !(kappa1 > 0.0) || !(kappa2 > 0.0))
      throw std::domain_error("MediumSpec: nematic coefficients must be positive");
    MediumSpec m;
    m.kind = MediumKind::nematic;
    m.lambda = lambda;
    m.kappa1 = kappa1;
    m.kappa2 = kappa2;
    return m;
  }
  static MediumSpec two_field(double lambda1, double lambda2, double lambda12, double D,
                              double kappa) {
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0) || !(D > 0.0) || !(kappa > 0.0))
      throw std::domain_error("MediumSpec: two-field coefficients must be positive");
    if (lambda1 == lambda2)
      throw std::domain_error(
          "MediumSpec: two-field rates must differ (dynamic matrix not diagonalizable)");
    MediumSpec m;
    m.kind = MediumKind::two_field;
    m.lambda1 = lambda1;
    m.lambda2 = lambda2;
    m.lambda12 = lambda12;
    m.D = D;
    m.kappa = kappa;
    return m;
  }
  static MediumSpec generalized_p(int p, double c_p) {
    if (p < 1) throw std::domain_error("MediumSpec: kernel order p must be >= 1");
    if (!(c_p > 0.0)) throw std::domain_error("MediumSpec: mobility c_p must be positive");
    MediumSpec m;
    m.kind = MediumKind::generalized_p;
    m.p = p;
    m.c_p = c_p;
    return m;
  }
};

// ---------------------------------------------------------------------------
// Master mode sum
// ---------------------------------------------------------------------------

// A finite (regularized/truncated) eigenmode description of the driven medium:
// eigenvalues mu_n of the evolution operator, noise projections h_nm onto the
// left eigenbasis, the Laplace transform c~(mu) of the temporal noise
// correlation, and surface stress projections T_nm (the caller encodes the
// stress tensor, surface orientation and mode profiles there).
struct ModeSumProblem {
  std::vector<std::complex<double>> eigenvalues;
  std::vector<std::vector<std::complex<double>>> noise_overlap;
  std::vector<std::vector<std::complex<double>>> stress_surface;
  std::function<std::complex<double>(std::complex<double>)> kernel_laplace;

  void validate() const {
    std::size_t const n = eigenvalues.size();
    if (n == 0) throw std::domain_error("ModeSumProblem: empty spectrum");
    if (!kernel_laplace) throw std::domain_error("ModeSumProblem: missing temporal kernel");
    auto square = [n](auto const& m, char const* what) {
      if (m.size() != n) throw std::domain_error(std::string("ModeSumProblem: ") + what);
      for (auto const& row : m)
        if (row.size() != n) throw std::domain_error(std::string("ModeSumProblem: ") + what);
    };
    square(noise_overlap, "noise projection must be N x N");
    square(stress_surface, "stress projection must be N x N");
    for (auto const& mu : eigenvalues)
      if (!(mu.real() > 0.0))
        throw std::domain_error(
            "ModeSumProblem: spectrum must have strictly positive real part");
  }
};

// Laplace transform of a delta-correlated noise (unit weight, causal half).
inline std::function<std::complex<double>(std::complex<double>)> kernel_white() {
  return [](std::complex<double>) { return std::complex<double>(0.5, 0.0); };
}

// Laplace transform of c(t) = (a/2) e^{-a|t|}; tends to the white kernel as
// the correlation time 1/a vanishes.
inline std::function<std::complex<double>(std::complex<double>)> kernel_exponential(double a) {
  if (!(a > 0.0)) throw std::domain_error("kernel_exponential: rate must be positive");
  return [a](std::complex<double> mu) { return a / (2.0 * (a + mu)); };
}

// Net force on the body enclosed by the stress surface:
//   F = - sum_{nm} [c~(mu_n) + c~(mu_m*)] / (mu_n + mu_m*) h_nm T_nm.
// Positive values mean attraction between the plates once the caller builds
// T_nm as the gap-side stress minus the outside reference.
inline double force_mode_sum(ModeSumProblem const& problem) {
  problem.validate();
  std::size_t const n = problem.eigenvalues.size();
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::complex<double> const mu_i = problem.eigenvalues[i];
    std::complex<double> const ci = problem.kernel_laplace(mu_i);
    for (std::size_t j = 0; j < n; ++j) {
      std::complex<double> const mu_jc = std::conj(problem.eigenvalues[j]);
      std::complex<double> const weight =
          (ci + problem.kernel_laplace(mu_jc)) / (mu_i + mu_jc);
      acc += weight * problem.noise_overlap[i][j] * problem.stress_surface[i][j];
    }
  }
  return -acc.real();
}

// ---------------------------------------------------------------------------
// Reaction-diffusion medium between absorbing plates
// ---------------------------------------------------------------------------

// White noise in space and time. The transverse momentum integral of the mode
// sum collapses to a dilogarithm-free closed form.
inline double rd_force_white(double gamma, double D, double k0, double L) {
  if (!(gamma > 0.0) || !(D > 0.0) || !(L > 0.0))
    throw std::domain_error("rd_force_white: gamma, D, L must be positive");
  if (!(k0 > 0.0))
    throw std::domain_error(
        "rd_force_white: force diverges as the correlation length tends to infinity (k0 = 0)");
  return -gamma / (8.0 * M_PI * D * L) * std::log1p(-std::exp(-2.0 * k0 * L));
}

// Exponentially correlated noise in time with rate a; a = 0 is the quenched
// (frozen-source) limit with the transient decay removed analytically.
inline double rd_force_temporal(double gamma, double D, double k0, double a, double L) {
  if (!(gamma > 0.0) || !(D > 0.0) || !(L > 0.0))
    throw std::domain_error("rd_force_temporal: gamma, D, L must be positive");
  if (!(a >= 0.0)) throw std::domain_error("rd_force_temporal: rate a must be nonnegative");
  if (!(k0 > 0.0))
    throw std::domain_error("rd_force_temporal: force diverges at infinite correlation length");
  if (a == 0.0)
    return gamma / (4.0 * M_PI * D * D * k0) / std::expm1(2.0 * k0 * L);
  double const k1 = std::sqrt(k0 * k0 + a / D);
  double const bracket =
      std::log1p(-std::exp(-2.0 * k0 * L)) - std::log1p(-std::exp(-2.0 * k1 * L));
  return -gamma * (1.0 + 0.5 * a) / (4.0 * M_PI * a * D * L) * bracket;
}

// Maximally spatially correlated (spatially homogeneous) noise: the stress on
// both plate faces is the same L-independent constant, so the net force is
// exactly zero. The constant itself is exposed for testing.
inline double rd_spatial_stress(double gamma, double lambda) {
  if (!(gamma > 0.0) || !(lambda > 0.0))
    throw std::domain_error("rd_spatial_stress: gamma, lambda must be positive");
  return gamma / (4.0 * lambda);
}

inline double rd_force_spatial(double gamma, double lambda) {
  (void)rd_spatial_stress(gamma, lambda);  // validate and pin the stress scale
  return 0.0;
}

// ---------------------------------------------------------------------------
// Nematic liquid crystal (director fluctuations)
// ---------------------------------------------------------------------------

namespace detail {

// Li3(e^{-2x}) + 2x Li2(e^{-2x}) + 2x^2 Li1(e^{-2x}), the transverse integral
// of the director mode sum; equals zeta(3) at x = 0.
inline double lc_polylog_bracket(double x, EvalPolicy const& pol) {
  if (x < 0.0) throw std::domain_error("lc bracket: negative argument");
  if (x == 0.0) return specfun::zeta(3.0);
  double const z = std::exp(-2.0 * x);
  double const li1 = -std::log1p(-z);
  return specfun::polylog(3.0, z, pol) + 2.0 * x * specfun::polylog(2.0, z, pol) +
         2.0 * x * x * li1;
}

}  // namespace detail

// White noise. kappa2 fixes the director relaxation scale entering through
// k0; the white-noise force itself depends on it only via that combination.
inline double lc_force_white(double gamma, double lambda, double kappa2, double k0, double L,
                             EvalPolicy const& pol = {}) {
  if (!(gamma > 0.0) || !(lambda > 0.0) || !(kappa2 > 0.0) || !(L > 0.0))
    throw std::domain_error("lc_force_white: gamma, lambda, kappa2, L must be positive");
  if (!(k0 >= 0.0)) throw std::domain_error("lc_force_white: k0 must be nonnegative");
  return gamma / (16.0 * M_PI * lambda * L * L * L) * detail::lc_polylog_bracket(k0 * L, pol);
}

// Quenched (frozen) noise limit.
inline double lc_force_quenched(double gamma, double lambda, double kappa1, double kappa2,
                                double L) {
  if (!(gamma > 0.0) || !(lambda > 0.0) || !(kappa2 > 0.0) || !(L > 0.0))
    throw std::domain_error("lc_force_quenched: gamma, lambda, kappa2, L must be positive");
  if (!(kappa1 >= 0.0)) throw std::domain_error("lc_force_quenched: kappa1 must be nonnegative");
  double const k0 = std::sqrt(kappa1 / kappa2);
  double const pref = gamma / (4.0 * M_PI * lambda * lambda * kappa2 * L);
  if (k0 == 0.0) return 0.5 * pref;
  return pref * (k0 * L) / std::expm1(2.0 * k0 * L);
}

// Exponentially correlated noise with rate a; the factorized spectrum gives a
// difference of two white-noise-type brackets at shifted screening masses.
inline double lc_force_temporal(double gamma, double lambda, double kappa1, double kappa2,
                                double a, double L, EvalPolicy const& pol = {}) {
  if (!(gamma > 0.0) || !(lambda > 0.0) || !(kappa2 > 0.0) || !(L > 0.0))
    throw std::domain_error("lc_force_temporal: gamma, lambda, kappa2, L must be positive");
  if (!(kappa1 >= 0.0)) throw std::domain_error("lc_force_temporal: kappa1 must be nonnegative");
  if (!(a >= 0.0)) throw std::domain_error("lc_force_temporal: rate a must be nonnegative");
  if (a == 0.0) return lc_force_quenched(gamma, lambda, kappa1, kappa2, L);
  double const k0 = std::sqrt(kappa1 / kappa2);
  double const k1 = std::sqrt(kappa1 / kappa2 + a / (lambda * kappa2));
  double const diff =
      detail::lc_polylog_bracket(k0 * L, pol) - detail::lc_polylog_bracket(k1 * L, pol);
  return (1.0 + 0.5 * a) * gamma / (8.0 * M_PI * a * lambda * L * L * L) * diff;
}

namespace detail {

// One lattice row resummed: sum_{m>=1} K0(beta m), evaluated by its
// exponential tail bound.
inline double k0_row(double beta, EvalPolicy const& pol) {
  double sum = 0.0;
  std::size_t streak = 0;
  for (std::size_t m = 1; m <= pol.max_terms; ++m) {
    double term;
    try {
      term = boost::math::cyl_bessel_k(0, beta * static_cast<double>(m));
    } catch (std::underflow_error const&) {
      term = 0.0;
    }
    sum += term;
    if (term <= pol.rel_tol * (std::abs(sum) + 1e-300)) {
      if (++streak >= 2) return sum;
    } else {
      streak = 0;
    }
  }
  throw ConvergenceError("lc_force_spatialcorr: lattice row tail bound unmet (k0*L too small)");
}

// Dual-row tower: sum_{j in Z} (beta^2 + 4 pi^2 j^2)^{-1/2} / (e^{a r_j} - 1),
// r_j the square root above; doubly exponential in j.
inline double row_tower(double beta, double a, EvalPolicy const& pol) {
  auto node = [&](std::size_t j) {
    double const r = std::hypot(beta, 2.0 * M_PI * static_cast<double>(j));
    return 1.0 / (r * std::expm1(a * r));
  };
  double sum = node(0);
  for (std::size_t j = 1; j <= pol.max_terms; ++j) {
    double const term = 2.0 * node(j);
    sum += term;
    if (term <= pol.rel_tol * (std::abs(sum) + 1e-300)) return sum;
  }
  throw ConvergenceError("lc_force_spatialcorr: dual tower did not converge");
}

// Row-resummed value of one square-lattice family
//   T(beta, a) = sum'_{n,m} K0(beta sqrt(n^2 + a^2 m^2)) over m-rows:
//   T = 2 sum_{m>=1} K0(beta m) + 2 pi sum_{j in Z} tower terms at aspect a.
inline double lattice_family(double beta, double a, EvalPolicy const& pol) {
  return 2.0 * k0_row(beta, pol) + 2.0 * M_PI * row_tower(beta, a, pol);
}

}  // namespace detail

// Maximally spatially correlated noise on the nematic: the image-charge
// double series of K0 terms. Evaluated through the exact row-resummed
// representation of the three independent lattice families, which shares the
// printed series' exponential tail bound but stays convergent down to small
// k0 L until the row length exceeds the term budget.
inline double lc_force_spatialcorr(double gamma, double lambda, double k0, double L,
                                   EvalPolicy const& pol = {}) {
  if (!(gamma > 0.0) || !(lambda > 0.0) || !(L > 0.0))
    throw std::domain_error("lc_force_spatialcorr: gamma, lambda, L must be positive");
  if (!(k0 > 0.0))
    throw std::domain_error("lc_force_spatialcorr: k0 must be positive (series diverges)");
  double const beta = 2.0 * std::sqrt(2.0) * k0 * L;
  // Families with equal row spacing share the same K0 rows, which cancel in
  // their difference; only the dual towers at aspect 1 and 1/2 differ.
  double const towers_full = detail::row_tower(beta, 1.0, pol);
  double const towers_half = detail::row_tower(beta, 0.5, pol);
  double const family_quarter = detail::lattice_family(0.5 * beta, 1.0, pol);
  double const s =
      2.0 * M_PI * (towers_full - towers_half) + 0.25 * family_quarter;
  return -(gamma / lambda) * s;
}

// ---------------------------------------------------------------------------
// Two coupled fields with one-way coupling (non-Hermitian evolution)
// ---------------------------------------------------------------------------

// Noise acts on the second field only; the stress is read on the first. The
// partial-fraction decomposition of the cross tower produces three screening
// masses: k1, k2 from the individual rates and k3 from their mean.
inline double twofield_stress(double gamma, double kappa, double lambda1, double lambda2,
                              double lambda12, double D, double L) {
  if (!(gamma > 0.0) || !(kappa > 0.0) || !(D > 0.0) || !(L > 0.0))
    throw std::domain_error("twofield_stress: gamma, kappa, D, L must be positive");
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
    throw std::domain_error("twofield_stress: relaxation rates must be positive");
  double const scale = std::abs(lambda1) + std::abs(lambda2);
  if (std::abs(lambda1 - lambda2) <= 1e-12 * scale)
    throw std::domain_error(
        "twofield_stress: equal rates make the dynamic matrix non-diagonalizable");
  if (lambda12 == 0.0) return 0.0;
  double const k1 = std::sqrt(lambda1 / D);
  double const k2 = std::sqrt(lambda2 / D);
  double const k3 = std::sqrt(0.5 * (lambda1 + lambda2) / D);
  double const bracket = std::log1p(-std::exp(-2.0 * k1 * L)) +
                         std::log1p(-std::exp(-2.0 * k2 * L)) -
                         2.0 * std::log1p(-std::exp(-2.0 * k3 * L));
  double const dl = lambda1 - lambda2;
  return -gamma * kappa * lambda12 * lambda12 / (4.0 * M_PI * D * L * dl * dl) * bracket;
}

// ---------------------------------------------------------------------------
// Generalized kernels: p-th order time derivative
// ---------------------------------------------------------------------------

enum class PoleDirection { forward, backward, marginal };

// One partial-fraction term of the Green's function of F(d/dt) + mu. Damped
// (forward/backward) poles are stored in the decay plane; undamped poles
// (vanishing real part) are rotated to the real-frequency plane, residue
// included, and flagged marginal so correlators can half-weight them.
struct PoleTerm {
  std::complex<double> omega;
  std::complex<double> residue;
  PoleDirection direction = PoleDirection::forward;
};

namespace detail {

// Durand-Kerner simultaneous root iteration on an arbitrary-degree
// polynomial given by ascending coefficients. Monic-normalizes, iterates all
// roots at once, then polishes with Newton steps.
inline std::vector<std::complex<double>> polynomial_roots(
    std::vector<std::complex<double>> coeffs, EvalPolicy const& pol) {
  while (coeffs.size() > 1 && std::abs(coeffs.back()) == 0.0) coeffs.pop_back();
  if (coeffs.size() < 2)
    throw std::domain_error("polynomial_roots: kernel polynomial must have positive degree");
  std::size_t const deg = coeffs.size() - 1;
  std::complex<double> const lead = coeffs.back();
  for (auto& c : coeffs) c /= lead;

  double radius = 0.0;
  for (std::size_t i = 0; i < deg; ++i) radius = std::max(radius, std::abs(coeffs[i]));
  radius = 1.0 + radius;  // Cauchy bound

  std::vector<std::complex<double>> z(deg);
  for (std::size_t j = 0; j < deg; ++j)
    z[j] = std::polar(radius, 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(deg) +
                                  0.4);

  auto eval = [&](std::complex<double> x) {
    std::complex<double> v = 1.0;  // monic
    for (std::size_t i = deg; i-- > 0;) v = v * x + coeffs[i];
    return v;
  };

  bool converged = false;
  for (int iter = 0; iter < 512 && !converged; ++iter) {
    double worst = 0.0;
    for (std::size_t j = 0; j < deg; ++j) {
      std::complex<double> den = 1.0;
      for (std::size_t k = 0; k < deg; ++k)
        if (k != j) den *= z[j] - z[k];
      std::complex<double> const step = eval(z[j]) / den;
      z[j] -= step;
      worst = std::max(worst, std::abs(step) / (1.0 + std::abs(z[j])));
    }
    converged = worst < 1e-14;
  }
  if (!converged) throw ConvergenceError("polynomial_roots: root iteration did not converge");

  auto deriv = [&](std::complex<double> x) {
    std::complex<double> v = static_cast<double>(deg);  // monic derivative
    for (std::size_t i = deg; i-- > 1;) v = v * x + coeffs[i] * static_cast<double>(i);
    return v;
  };
  for (auto& root : z)
    for (int polish = 0; polish < 3; ++polish) {
      std::complex<double> const d = deriv(root);
      if (std::abs(d) == 0.0) break;
      root -= eval(root) / d;
    }

  double span = 0.0;
  for (auto const& root : z) span = std::max(span, std::abs(root));
  for (std::size_t i = 0; i < deg; ++i)
    for (std::size_t j = i + 1; j < deg; ++j)
      if (std::abs(z[i] - z[j]) < 1e-8 * (1.0 + span))
        throw std::domain_error(
            "polynomial_roots: repeated characteristic root (kernel not decomposable)");
  (void)pol;
  return z;
}

}  // namespace detail

// Partial-fraction data of the Green's function of F(d/dt) phi + mu phi:
// kernel_coeffs are the ascending coefficients of F as a polynomial in d/dt
// (so p = 1 is {0, 1}). Each characteristic root z gives a decay pole
// omega = -z with residue 1/P'(z).
inline std::vector<PoleTerm> greens_kernel_decomposition(
    std::vector<std::complex<double>> const& kernel_coeffs, std::complex<double> mu,
    EvalPolicy const& pol = {}) {
  pol.validate();
  if (kernel_coeffs.empty())
    throw std::domain_error("greens_kernel_decomposition: empty kernel");
  std::vector<std::complex<double>> poly = kernel_coeffs;
  poly[0] += mu;
  auto const roots = detail::polynomial_roots(poly, pol);

  auto dpoly = [&](std::complex<double> x) {
    std::complex<double> v = 0.0;
    for (std::size_t i = poly.size() - 1; i >= 1; --i)
      v = v * x + poly[i] * static_cast<double>(i);
    return v;
  };

  std::vector<PoleTerm> terms;
  terms.reserve(roots.size());
  for (auto const& z : roots) {
    std::complex<double> const omega = -z;
    std::complex<double> const residue = 1.0 / dpoly(z);
    PoleTerm t;
    if (std::abs(omega.real()) <= 1e-9 * std::abs(omega)) {
      // Undamped: rotate to the real-frequency plane.
      std::complex<double> const i_unit(0.0, 1.0);
      t.omega = -i_unit * omega;
      t.residue = i_unit * residue;
      t.direction = PoleDirection::marginal;
    } else {
      t.omega = omega;
      t.residue = residue;
      t.direction = omega.real() > 0.0 ? PoleDirection::forward : PoleDirection::backward;
    }
    terms.push_back(t);
  }
  return terms;
}

namespace detail {

inline bool nearly_real(std::complex<double> const& w) {
  return std::abs(w.imag()) <= 1e-9 * (1.0 + std::abs(w));
}

// Principal decay channel: the forward poles of smallest |arg omega|. When
// every forward pole is real this is the whole forward set.
inline std::vector<PoleTerm> principal_forward(std::vector<PoleTerm> const& poles) {
  std::vector<PoleTerm> fwd;
  for (auto const& t : poles)
    if (t.direction == PoleDirection::forward) fwd.push_back(t);
  bool all_real = true;
  for (auto const& t : fwd) all_real = all_real && nearly_real(t.omega);
  if (all_real || fwd.empty()) return fwd;
  double amin = 4.0;
  for (auto const& t : fwd) amin = std::min(amin, std::abs(std::arg(t.omega)));
  std::vector<PoleTerm> principal;
  for (auto const& t : fwd)
    if (std::abs(std::arg(t.omega)) <= amin + 1e-9) principal.push_back(t);
  return principal;
}

}  // namespace detail

// Equal-time steady-state variance of one eigenmode amplitude driven by white
// noise of intensity gamma, from the pole decomposition of its Green's
// function. Damped channels: if every forward pole is real, the full
// quadratic pole-pair sum applies; with complex (oscillatory damped) poles
// only the slowest-phase (principal) channel survives at long times -- a
// conjugate pair enters once through Gamma |R|^2 / (2|omega|), a lone pole
// through Gamma |R|^2 / (2 Re omega). Undamped channels contribute their
// positive frequencies as Gamma |R|^2 / (2 omega); distinct-frequency cross
// terms oscillate and time-average to zero, so pairs of different undamped
// poles are excluded.
inline double steady_correlator(std::vector<PoleTerm> const& poles, double gamma) {
  if (!(gamma > 0.0)) throw std::domain_error("steady_correlator: gamma must be positive");
  double value = 0.0;

  for (auto const& t : poles)
    if (t.direction == PoleDirection::marginal && t.omega.real() > 0.0)
      value += std::norm(t.residue) / (2.0 * t.omega.real());

  auto const channel = detail::principal_forward(poles);
  bool all_real = true;
  for (auto const& t : channel) all_real = all_real && detail::nearly_real(t.omega);
  if (all_real) {
    for (auto const& ti : channel)
      for (auto const& tj : channel) {
        std::complex<double> const num = ti.residue * std::conj(tj.residue);
        std::complex<double> const den = ti.omega + std::conj(tj.omega);
        value += (num / den).real();
      }
  } else {
    std::vector<bool> used(channel.size(), false);
    for (std::size_t i = 0; i < channel.size(); ++i) {
      if (used[i]) continue;
      bool paired = false;
      for (std::size_t j = i + 1; j < channel.size(); ++j) {
        if (used[j]) continue;
        if (std::abs(channel[i].omega - std::conj(channel[j].omega)) <=
            1e-6 * std::abs(channel[i].omega)) {
          value += std::norm(channel[i].residue) / (2.0 * std::abs(channel[i].omega));
          used[i] = used[j] = true;
          paired = true;
          break;
        }
      }
      if (!paired) {
        value += std::norm(channel[i].residue) / (2.0 * channel[i].omega.real());
        used[i] = true;
      }
    }
  }
  return gamma * value;
}

// Steady-state cross-correlator of two eigenmode amplitudes with noise
// projection h_nm: the pole-pair pattern h sum Re[R R'* / (omega + omega'*)]
// over the damped principal channels, plus matched-frequency undamped pairs.
inline double steady_correlator(std::vector<PoleTerm> const& poles_n,
                                std::vector<PoleTerm> const& poles_m, double h_nm) {
  double value = 0.0;
  auto const cn = detail::principal_forward(poles_n);
  auto const cm = detail::principal_forward(poles_m);
  for (auto const& ti : cn)
    for (auto const& tj : cm) {
      std::complex<double> const num = ti.residue * std::conj(tj.residue);
      std::complex<double> const den = ti.omega + std::conj(tj.omega);
      value += (num / den).real();
    }
  for (auto const& ti : poles_n)
    for (auto const& tj : poles_m) {
      if (ti.direction != PoleDirection::marginal || tj.direction != PoleDirection::marginal)
        continue;
      if (!(ti.omega.real() > 0.0)) continue;
      if (std::abs(ti.omega - tj.omega) > 1e-9 * (std::abs(ti.omega) + std::abs(tj.omega)))
        continue;
      value += (ti.residue * std::conj(tj.residue)).real() /
               (ti.omega.real() + tj.omega.real());
    }
  return h_nm * value;
}

// Normalization constant of the steady variance of a pure p-th derivative
// kernel, defined by <phi^2> = Gamma c_p / (C(p) mu^{2-1/p}) at unit scales.
inline double genp_kernel_constant(int p, EvalPolicy const& pol = {}) {
  if (p < 1) throw std::domain_error("genp_kernel_constant: p must be >= 1");
  std::vector<std::complex<double>> kernel(static_cast<std::size_t>(p) + 1, 0.0);
  kernel.back() = 1.0;
  auto const poles = greens_kernel_decomposition(kernel, 1.0, pol);
  return 1.0 / steady_correlator(poles, 1.0);
}

// Force between plates in a medium with a pure p-th order time-derivative
// kernel and white noise. The transverse-mode sum minus its bulk subtraction
// reduces to the exponentially small (Bessel) part of the regularized 1D
// lattice sums at s = 2 - 1/p; every power-law piece cancels identically.
inline double genp_force(int p, double gamma, double c_p, double k0, double L,
                         EvalPolicy const& pol = {}) {
  if (p < 1) throw std::domain_error("genp_force: p must be >= 1");
  if (!(gamma > 0.0) || !(c_p > 0.0) || !(L > 0.0))
    throw std::domain_error("genp_force: gamma, c_p, L must be positive");
  if (!(k0 >= 0.0)) throw std::domain_error("genp_force: k0 must be nonnegative");
  double const cp_norm = genp_kernel_constant(p, pol);

  if (k0 == 0.0) {
    // Term-by-term closed form of the massless sum.
    if (p == 1)
      return gamma * c_p * specfun::zeta(3.0) / (16.0 * M_PI * L * L * L);
    double const pd = static_cast<double>(p);
    return gamma * c_p * std::sin(M_PI / pd) * boost::math::tgamma(2.0 / pd) *
           specfun::zeta(1.0 + 2.0 / pd) /
           (std::pow(2.0, 1.0 + 2.0 / pd) * M_PI * M_PI * (pd - 1.0) * cp_norm *
            std::pow(L, 1.0 + 2.0 / pd));
  }

  double const s = 2.0 - 1.0 / static_cast<double>(p);
  double const alpha = M_PI / L;
  auto integrand = [&](double u) {
    double const zs = regulate::chowla_selberg_bessel(s, alpha, u, pol);
    double const zs1 = regulate::chowla_selberg_bessel(s - 1.0, alpha, u, pol);
    return u * (u * u * zs - zs1);
  };
  double const integral = integrate_to_inf(integrand, k0, pol);
  return gamma * c_p / (4.0 * M_PI * L * cp_norm) * integral;
}

// ---------------------------------------------------------------------------
// Dispatcher tying the description types to the closed forms
// ---------------------------------------------------------------------------

inline double plate_force(MediumSpec const& medium, NoiseSpec const& noise,
                          PlatesGeometry const& geometry, EvalPolicy const& pol = {}) {
  geometry.validate();
  noise.validate();
  double const g = noise.gamma;
  double const L = geometry.gap;
  switch (medium.kind) {
    case MediumKind::reaction_diffusion:
      switch (noise.kind) {
        case NoiseKind::white:
          return rd_force_white(g, medium.D, geometry.k0, L);
        case NoiseKind::temporal_exponential:
          return rd_force_temporal(g, medium.D, geometry.k0, noise.a, L);
        case NoiseKind::quenched:
          return rd_force_temporal(g, medium.D, geometry.k0, 0.0, L);
        case NoiseKind::spatial_homogeneous:
          return rd_force_spatial(g, medium.lambda);
      }
      break;
    case MediumKind::nematic:
      switch (noise.kind) {
        case NoiseKind::white:
          return lc_force_white(g, medium.lambda, medium.kappa2, geometry.k0, L, pol);
        case NoiseKind::temporal_exponential:
          return lc_force_temporal(g, medium.lambda, medium.kappa1, medium.kappa2, noise.a, L,
                                   pol);
        case NoiseKind::quenched:
          return lc_force_quenched(g, medium.lambda, medium.kappa1, medium.kappa2, L);
        case NoiseKind::spatial_homogeneous:
          return lc_force_spatialcorr(g, medium.lambda, geometry.k0, L, pol);
      }
      break;
    case MediumKind::two_field:
      if (noise.kind != NoiseKind::white)
        throw std::domain_error("plate_force: two-field medium supports white noise only");
      return twofield_stress(g, medium.kappa, medium.lambda1, medium.lambda2, medium.lambda12,
                             medium.D, L);
    case MediumKind::generalized_p:
      if (noise.kind != NoiseKind::white)
        throw std::domain_error("plate_force: generalized kernel supports white noise only");
      return genp_force(medium.p, g, medium.c_p, geometry.k0, L, pol);
  }
  throw std::domain_error("plate_force: unsupported combination");
}

}  // namespace casimir::media
