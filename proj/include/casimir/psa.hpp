#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "casimir/policy.hpp"
#include "casimir/quadrature.hpp"
#include "casimir/regulate.hpp"
#include "casimir/roots.hpp"

// Pairwise-summation (dilute/weak-coupling) Casimir energies between extended
// bodies: two-point kernels at zero and finite temperature, topological-
// insulator response functions and their phase map, sphere-plate energy
// curves, N-body superposition, and the leading classical three-point
// correction.  Reduced units hbar = c = k_B = 1 throughout.
namespace casimir::psa {

inline constexpr double fine_structure = 1.0 / 137.035999;

// ---------------------------------------------------------------------------
// Materials
// ---------------------------------------------------------------------------

// Weak-response material entering pairwise kernels.  Three flavours:
//  - susceptibility: frequency-flat electric/magnetic susceptibilities plus
//    optional isotropic magnetoelectric couplings (alpha drives E->B, beta
//    drives B->E; reciprocal media have alpha = beta).
//  - resonant: single-resonance dielectric eps(i kappa) = eps0 + w^2 /
//    (1 + kappa^2/omega_r^2) with a frequency-flat axion-type magnetoelectric
//    coupling alpha_bar = fine_structure * theta/pi (topological insulator).
//  - point: a polarizable point particle with static electric and magnetic
//    polarizabilities (enters point_pair_energy only).
struct MaterialPSA {
  enum class Kind { susceptibility, resonant, point };

  Kind kind = Kind::susceptibility;

  // susceptibility flavour
  double eps_tilde = 0.0;   // eps - 1
  double mu_tilde = 0.0;    // mu - 1
  double alpha_me = 0.0;    // magnetoelectric E->B response
  double beta_me = 0.0;     // magnetoelectric B->E response

  // resonant flavour
  double eps0 = 1.0;            // static background permittivity, >= 1
  double oscillator_strength = 0.0;  // w, >= 0
  double theta_over_pi = 0.0;   // axion angle in units of pi
  double omega_r = 1.0;         // resonance frequency, > 0

  // point flavour
  double alpha_e = 0.0;  // electric polarizability
  double alpha_h = 0.0;  // magnetic polarizability

  static MaterialPSA static_material(double eps_tilde, double mu_tilde = 0.0,
                                     double alpha_me = 0.0, double beta_me = 0.0) {
    MaterialPSA m;
    m.kind = Kind::susceptibility;
    m.eps_tilde = eps_tilde;
    m.mu_tilde = mu_tilde;
    m.alpha_me = alpha_me;
    m.beta_me = beta_me;
    m.validate();
    return m;
  }

  static MaterialPSA topological(double eps0, double oscillator_strength,
                                 double theta_over_pi, double omega_r = 1.0) {
    MaterialPSA m;
    m.kind = Kind::resonant;
    m.eps0 = eps0;
    m.oscillator_strength = oscillator_strength;
    m.theta_over_pi = theta_over_pi;
    m.omega_r = omega_r;
    m.validate();
    return m;
  }

  static MaterialPSA point_particle(double alpha_e, double alpha_h = 0.0) {
    MaterialPSA m;
    m.kind = Kind::point;
    m.alpha_e = alpha_e;
    m.alpha_h = alpha_h;
    m.validate();
    return m;
  }

  double alpha_bar() const { return fine_structure * theta_over_pi; }

  // True while the dilution assumption behind pairwise summation is
  // comfortable; larger responses are allowed but increasingly overestimate
  // the magnitude of the exact energy.
  bool within_soft_limit() const {
    switch (kind) {
      case Kind::susceptibility:
        return std::abs(eps_tilde) <= 0.5 && std::abs(mu_tilde) <= 0.5;
      case Kind::resonant:
        return std::abs(eps0 - 1.0 + oscillator_strength * oscillator_strength) <= 0.5;
      case Kind::point:
        return true;
    }
    return true;
  }

  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    switch (kind) {
      case Kind::susceptibility:
        if (!finite(eps_tilde) || !finite(mu_tilde) || !finite(alpha_me) || !finite(beta_me))
          throw std::domain_error("MaterialPSA: susceptibilities must be finite");
        break;
      case Kind::resonant: {
        if (!(eps0 >= 1.0))
          throw std::domain_error("MaterialPSA: eps0 must be >= 1");
        if (!(oscillator_strength >= 0.0) || !finite(oscillator_strength))
          throw std::domain_error("MaterialPSA: oscillator strength must be >= 0");
        if (!(omega_r > 0.0))
          throw std::domain_error("MaterialPSA: omega_r must be > 0");
        if (!finite(theta_over_pi))
          throw std::domain_error("MaterialPSA: theta must be finite");
        double eps_static = eps0 + oscillator_strength * oscillator_strength;
        if (!(std::abs(alpha_bar()) < std::sqrt(eps_static)))
          throw std::domain_error("MaterialPSA: magnetoelectric coupling exceeds sqrt(eps(0))");
        break;
      }
      case Kind::point:
        if (!finite(alpha_e) || !finite(alpha_h))
          throw std::domain_error("MaterialPSA: polarizabilities must be finite");
        break;
    }
  }
};

// ---------------------------------------------------------------------------
// Body regions
// ---------------------------------------------------------------------------

// Volume over which a material response is smeared.  Slabs are infinite in
// x,y and reported per unit cross-sectional area; a slab of infinite
// thickness is a half-space.  Voxel clouds are midpoint samples with a
// common cell volume.
struct BodyRegion {
  enum class Kind { sphere, slab, voxels };

  Kind kind = Kind::sphere;

  // sphere
  double radius = 1.0;
  std::array<double, 3> center = {0.0, 0.0, 0.0};

  // slab: occupies z in [z_lo, z_hi]; z_hi may be +infinity (half-space)
  double z_lo = 0.0;
  double z_hi = 1.0;

  // voxels
  std::vector<std::array<double, 3>> points;
  double cell_volume = 0.0;

  static BodyRegion sphere_at(double radius, std::array<double, 3> center = {0.0, 0.0, 0.0}) {
    BodyRegion b;
    b.kind = Kind::sphere;
    b.radius = radius;
    b.center = center;
    b.validate();
    return b;
  }

  static BodyRegion halfspace_slab(double thickness, double gap) {
    BodyRegion b;
    b.kind = Kind::slab;
    b.z_lo = gap;
    b.z_hi = std::isinf(thickness) ? std::numeric_limits<double>::infinity() : gap + thickness;
    b.validate();
    return b;
  }

  static BodyRegion voxel_cloud(std::vector<std::array<double, 3>> points, double cell_volume) {
    BodyRegion b;
    b.kind = Kind::voxels;
    b.points = std::move(points);
    b.cell_volume = cell_volume;
    b.validate();
    return b;
  }

  bool is_halfspace() const { return kind == Kind::slab && std::isinf(z_hi); }

  double volume() const {
    switch (kind) {
      case Kind::sphere:
        return 4.0 * M_PI * radius * radius * radius / 3.0;
      case Kind::slab:
        return std::numeric_limits<double>::infinity();
      case Kind::voxels:
        return cell_volume * static_cast<double>(points.size());
    }
    return 0.0;
  }

  void validate() const {
    switch (kind) {
      case Kind::sphere:
        if (!(radius > 0.0) || !std::isfinite(radius))
          throw std::domain_error("BodyRegion: sphere radius must be positive and finite");
        for (double c : center)
          if (!std::isfinite(c)) throw std::domain_error("BodyRegion: sphere center must be finite");
        break;
      case Kind::slab:
        if (!std::isfinite(z_lo))
          throw std::domain_error("BodyRegion: slab gap must be finite");
        if (!(z_hi > z_lo))
          throw std::domain_error("BodyRegion: slab thickness must be positive");
        break;
      case Kind::voxels:
        if (points.empty())
          throw std::domain_error("BodyRegion: voxel cloud must contain at least one point");
        if (!(cell_volume > 0.0) || !std::isfinite(cell_volume))
          throw std::domain_error("BodyRegion: voxel cell volume must be positive and finite");
        for (auto const& p : points)
          for (double c : p)
            if (!std::isfinite(c)) throw std::domain_error("BodyRegion: voxel points must be finite");
        break;
    }
  }
};

// Midpoint-sample a sphere on an n^3 grid over its bounding box, keeping
// centers inside the surface.  The cell volume is normalised so the cloud
// reproduces the exact sphere volume; without that correction the staircase
// surface error is first order in the cell size and dominates kernel
// integrals.
inline BodyRegion voxelize(BodyRegion const& body, std::size_t per_axis) {
  body.validate();
  if (body.kind == BodyRegion::Kind::voxels) return body;
  if (body.kind != BodyRegion::Kind::sphere)
    throw std::domain_error("voxelize: only spheres and voxel clouds are supported");
  if (per_axis < 2) throw std::domain_error("voxelize: need at least 2 cells per axis");

  double const R = body.radius;
  double const h = 2.0 * R / static_cast<double>(per_axis);
  std::vector<std::array<double, 3>> pts;
  pts.reserve(per_axis * per_axis * per_axis);
  for (std::size_t i = 0; i < per_axis; ++i) {
    double x = -R + (static_cast<double>(i) + 0.5) * h;
    for (std::size_t j = 0; j < per_axis; ++j) {
      double y = -R + (static_cast<double>(j) + 0.5) * h;
      for (std::size_t k = 0; k < per_axis; ++k) {
        double z = -R + (static_cast<double>(k) + 0.5) * h;
        if (x * x + y * y + z * z <= R * R)
          pts.push_back({body.center[0] + x, body.center[1] + y, body.center[2] + z});
      }
    }
  }
  if (pts.empty()) throw std::domain_error("voxelize: no cell centers fell inside the sphere");
  double cell = body.volume() / static_cast<double>(pts.size());
  return BodyRegion::voxel_cloud(std::move(pts), cell);
}

// ---------------------------------------------------------------------------
// Two-point coupling coefficients
// ---------------------------------------------------------------------------

namespace detail {

// Channel weights of the zero-temperature 1/R^7 kernel and of the two
// finite-temperature kernels.  "diag" multiplies the EE/HH-type kernel,
// "cross" the EH/HE-type one; the T = 0 coefficient is 23*diag - 7*cross.
struct PairWeights {
  double diag = 0.0;
  double cross = 0.0;
};

inline PairWeights susceptibility_weights(MaterialPSA const& a, MaterialPSA const& b) {
  PairWeights w;
  w.diag = a.eps_tilde * b.eps_tilde + a.mu_tilde * b.mu_tilde + a.alpha_me * b.beta_me +
           a.beta_me * b.alpha_me;
  w.cross = a.eps_tilde * b.mu_tilde + a.mu_tilde * b.eps_tilde - a.alpha_me * b.alpha_me -
            a.beta_me * b.beta_me;
  return w;
}

// Static (kappa -> 0) susceptibilities of any non-point material, used by the
// classical high-temperature kernel.
inline MaterialPSA static_limit(MaterialPSA const& m) {
  switch (m.kind) {
    case MaterialPSA::Kind::susceptibility:
      return m;
    case MaterialPSA::Kind::resonant: {
      MaterialPSA s;
      s.kind = MaterialPSA::Kind::susceptibility;
      double ab = m.alpha_bar();
      s.eps_tilde = m.eps0 - 1.0 + m.oscillator_strength * m.oscillator_strength + ab * ab;
      s.mu_tilde = 0.0;
      s.alpha_me = ab;
      s.beta_me = ab;
      return s;
    }
    case MaterialPSA::Kind::point:
      throw std::domain_error("gamma_cl: point particles have no volume susceptibility");
  }
  throw std::domain_error("gamma_cl: unknown material kind");
}

}  // namespace detail

// Zero-temperature coupling coefficient of the -1/((4 pi)^3 R^7) pair kernel.
inline double gamma0_static(MaterialPSA const& a, MaterialPSA const& b) {
  a.validate();
  b.validate();
  if (a.kind != MaterialPSA::Kind::susceptibility || b.kind != MaterialPSA::Kind::susceptibility)
    throw std::domain_error("gamma0_static: both materials must be susceptibility-type");
  auto w = detail::susceptibility_weights(a, b);
  return 23.0 * w.diag - 7.0 * w.cross;
}

// Classical (high-temperature) coupling coefficient of the
// -k_B T/((4 pi)^2 R^6) pair kernel, evaluated from static susceptibilities.
inline double gamma_cl(MaterialPSA const& a, MaterialPSA const& b) {
  a.validate();
  b.validate();
  MaterialPSA as = detail::static_limit(a);
  MaterialPSA bs = detail::static_limit(b);
  return 3.0 * (as.eps_tilde * bs.eps_tilde + as.mu_tilde * bs.mu_tilde +
                as.alpha_me * bs.beta_me + as.beta_me * bs.alpha_me);
}

// ---------------------------------------------------------------------------
// Finite-temperature pair kernels
// ---------------------------------------------------------------------------

enum class Channel { ee, hh, eh, he };

namespace detail {

// Matsubara polynomial entering every exponential mode of the pair kernels.
inline double mode_poly(double u) {
  return 6.0 + u * (12.0 + u * (10.0 + u * (4.0 + 2.0 * u)));
}

// Diagonal (EE/HH) kernel: sum_{n>=0}' exp(-2 n lambda) P(n lambda) with the
// n = 0 term halved.  Closed form below, Taylor series above; both carry the
// small-lambda limit lambda*k -> 23/2 and the plateau k -> 3.
inline double kernel_diag(double lam) {
  if (lam < 0.25) {
    double l2 = lam * lam;
    double l6 = l2 * l2 * l2;
    // lambda * k(lambda) = 23/2 + c6 l^6 + c8 l^8 + ...
    double s = 23.0 / 2.0 +
               l6 * (11.0 / 945.0 +
                     l2 * (-23.0 / 3150.0 +
                           l2 * (86.0 / 31185.0 +
                                 l2 * (-98122.0 / 127702575.0 + l2 * (214.0 / 1216215.0)))));
    return s / lam;
  }
  double e = std::exp(-2.0 * lam);
  double l = lam;
  double l2 = l * l, l3 = l2 * l, l4 = l3 * l;
  double e2 = e * e, e3 = e2 * e, e4 = e3 * e, e5 = e4 * e;
  double num = 3.0 + 3.0 * e5 + e4 * (-9.0 - 12.0 * l + 10.0 * l2 - 4.0 * l3 + 2.0 * l4) +
               e3 * (6.0 + 36.0 * l - 10.0 * l2 - 12.0 * l3 + 22.0 * l4) +
               e2 * (6.0 - 36.0 * l - 10.0 * l2 + 12.0 * l3 + 22.0 * l4) +
               e * (-9.0 + 12.0 * l + 10.0 * l2 + 4.0 * l3 + 2.0 * l4);
  double d = 1.0 - e;
  return num / (d * d * d * d * d);
}

// Cross (EH/HE) kernel: -2 sum_{n>=1} exp(-2 n lambda) Q(n lambda) with
// Q(u) = u^2 (1 + u)^2.  Small-lambda limit lambda*k -> -7/2, decays to 0.
inline double kernel_cross(double lam) {
  if (lam < 0.25) {
    double l2 = lam * lam;
    double l6 = l2 * l2 * l2;
    double s = -7.0 / 2.0 +
               l6 * (1.0 / 189.0 +
                     l2 * (1.0 / 450.0 +
                           l2 * (-2.0 / 1155.0 +
                                 l2 * (1382.0 / 2321865.0 + l2 * (-2.0 / 13365.0)))));
    return s / lam;
  }
  double e = std::exp(-2.0 * lam);
  double l = lam;
  double l2 = l * l;
  double e2 = e * e, e3 = e2 * e, e4 = e3 * e;
  double num = e4 * (1.0 - 2.0 * l + l2) + e3 * (-1.0 - 6.0 * l + 11.0 * l2) +
               e2 * (-1.0 + 6.0 * l + 11.0 * l2) + e * (1.0 + 2.0 * l + l2);
  double d = 1.0 - e;
  return -2.0 * l2 * num / (d * d * d * d * d);
}

}  // namespace detail

// Dimensionless finite-temperature pair kernel k_channel(lambda) with
// lambda = 2 pi k_B T R.  The pair energy density between susceptibility
// materials is -k_B T/((4 pi)^2 R^6) * [diag_weight * k_ee + cross_weight *
// k_eh]; small lambda recovers the T = 0 kernel via lambda*k -> (23/2, -7/2),
// large lambda the classical plateau (3, 0).
inline double pair_kernel_finiteT(double lambda, Channel channel) {
  if (!(lambda > 0.0)) throw std::domain_error("pair_kernel_finiteT: lambda must be > 0");
  switch (channel) {
    case Channel::ee:
    case Channel::hh:
      return detail::kernel_diag(lambda);
    case Channel::eh:
    case Channel::he:
      return detail::kernel_cross(lambda);
  }
  throw std::domain_error("pair_kernel_finiteT: unknown channel");
}

// ---------------------------------------------------------------------------
// Topological-insulator response functions
// ---------------------------------------------------------------------------

namespace detail {

// F1(x) = x f1(x) and F2(x) = x f2(x) as absolutely convergent integrals over
// u = x t with s = x^2/(x^2 + u^2): the integrand is bounded by the
// exponential at every x, so one quadrature serves all distances.
// Exponentially damped weight, cut before the polynomial factor can
// overflow against an underflowed exponential.
inline double damped_mode_poly(double u) {
  if (u > 400.0) return 0.0;
  return std::exp(-2.0 * u) * mode_poly(u);
}

inline double ti_F1_direct(double x, EvalPolicy const& pol = {}) {
  double x2 = x * x;
  return 2.0 * integrate_to_inf(
                   [x2](double u) {
                     double s = x2 / (x2 + u * u);
                     return damped_mode_poly(u) * s * s;
                   },
                   0.0, pol);
}

inline double ti_F2_direct(double x, EvalPolicy const& pol = {}) {
  double x2 = x * x;
  return 2.0 * integrate_to_inf(
                   [x2](double u) {
                     double s = x2 / (x2 + u * u);
                     return damped_mode_poly(u) * s;
                   },
                   0.0, pol);
}

// x dF/dx in the same convergent form (x ds/dx = 2 s (1-s)).
inline double ti_F1_xderiv(double x, EvalPolicy const& pol = {}) {
  double x2 = x * x;
  return 8.0 * integrate_to_inf(
                   [x2](double u) {
                     double s = x2 / (x2 + u * u);
                     return damped_mode_poly(u) * s * s * (1.0 - s);
                   },
                   0.0, pol);
}

inline double ti_F2_xderiv(double x, EvalPolicy const& pol = {}) {
  double x2 = x * x;
  return 4.0 * integrate_to_inf(
                   [x2](double u) {
                     double s = x2 / (x2 + u * u);
                     return damped_mode_poly(u) * s * (1.0 - s);
                   },
                   0.0, pol);
}

// Chebyshev expansions of F1, F2 in t = ln(x) over [1e-5, 1e4], built once.
// A globally smooth interpolant matters here: these enter adaptive
// quadratures, whose error estimators degenerate on piecewise interpolants.
// F is analytic in t on the whole strip, so the expansion converges
// geometrically; outside the window the exact limits take over
// (F -> (3 pi, 6 pi) x below, 23 - (129, 64.5)/x^2 above).
struct TiTable {
  static constexpr std::size_t n_cheb = 288;
  double t_lo, t_hi;
  std::vector<double> c1, c2;

  TiTable() : t_lo(std::log(1e-5)), t_hi(std::log(1e4)), c1(n_cheb, 0.0), c2(n_cheb, 0.0) {
    double mid = 0.5 * (t_lo + t_hi), half = 0.5 * (t_hi - t_lo);
    EvalPolicy pol;
    std::vector<double> f1(n_cheb), f2(n_cheb), theta(n_cheb);
    for (std::size_t k = 0; k < n_cheb; ++k) {
      theta[k] = M_PI * (static_cast<double>(k) + 0.5) / n_cheb;
      double x = std::exp(mid + half * std::cos(theta[k]));
      f1[k] = ti_F1_direct(x, pol);
      f2[k] = ti_F2_direct(x, pol);
    }
    for (std::size_t j = 0; j < n_cheb; ++j) {
      double a1 = 0.0, a2 = 0.0;
      for (std::size_t k = 0; k < n_cheb; ++k) {
        double w = std::cos(static_cast<double>(j) * theta[k]);
        a1 += f1[k] * w;
        a2 += f2[k] * w;
      }
      c1[j] = 2.0 * a1 / n_cheb;
      c2[j] = 2.0 * a2 / n_cheb;
    }
    // Trailing coefficients are rounding noise; dropping them lowers both the
    // evaluation cost and the noise floor of the Clenshaw sum.
    double peak = 0.0;
    for (std::size_t j = 0; j < n_cheb; ++j)
      peak = std::max({peak, std::abs(c1[j]), std::abs(c2[j])});
    std::size_t keep = n_cheb;
    while (keep > 8 && std::abs(c1[keep - 1]) < 1e-14 * peak &&
           std::abs(c2[keep - 1]) < 1e-14 * peak)
      --keep;
    c1.resize(keep);
    c2.resize(keep);
  }

  double eval(std::vector<double> const& c, double t) const {
    double y = (2.0 * t - t_lo - t_hi) / (t_hi - t_lo);
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t j = c.size() - 1; j >= 1; --j) {
      double b0 = 2.0 * y * b1 - b2 + c[j];
      b2 = b1;
      b1 = b0;
    }
    return y * b1 - b2 + 0.5 * c[0];
  }

  double F1(double x) const {
    if (x <= 1e-5) return 3.0 * M_PI * x;
    if (x >= 1e4) return 23.0 - 129.0 / (x * x);
    return eval(c1, std::log(x));
  }
  double F2(double x) const {
    if (x <= 1e-5) return 6.0 * M_PI * x;
    if (x >= 1e4) return 23.0 - 64.5 / (x * x);
    return eval(c2, std::log(x));
  }
};

inline TiTable const& ti_table() {
  static TiTable const table;
  return table;
}

// Pair coefficients of the topological gamma0 at shared resonance frequency:
// gamma0(x) = w2 * F1(x) + cross * F2(x) + const, with x = omega_r * R.
struct TiPairCoef {
  double w2;     // w1^2 w2^2
  double cross;  // c1 w2^2 + c2 w1^2
  double cnst;   // 23 c1 c2 + 60 ab1 ab2

  TiPairCoef(MaterialPSA const& a, MaterialPSA const& b) {
    double ab1 = a.alpha_bar(), ab2 = b.alpha_bar();
    double c1 = a.eps0 - 1.0 + ab1 * ab1;
    double c2 = b.eps0 - 1.0 + ab2 * ab2;
    double w1sq = a.oscillator_strength * a.oscillator_strength;
    double w2sq = b.oscillator_strength * b.oscillator_strength;
    w2 = w1sq * w2sq;
    cross = c1 * w2sq + c2 * w1sq;
    cnst = 23.0 * c1 * c2 + 60.0 * ab1 * ab2;
  }

  double gamma0(double x) const {
    auto const& tab = ti_table();
    return w2 * tab.F1(x) + cross * tab.F2(x) + cnst;
  }

  // x * d(gamma0)/dx via the exact derivative quadratures (spline-free).
  double gamma0_xderiv(double x, EvalPolicy const& pol = {}) const {
    return w2 * ti_F1_xderiv(x, pol) + cross * ti_F2_xderiv(x, pol);
  }
};

inline void require_resonant(MaterialPSA const& m, char const* fn) {
  if (m.kind != MaterialPSA::Kind::resonant)
    throw std::domain_error(std::string(fn) + ": material must be resonant (topological)");
}

}  // namespace detail

// Distance-resolved response functions of the single-resonance model,
// f1,2(x) with x = omega_r R: f1(0) = 3 pi, f2(0) = 6 pi, and both decay as
// 23/x at large separation.
inline double ti_f1(double x, EvalPolicy const& pol = {}) {
  if (!(x >= 0.0)) throw std::domain_error("ti_f1: x must be >= 0");
  if (x == 0.0) return 3.0 * M_PI;
  return detail::ti_F1_direct(x, pol) / x;
}

inline double ti_f2(double x, EvalPolicy const& pol = {}) {
  if (!(x >= 0.0)) throw std::domain_error("ti_f2: x must be >= 0");
  if (x == 0.0) return 6.0 * M_PI;
  return detail::ti_F2_direct(x, pol) / x;
}

// Distance-dependent coupling coefficient between two resonant materials with
// a common resonance frequency; the pair energy density is
// -gamma0(omega_r R) / ((4 pi)^3 R^7).
inline double ti_gamma0(double x, MaterialPSA const& a, MaterialPSA const& b) {
  if (!(x >= 0.0)) throw std::domain_error("ti_gamma0: x must be >= 0");
  a.validate();
  b.validate();
  detail::require_resonant(a, "ti_gamma0");
  detail::require_resonant(b, "ti_gamma0");
  return detail::TiPairCoef(a, b).gamma0(x);
}

// ---------------------------------------------------------------------------
// Topological-insulator phase map
// ---------------------------------------------------------------------------

enum class PhaseRegime { quantum, classical };
enum class PhaseClass { attract_all, repel_all, stable_equilibrium };

struct PhaseResult {
  PhaseClass classification = PhaseClass::attract_all;
  // Equilibrium separation in units of c/omega_r; NaN unless stable_equilibrium.
  double equilibrium_distance = std::numeric_limits<double>::quiet_NaN();
};

// Interaction character of two equal-strength single-resonance topological
// insulators (eps0 = 1, oscillator strength w, axion angles theta1, theta2).
// In the quantum regime the sign pattern of gamma0(x) decides: repulsive at
// short range iff 60 q + 23 q^2 < 0 (q = alpha_bar1 * alpha_bar2), attractive
// at long range iff gamma0(infinity) > 0; both together yield a stable
// equilibrium at the energy minimum of -gamma0(x)/x^7.  The classical kernel
// has a distance-free coefficient, so it only ever attracts or repels.
inline PhaseResult ti_phase(double w, double theta1_over_pi, double theta2_over_pi,
                            PhaseRegime regime, EvalPolicy const& pol = {}) {
  MaterialPSA m1 = MaterialPSA::topological(1.0, w, theta1_over_pi);
  MaterialPSA m2 = MaterialPSA::topological(1.0, w, theta2_over_pi);
  double ab1 = m1.alpha_bar(), ab2 = m2.alpha_bar();
  double q = ab1 * ab2;
  double w2 = w * w, w4 = w2 * w2;

  if (regime == PhaseRegime::classical) {
    double gcl = w4 + (ab1 * ab1 + ab2 * ab2) * w2 + q * q + 2.0 * q;
    return {gcl >= 0.0 ? PhaseClass::attract_all : PhaseClass::repel_all,
            std::numeric_limits<double>::quiet_NaN()};
  }

  detail::TiPairCoef coef(m1, m2);
  double g_short = 60.0 * q + 23.0 * q * q;          // gamma0(0)
  double g_long = coef.w2 * 23.0 + coef.cross * 23.0 + coef.cnst;  // gamma0(inf)

  // gamma0 is nondecreasing in x (F1, F2 increase and their weights are
  // nonnegative for eps0 = 1), so its sign changes at most once.
  if (g_short >= 0.0) return {PhaseClass::attract_all, std::numeric_limits<double>::quiet_NaN()};
  if (g_long <= 0.0) return {PhaseClass::repel_all, std::numeric_limits<double>::quiet_NaN()};

  auto g0 = [&coef](double x) { return coef.gamma0(x); };
  double lo = 1e-6, hi = 1e-4;
  while (g0(hi) < 0.0 && hi < 1e8) hi *= 2.0;
  while (g0(lo) > 0.0 && lo > 1e-12) lo *= 0.5;
  double x_cross = find_root(g0, lo, hi);

  // Energy -gamma0(x)/x^7 is stationary where x gamma0'(x) = 7 gamma0(x);
  // beyond the sign crossing the energy dips negative and recovers, so the
  // minimum bracket starts at x_cross.
  auto balance = [&](double x) { return coef.gamma0_xderiv(x, pol) - 7.0 * coef.gamma0(x); };
  double blo = x_cross * (1.0 + 1e-9), bhi = x_cross * 2.0;
  while (balance(bhi) > 0.0 && bhi < 1e8) bhi *= 2.0;
  double x_eq = find_root(balance, blo, bhi);
  return {PhaseClass::stable_equilibrium, x_eq};
}

// ---------------------------------------------------------------------------
// Geometry reductions
// ---------------------------------------------------------------------------

namespace detail {

// Integral of f(R) over the tail R in [c, inf) with algebraic decay, mapped
// to (0, 1] so the endpoint clustering of tanh-sinh handles R -> inf.
template <typename F>
double integrate_tail(F&& f, double c, EvalPolicy const& pol) {
  return integrate_singular(
      [&f, c](double v) {
        double R = c / v;
        if (!(R < 1e100)) return 0.0;
        return f(R) * R / v;
      },
      0.0, 1.0, pol);
}

// Mutual-distance integral of f(R) between a point and a sphere of radius R2
// whose center is rho away: (pi/rho) * Int_{rho-R2}^{rho+R2} m (R2^2 - (rho-m)^2) f(m) dm.
template <typename F>
double point_to_sphere(double rho, double R2, F&& f, EvalPolicy const& pol) {
  return M_PI / rho *
         integrate(
             [&f, rho, R2](double m) {
               double w = R2 * R2 - (rho - m) * (rho - m);
               return m * w * f(m);
             },
             rho - R2, rho + R2, pol);
}

// Same between a point and a slab whose near face is "a" away and far face
// "b" away (b may be infinite): shells of radius R >= a intersect the slab in
// a cap band of height min(R, b) - a.
template <typename F>
double point_to_slab(double a, double b, F&& f, EvalPolicy const& pol) {
  if (std::isinf(b))
    return 2.0 * M_PI * integrate_tail([&f, a](double R) { return R * (R - a) * f(R); }, a, pol);
  double inner = integrate([&f, a](double R) { return R * (R - a) * f(R); }, a, b, pol);
  double outer = (b - a) * integrate_tail([&f](double R) { return R * f(R); }, b, pol);
  return 2.0 * M_PI * (inner + outer);
}

// Distances from a point at height z to the faces of a slab [z_lo, z_hi].
struct SlabReach {
  double near, far;
};

inline SlabReach slab_reach(double z, double z_lo, double z_hi) {
  if (z < z_lo) return {z_lo - z, z_hi - z};  // far may be inf
  if (std::isinf(z_hi) || z <= z_hi)
    throw std::domain_error("psa_energy: bodies overlap");
  return {z - z_hi, z - z_lo};
}

inline double dist3(std::array<double, 3> const& p, std::array<double, 3> const& q) {
  double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline void require_disjoint(BodyRegion const& b1, BodyRegion const& b2,
                             char const* fn = "psa_energy") {
  auto overlap = [fn] { throw std::domain_error(std::string(fn) + ": bodies overlap"); };
  auto k1 = b1.kind, k2 = b2.kind;
  using K = BodyRegion::Kind;
  if (k1 == K::sphere && k2 == K::sphere) {
    if (dist3(b1.center, b2.center) <= b1.radius + b2.radius) overlap();
  } else if (k1 == K::sphere && k2 == K::slab) {
    if (b1.center[2] + b1.radius >= b2.z_lo && b1.center[2] - b1.radius <= b2.z_hi) overlap();
  } else if (k1 == K::slab && k2 == K::sphere) {
    require_disjoint(b2, b1, fn);
  } else if (k1 == K::slab && k2 == K::slab) {
    if (b1.z_hi >= b2.z_lo && b2.z_hi >= b1.z_lo) overlap();
  } else if (k1 == K::voxels && k2 == K::sphere) {
    for (auto const& p : b1.points)
      if (dist3(p, b2.center) <= b2.radius) overlap();
  } else if (k1 == K::sphere && k2 == K::voxels) {
    require_disjoint(b2, b1, fn);
  } else if (k1 == K::voxels && k2 == K::slab) {
    for (auto const& p : b1.points)
      if (p[2] >= b2.z_lo && p[2] <= b2.z_hi) overlap();
  } else if (k1 == K::slab && k2 == K::voxels) {
    require_disjoint(b2, b1, fn);
  } else {
    for (auto const& p : b1.points)
      for (auto const& q : b2.points)
        if (dist3(p, q) == 0.0) overlap();
  }
}

// Double volume integral of a radial kernel f(R) over two bodies; slab-slab
// pairs are returned per unit cross-sectional area.
template <typename F>
double pair_geometry_integral(BodyRegion const& b1, BodyRegion const& b2, F&& f,
                              EvalPolicy const& pol) {
  using K = BodyRegion::Kind;
  auto k1 = b1.kind, k2 = b2.kind;

  if (k1 == K::sphere && k2 == K::sphere) {
    double d = dist3(b1.center, b2.center);
    double R1 = b1.radius, R2 = b2.radius;
    return M_PI / d *
           integrate(
               [&](double rho) {
                 double w1 = R1 * R1 - (d - rho) * (d - rho);
                 return rho * w1 * point_to_sphere(rho, R2, f, pol);
               },
               d - R1, d + R1, pol);
  }
  if (k1 == K::sphere && k2 == K::slab) {
    double cz = b1.center[2], R = b1.radius;
    return integrate(
        [&](double z) {
          auto reach = slab_reach(z, b2.z_lo, b2.z_hi);
          double w = R * R - (z - cz) * (z - cz);
          return M_PI * w * point_to_slab(reach.near, reach.far, f, pol);
        },
        cz - R, cz + R, pol);
  }
  if (k1 == K::slab && k2 == K::sphere) return pair_geometry_integral(b2, b1, f, pol);

  if (k1 == K::slab && k2 == K::slab) {
    if (b1.is_halfspace() && b2.is_halfspace())
      throw std::domain_error("psa_energy: two half-spaces have divergent energy per area");
    // integrate over the finite slab's depth
    BodyRegion const& fin = b1.is_halfspace() ? b2 : b1;
    BodyRegion const& oth = b1.is_halfspace() ? b1 : b2;
    return integrate(
        [&](double z) {
          auto reach = slab_reach(z, oth.z_lo, oth.z_hi);
          return point_to_slab(reach.near, reach.far, f, pol);
        },
        fin.z_lo, fin.z_hi, pol);
  }

  if (k1 == K::voxels && (k2 == K::sphere || k2 == K::slab)) {
    double acc = 0.0;
    for (auto const& p : b1.points) {
      if (k2 == K::sphere) {
        acc += point_to_sphere(dist3(p, b2.center), b2.radius, f, pol);
      } else {
        auto reach = slab_reach(p[2], b2.z_lo, b2.z_hi);
        acc += point_to_slab(reach.near, reach.far, f, pol);
      }
    }
    return acc * b1.cell_volume;
  }
  if ((k1 == K::sphere || k1 == K::slab) && k2 == K::voxels)
    return pair_geometry_integral(b2, b1, f, pol);

  // voxel cloud x voxel cloud
  double acc = 0.0;
  for (auto const& p : b1.points)
    for (auto const& q : b2.points) {
      double R = dist3(p, q);
      if (R == 0.0) throw std::domain_error("psa_energy: bodies overlap");
      acc += f(R);
    }
  return acc * b1.cell_volume * b2.cell_volume;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pair energies
// ---------------------------------------------------------------------------

// Pairwise-summation energy between two bodies.  Susceptibility materials
// support any temperature (T = 0 uses the 1/R^7 kernel, T > 0 the
// finite-temperature kernels); resonant materials require T = 0 and a shared
// resonance frequency.  Slab-slab configurations return energy per unit
// area; all other results are total energies.
inline double psa_energy(BodyRegion const& b1, BodyRegion const& b2, MaterialPSA const& m1,
                         MaterialPSA const& m2, regulate::ThermalState const& state = {},
                         EvalPolicy const& pol = {}) {
  b1.validate();
  b2.validate();
  m1.validate();
  m2.validate();
  state.validate();
  pol.validate();
  detail::require_disjoint(b1, b2);

  if (m1.kind == MaterialPSA::Kind::point || m2.kind == MaterialPSA::Kind::point)
    throw std::domain_error("psa_energy: point particles have no volume density; use point_pair_energy");
  if (m1.kind != m2.kind)
    throw std::domain_error("psa_energy: materials must share a response model");

  double T = state.temperature;

  if (m1.kind == MaterialPSA::Kind::resonant) {
    if (T > 0.0)
      throw std::domain_error(
          "psa_energy: finite-temperature resonant response is not available; "
          "use psa_energy_classical for the high-temperature limit");
    if (m1.omega_r != m2.omega_r)
      throw std::domain_error("psa_energy: resonant materials must share omega_r");
    detail::TiPairCoef coef(m1, m2);
    double w = m1.omega_r;
    double pref = 1.0 / (64.0 * M_PI * M_PI * M_PI);
    // The coupling is tabulated, so its evaluation noise floor sits above
    // 1e-12; asking the geometry quadrature for more than ~1e-9 makes the
    // error estimate chase that noise instead of converging.
    EvalPolicy geo = pol;
    geo.rel_tol = std::max(pol.rel_tol, 1e-9);
    return detail::pair_geometry_integral(
        b1, b2,
        [&coef, w, pref](double R) {
          double R2 = R * R;
          double R7 = R2 * R2 * R2 * R;
          return -pref * coef.gamma0(w * R) / R7;
        },
        geo);
  }

  auto wts = detail::susceptibility_weights(m1, m2);
  if (T == 0.0) {
    double g0 = 23.0 * wts.diag - 7.0 * wts.cross;
    double pref = g0 / (64.0 * M_PI * M_PI * M_PI);
    return detail::pair_geometry_integral(
        b1, b2,
        [pref](double R) {
          double R2 = R * R;
          return -pref / (R2 * R2 * R2 * R);
        },
        pol);
  }

  double pref = T / (16.0 * M_PI * M_PI);
  double two_pi_T = 2.0 * M_PI * T;
  return detail::pair_geometry_integral(
      b1, b2,
      [&wts, pref, two_pi_T](double R) {
        double lam = two_pi_T * R;
        double k = wts.diag * detail::kernel_diag(lam) + wts.cross * detail::kernel_cross(lam);
        double R2 = R * R;
        return -pref * k / (R2 * R2 * R2);
      },
      pol);
}

// Classical (high-temperature) limit of the pair energy, valid for any
// mixture of susceptibility and resonant materials via their static
// responses.  Slab-slab pairs are per unit area.
inline double psa_energy_classical(BodyRegion const& b1, BodyRegion const& b2,
                                   MaterialPSA const& m1, MaterialPSA const& m2,
                                   double temperature, EvalPolicy const& pol = {}) {
  b1.validate();
  b2.validate();
  m1.validate();
  m2.validate();
  if (!(temperature > 0.0))
    throw std::domain_error("psa_energy_classical: temperature must be > 0");
  pol.validate();
  detail::require_disjoint(b1, b2);

  double g = gamma_cl(m1, m2);
  double pref = temperature * g / (16.0 * M_PI * M_PI);
  return detail::pair_geometry_integral(
      b1, b2,
      [pref](double R) {
        double R2 = R * R;
        return -pref / (R2 * R2 * R2);
      },
      pol);
}

// Zero-temperature retarded interaction of two polarizable point particles a
// distance d apart.
inline double point_pair_energy(MaterialPSA const& p1, MaterialPSA const& p2, double d) {
  p1.validate();
  p2.validate();
  if (p1.kind != MaterialPSA::Kind::point || p2.kind != MaterialPSA::Kind::point)
    throw std::domain_error("point_pair_energy: both materials must be point particles");
  if (!(d > 0.0)) throw std::domain_error("point_pair_energy: distance must be > 0");
  double g = 23.0 * (p1.alpha_e * p2.alpha_e + p1.alpha_h * p2.alpha_h) -
             7.0 * (p1.alpha_e * p2.alpha_h + p1.alpha_h * p2.alpha_e);
  double d2 = d * d;
  return -g / (4.0 * M_PI * d2 * d2 * d2 * d);
}

// Superposition energy of N >= 2 bodies: sum of psa_energy over unordered
// pairs.  Pairwise summation is additive by construction, so this is exact
// within the model.
inline double psa_nbody(std::vector<BodyRegion> const& bodies,
                        std::vector<MaterialPSA> const& materials,
                        regulate::ThermalState const& state = {}, EvalPolicy const& pol = {}) {
  if (bodies.size() != materials.size())
    throw std::domain_error("psa_nbody: one material per body required");
  if (bodies.size() < 2) throw std::domain_error("psa_nbody: need at least two bodies");
  double acc = 0.0;
  for (std::size_t i = 0; i < bodies.size(); ++i)
    for (std::size_t j = i + 1; j < bodies.size(); ++j)
      acc += psa_energy(bodies[i], bodies[j], materials[i], materials[j], state, pol);
  return acc;
}

// ---------------------------------------------------------------------------
// Sphere-plate curves for topological insulators
// ---------------------------------------------------------------------------

struct SpherePlateCurve {
  std::vector<double> gap;                // surface-to-surface gaps, units c/omega_r
  std::vector<double> energy_per_volume;  // E / V_sphere, units hbar omega_r^4 / c^3
  bool has_equilibrium = false;
  double equilibrium_gap = std::numeric_limits<double>::quiet_NaN();
};

// Energy-per-sphere-volume curve of a small topological sphere above a
// topological half-space, in resonance units (lengths in c/omega_r).  When
// the axion couplings make gamma0 change sign, the curve develops a stable
// minimum whose gap is located to root-finder precision.
inline SpherePlateCurve sphere_plate_psa(double sphere_radius, MaterialPSA const& sphere_mat,
                                         MaterialPSA const& plate_mat,
                                         std::vector<double> gaps = {},
                                         EvalPolicy const& pol = {}) {
  sphere_mat.validate();
  plate_mat.validate();
  detail::require_resonant(sphere_mat, "sphere_plate_psa");
  detail::require_resonant(plate_mat, "sphere_plate_psa");
  if (sphere_mat.omega_r != plate_mat.omega_r)
    throw std::domain_error("sphere_plate_psa: materials must share omega_r");
  if (!(sphere_radius > 0.0))
    throw std::domain_error("sphere_plate_psa: sphere radius must be > 0");
  pol.validate();

  if (gaps.empty()) {
    std::size_t const n = 48;
    double lo = std::log(1e-4), hi = std::log(2.0);
    for (std::size_t i = 0; i < n; ++i)
      gaps.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) / (n - 1)));
  }
  for (double h : gaps)
    if (!(h > 0.0)) throw std::domain_error("sphere_plate_psa: gaps must be > 0");
  std::sort(gaps.begin(), gaps.end());

  detail::TiPairCoef coef(sphere_mat, plate_mat);
  double const Rs = sphere_radius;
  double const vol = 4.0 * M_PI * Rs * Rs * Rs / 3.0;
  double const pref = 1.0 / (64.0 * M_PI * M_PI * M_PI);

  // Same tabulated-coupling noise floor as in psa_energy: keep the nested
  // quadrature tolerance above it.
  EvalPolicy geo = pol;
  geo.rel_tol = std::max(pol.rel_tol, 1e-9);

  auto kernel = [&coef, pref](double R) {
    double R2 = R * R;
    double R7 = R2 * R2 * R2 * R;
    return -pref * coef.gamma0(R) / R7;
  };
  auto energy = [&](double h) {
    double cz = h + Rs;  // plate occupies z <= 0
    return integrate(
        [&](double z) {
          double w = Rs * Rs - (z - cz) * (z - cz);
          return M_PI * w * detail::point_to_slab(z, std::numeric_limits<double>::infinity(),
                                                  kernel, geo);
        },
        cz - Rs, cz + Rs, geo);
  };

  SpherePlateCurve out;
  out.gap = gaps;
  out.energy_per_volume.reserve(gaps.size());
  for (double h : gaps) out.energy_per_volume.push_back(energy(h) / vol);

  for (std::size_t i = 1; i + 1 < gaps.size(); ++i) {
    if (out.energy_per_volume[i] < out.energy_per_volume[i - 1] &&
        out.energy_per_volume[i] < out.energy_per_volume[i + 1] &&
        out.energy_per_volume[i] < 0.0) {
      auto [argmin, minval] = find_minimum(energy, gaps[i - 1], gaps[i + 1]);
      (void)minval;
      out.has_equilibrium = true;
      out.equilibrium_gap = argmin;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Second-order classical correction
// ---------------------------------------------------------------------------

// Fully symmetric three-point kernel of the second-order classical term:
// product over the triangle edges of (R^2 + 3 R_i^2) summed over the i-axis,
// divided by the (R^5)^3 edge norms.  Homogeneous of degree -9.
inline double second_order_kernel(std::array<double, 3> const& r1, std::array<double, 3> const& r2,
                                  std::array<double, 3> const& r3) {
  std::array<double, 3> a{r2[0] - r1[0], r2[1] - r1[1], r2[2] - r1[2]};
  std::array<double, 3> b{r3[0] - r2[0], r3[1] - r2[1], r3[2] - r2[2]};
  std::array<double, 3> c{r1[0] - r3[0], r1[1] - r3[1], r1[2] - r3[2]};
  double a2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
  double b2 = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
  double c2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
  if (a2 == 0.0 || b2 == 0.0 || c2 == 0.0)
    throw std::domain_error("second_order_kernel: coincident points");
  double num = 0.0;
  for (int i = 0; i < 3; ++i)
    num += (a2 + 3.0 * a[i] * a[i]) * (b2 + 3.0 * b[i] * b[i]) * (c2 + 3.0 * c[i] * c[i]);
  double a5 = a2 * a2 * std::sqrt(a2);
  double b5 = b2 * b2 * std::sqrt(b2);
  double c5 = c2 * c2 * std::sqrt(c2);
  return num / (a5 * b5 * c5);
}

// Second-order classical energy correction among three disjoint bodies with
// static electric susceptibilities eps_i - 1: the three-point generalisation
// of the pair term, evaluated by voxel midpoint sums.  Spheres are voxelized
// on a per-axis grid; slabs are rejected (infinite volume makes the triple
// integral diverge).
inline double psa_second_order_cl(BodyRegion const& b1, BodyRegion const& b2,
                                  BodyRegion const& b3, double eps_tilde1, double eps_tilde2,
                                  double eps_tilde3, double temperature,
                                  std::size_t voxels_per_axis = 6) {
  if (!(temperature > 0.0))
    throw std::domain_error("psa_second_order_cl: temperature must be > 0");
  std::array<BodyRegion const*, 3> in{&b1, &b2, &b3};
  std::array<BodyRegion, 3> vox;
  for (int i = 0; i < 3; ++i) {
    in[i]->validate();
    if (in[i]->kind == BodyRegion::Kind::slab)
      throw std::domain_error("psa_second_order_cl: slabs are not supported");
    vox[i] = voxelize(*in[i], voxels_per_axis);
  }
  detail::require_disjoint(vox[0], vox[1], "psa_second_order_cl");
  detail::require_disjoint(vox[1], vox[2], "psa_second_order_cl");
  detail::require_disjoint(vox[0], vox[2], "psa_second_order_cl");

  double sum = 0.0;
  for (auto const& p1 : vox[0].points)
    for (auto const& p2 : vox[1].points)
      for (auto const& p3 : vox[2].points) sum += second_order_kernel(p1, p2, p3);

  double cells = vox[0].cell_volume * vox[1].cell_volume * vox[2].cell_volume;
  double pref = -temperature / (128.0 * M_PI * M_PI * M_PI);
  return pref * eps_tilde1 * eps_tilde2 * eps_tilde3 * cells * sum;
}

}  // namespace casimir::psa
