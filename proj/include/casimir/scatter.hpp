#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/constants/constants.hpp>

#include "casimir/policy.hpp"
#include "casimir/psa.hpp"
#include "casimir/quadrature.hpp"
#include "casimir/roots.hpp"

// Multiple-scattering results for compact objects at asymptotically large
// separation: two spheres in the dipole approximation at finite temperature,
// two polarizable atoms near a perfectly conducting wall (including the
// wall-mediated three-body term), the small-object expansion for a sphere
// facing a wall, and tilted perfect-metal / scalar cylinders together with
// their proximity-force limits.  Reduced units hbar = c = k_B = 1 throughout;
// classical (high-temperature) results scale linearly with the temperature
// argument, so the default temperature = 1 returns them per unit k_B T.
namespace casimir::scatter {

enum class SphereMaterial { perfect_metal, plasma, drude };

enum class CylinderBC { dirichlet, neumann, perfect_metal_em };

enum class ThermalRegime { zero_temperature, classical };

// Two spheres of equal radius at center-to-center separation d.  The dipole
// (asymptotic) approximation keeps the leading R^6 orders; it degrades
// noticeably once radius/separation grows beyond ~0.2.  plasma_wavelength
// feeds the plasma and drude models; dc_conductivity completes the drude
// description but drops out of the leading large-separation orders.
struct SphereModel {
  double radius = 1.0;
  double separation = 10.0;
  SphereMaterial material = SphereMaterial::perfect_metal;
  double plasma_wavelength = 0.0;
  double dc_conductivity = 0.0;

  void validate() const {
    if (!(radius > 0.0))
      throw std::domain_error("SphereModel: radius must be positive");
    if (!(separation > 2.0 * radius))
      throw std::domain_error(
          "SphereModel: separation must exceed the sphere diameter");
    if (material != SphereMaterial::perfect_metal && !(plasma_wavelength > 0.0))
      throw std::domain_error(
          "SphereModel: plasma_wavelength must be positive for this material");
    if (material == SphereMaterial::drude && !(dc_conductivity > 0.0))
      throw std::domain_error(
          "SphereModel: dc_conductivity must be positive for the drude model");
  }
};

struct SpheresExtremum {
  double d_over_lambda_T = 0.0;  // location, separation over thermal wavelength
  double energy_ratio = 0.0;     // E(T) / E(0) at fixed separation
};

struct SpheresThermoCheck {
  double dforce_dtemperature = 0.0;
  double dentropy_dseparation = 0.0;
};

namespace detail {

// Effective dipole weights (w_diag, w_cross) such that the adimensional
// energy is E_ad(z) = -z * (w_diag * K_EE(z) + w_cross * K_EH(z)) with the
// retarded pair kernels K and z = d / lambda_T.  The magnetic-to-electric
// polarizability ratio m fixes w_diag = 1 + m^2 and w_cross = 2 m; a perfect
// metal has m = -1/2, a drude sphere m = 0, and a plasma sphere
// m = -g / (2 y^2) with g = 3 + y^2 - 3 y coth y and y = 2 pi R / lambda_P.
struct DipoleWeights {
  double diag = 0.0;
  double cross = 0.0;
};

inline DipoleWeights dipole_weights(SphereModel const& model) {
  switch (model.material) {
    case SphereMaterial::perfect_metal:
      return {5.0 / 4.0, -1.0};
    case SphereMaterial::drude:
      return {1.0, 0.0};
    case SphereMaterial::plasma: {
      double const y = 2.0 * boost::math::constants::pi<double>() *
                       model.radius / model.plasma_wavelength;
      double g = 0.0;
      if (y < 0.1) {
        double const y2 = y * y;
        g = y2 * y2 * (1.0 / 15.0 + y2 * (-2.0 / 315.0 + y2 / 1575.0));
      } else {
        g = 3.0 + y * y - 3.0 * y / std::tanh(y);
      }
      double const m = -g / (2.0 * y * y);
      return {1.0 + m * m, 2.0 * m};
    }
  }
  throw std::domain_error("SphereModel: unknown material");
}

inline double spheres_e_ad_zero(DipoleWeights w) {
  return -(w.diag * 23.0 - w.cross * 7.0) / 2.0;
}

inline double spheres_e_ad(double z, DipoleWeights w) {
  return -z * (w.diag * psa::pair_kernel_finiteT(z, psa::Channel::ee) +
               w.cross * psa::pair_kernel_finiteT(z, psa::Channel::eh));
}

// d/dz of z * K(z): the adimensional entropy is S_ad = w_diag * D_EE +
// w_cross * D_EH.  Below the seam the exact low-temperature series applies;
// above it the Matsubara sum differentiates term by term,
//   D_EE(z) = 3 + sum_{n>=1} e^{-2nz} (6 + 12u + 6u^2 - 4u^3 + 2u^4 - 4u^5),
//   D_EH(z) =     sum_{n>=1} e^{-2nz} (-6u^2 - 12u^3 - 2u^4 + 4u^5),  u = nz.
// Coefficients of z^5, z^7, ..., z^31 for the series branch:
inline constexpr double kEntropySeriesDiag[14] = {
    0.0698412698412698413, -0.0584126984126984127, 0.027577360910694244,
    -0.00922036223623525211, 0.00246338024115801894, -0.000563540195784204499,
    0.000115141139641388084, -0.0000215919171605078787, 3.78587344918358495e-6,
    -6.28885268594136033e-7, 9.99314276833563341e-8, -1.53011740401356848e-8,
    2.27032049816375088e-9, -3.27883705694682666e-10,
};
inline constexpr double kEntropySeriesCross[14] = {
    0.031746031746031746, 0.0177777777777777778, -0.017316017316017316,
    0.00714253412666111079, -0.00209502431724653947, 0.000503827327356739121,
    -0.000106065975925810698, 0.000020278340451123369, -3.60287050299948416e-6,
    6.04162506192400955e-7, -9.66750064146522581e-8, 1.48812447354321326e-8,
    -2.2171358305640144e-9, 3.21251418348140413e-10,
};

inline double spheres_s_ad_analytic(double z, DipoleWeights w) {
  if (z < 0.25) {
    double const z2 = z * z;
    double dee = 0.0;
    double deh = 0.0;
    for (int k = 13; k >= 0; --k) {
      dee = kEntropySeriesDiag[k] + z2 * dee;
      deh = kEntropySeriesCross[k] + z2 * deh;
    }
    double const z5 = z2 * z2 * z;
    return z5 * (w.diag * dee + w.cross * deh);
  }
  double sum = 3.0 * w.diag;
  for (int n = 1; 2.0 * n * z < 45.0; ++n) {
    double const u = n * z;
    double const vp =
        6.0 + u * (12.0 + u * (6.0 + u * (-4.0 + u * (2.0 - 4.0 * u))));
    double const vx = u * u * (-6.0 + u * (-12.0 + u * (-2.0 + 4.0 * u)));
    sum += std::exp(-2.0 * u) * (w.diag * vp + w.cross * vx);
  }
  return sum;
}

// Fourth-order central difference of the adimensional energy; used for the
// plasma model, whose weights make the analytic branch inapplicable as-is
// only in spirit (the temperature dependence still sits entirely in z, so a
// differentiation in z at relative step 1e-3 reproduces -dE_ad/dz).
inline double spheres_s_ad_fd(double z, DipoleWeights w) {
  double const h = 1.0e-3 * z;
  double const d1 = spheres_e_ad(z + h, w) - spheres_e_ad(z - h, w);
  double const d2 = spheres_e_ad(z + 2.0 * h, w) - spheres_e_ad(z - 2.0 * h, w);
  return -(8.0 * d1 - d2) / (12.0 * h);
}

inline double spheres_s_ad(double z, SphereModel const& model,
                           DipoleWeights w) {
  if (model.material == SphereMaterial::plasma) return spheres_s_ad_fd(z, w);
  return spheres_s_ad_analytic(z, w);
}

inline double reduced_z(SphereModel const& model, double temperature) {
  return 2.0 * boost::math::constants::pi<double>() * model.separation *
         temperature;
}

}  // namespace detail

// Free energy of the two-sphere system (temperature >= 0; T = 0 gives the
// ground-state energy).
inline double spheres_energy(SphereModel const& model, double temperature) {
  model.validate();
  if (temperature < 0.0)
    throw std::domain_error("spheres_energy: temperature must be >= 0");
  auto const w = detail::dipole_weights(model);
  double const r6 = std::pow(model.radius, 6);
  double const pref = r6 / (2.0 * boost::math::constants::pi<double>() *
                            std::pow(model.separation, 7));
  if (temperature == 0.0) return pref * detail::spheres_e_ad_zero(w);
  return pref * detail::spheres_e_ad(detail::reduced_z(model, temperature), w);
}

inline double spheres_entropy(SphereModel const& model, double temperature) {
  model.validate();
  if (temperature < 0.0)
    throw std::domain_error("spheres_entropy: temperature must be >= 0");
  if (temperature == 0.0) return 0.0;
  auto const w = detail::dipole_weights(model);
  double const z = detail::reduced_z(model, temperature);
  double const pref = std::pow(model.radius / model.separation, 6);
  return pref * detail::spheres_s_ad(z, model, w);
}

// Force along the line of centers, F = -dE/dd (negative means attraction).
inline double spheres_force(SphereModel const& model, double temperature) {
  model.validate();
  if (temperature < 0.0)
    throw std::domain_error("spheres_force: temperature must be >= 0");
  auto const w = detail::dipole_weights(model);
  double const pref =
      std::pow(model.radius, 6) /
      (2.0 * boost::math::constants::pi<double>() * std::pow(model.separation, 8));
  if (temperature == 0.0) return 7.0 * pref * detail::spheres_e_ad_zero(w);
  double const z = detail::reduced_z(model, temperature);
  return pref * (7.0 * detail::spheres_e_ad(z, w) +
                 z * detail::spheres_s_ad(z, model, w));
}

// Locations d / lambda_T where the entropy changes sign.  A perfect-metal
// pair has exactly two; a drude pair has none at dipole order.
inline std::vector<double> spheres_entropy_zeros(SphereModel const& model) {
  model.validate();
  auto const w = detail::dipole_weights(model);
  auto s_of_z = [&](double z) { return detail::spheres_s_ad(z, model, w); };
  std::vector<double> zeros;
  int const kN = 800;
  double const lo = 0.01;
  double const hi = 50.0;
  double za = lo;
  double sa = s_of_z(za);
  for (int i = 1; i <= kN; ++i) {
    double const zb = lo * std::pow(hi / lo, double(i) / kN);
    double const sb = s_of_z(zb);
    if (sa == 0.0) {
      zeros.push_back(za);
    } else if (sa * sb < 0.0) {
      zeros.push_back(find_root(s_of_z, za, zb));
    }
    za = zb;
    sa = sb;
  }
  return zeros;
}

// Stationary points of the free energy as a function of temperature at fixed
// separation (entropy zeros), reported with E(T)/E(0).
inline std::vector<SpheresExtremum> spheres_energy_extrema(
    SphereModel const& model) {
  auto const zeros = spheres_entropy_zeros(model);
  auto const w = detail::dipole_weights(model);
  double const e0 = detail::spheres_e_ad_zero(w);
  std::vector<SpheresExtremum> out;
  out.reserve(zeros.size());
  for (double z : zeros)
    out.push_back({z, detail::spheres_e_ad(z, w) / e0});
  return out;
}

// Maxwell-type consistency check: dF/dT and dS/dd evaluated by fourth-order
// central differences.  Equality is an identity of the free energy.
inline SpheresThermoCheck spheres_thermo_cross_check(SphereModel const& model,
                                                     double temperature) {
  model.validate();
  if (!(temperature > 0.0))
    throw std::domain_error(
        "spheres_thermo_cross_check: temperature must be positive");
  SpheresThermoCheck out;
  {
    double const h = 1.0e-3 * temperature;
    double const d1 = spheres_force(model, temperature + h) -
                      spheres_force(model, temperature - h);
    double const d2 = spheres_force(model, temperature + 2.0 * h) -
                      spheres_force(model, temperature - 2.0 * h);
    out.dforce_dtemperature = (8.0 * d1 - d2) / (12.0 * h);
  }
  {
    double const h = 1.0e-3 * model.separation;
    SphereModel m = model;
    auto s_at = [&](double d) {
      m.separation = d;
      return spheres_entropy(m, temperature);
    };
    double const d1 = s_at(model.separation + h) - s_at(model.separation - h);
    double const d2 = s_at(model.separation + 2.0 * h) -
                      s_at(model.separation - 2.0 * h);
    out.dentropy_dseparation = (8.0 * d1 - d2) / (12.0 * h);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Two ground-state atoms near a perfectly conducting wall.

// Static polarizabilities of one atom: electric (alpha) and magnetic (beta),
// split into the component along the wall normal (z) and the in-plane one.
struct AtomPolarizability {
  double alpha_z = 0.0;
  double alpha_par = 0.0;
  double beta_z = 0.0;
  double beta_par = 0.0;

  void validate() const {
    if (alpha_z < 0.0 || alpha_par < 0.0 || beta_z < 0.0 || beta_par < 0.0)
      throw std::domain_error(
          "AtomPolarizability: polarizabilities must be non-negative");
  }
};

struct AtomsWallEnergy {
  double total = 0.0;
  double two_body_direct = 0.0;  // retarded pair interaction, wall absent
  double two_body_image = 0.0;   // pair interaction with the mirror atom
  double three_body = 0.0;       // irreducible atom-atom-wall contribution
};

// Both atoms sit at height H above the wall, a lateral distance L apart.
inline AtomsWallEnergy atoms_wall_energy(double separation, double height,
                                         AtomPolarizability const& a,
                                         AtomPolarizability const& b) {
  a.validate();
  b.validate();
  if (!(separation > 0.0))
    throw std::domain_error("atoms_wall_energy: separation must be positive");
  if (height < 0.0)
    throw std::domain_error("atoms_wall_energy: height must be >= 0");
  double const pi = boost::math::constants::pi<double>();
  double const L = separation;
  double const D = std::hypot(L, 2.0 * height);
  double const el = L / D;  // cosine of the reflection geometry angle
  double const el2 = el * el;

  AtomsWallEnergy out;
  {
    double const quad =
        33.0 * a.alpha_par * b.alpha_par + 13.0 * a.alpha_z * b.alpha_z +
        33.0 * a.beta_par * b.beta_par + 13.0 * a.beta_z * b.beta_z -
        7.0 * (a.alpha_par * b.beta_z + b.alpha_par * a.beta_z) -
        7.0 * (a.beta_par * b.alpha_z + b.beta_par * a.alpha_z);
    out.two_body_direct = -quad / (8.0 * pi * std::pow(L, 7));
  }
  {
    auto block = [&](double xz, double xp, double yz, double yp) {
      return 26.0 * xp * yp + 20.0 * xz * yz -
             14.0 * el2 *
                 (4.0 * xp * yp - 4.5 * (xp * yz + yp * xz) + 5.0 * xz * yz) +
             63.0 * el2 * el2 * (xp - xz) * (yp - yz);
    };
    double const elec =
        block(a.alpha_z, a.alpha_par, b.alpha_z, b.alpha_par);
    double const magn = block(a.beta_z, a.beta_par, b.beta_z, b.beta_par);
    double const cross =
        -7.0 * ((a.alpha_par * b.beta_par + b.alpha_par * a.beta_par) *
                    (1.0 - el2) +
                el2 * (a.alpha_par * b.beta_z + b.alpha_par * a.beta_z)) -
        7.0 * ((a.beta_par * b.alpha_par + b.beta_par * a.alpha_par) *
                   (1.0 - el2) +
               el2 * (a.beta_par * b.alpha_z + b.beta_par * a.alpha_z));
    out.two_body_image = -(elec + magn + cross) / (8.0 * pi * std::pow(D, 7));
  }
  {
    double const g1 = ((((3.0 * el + 15.0) * el + 28.0) * el + 20.0) * el +
                       6.0) * el2 - 5.0 * el - 1.0;
    double const g2 = (((3.0 * el + 15.0) * el + 24.0) * el2 - 10.0) * el2 -
                      5.0 * el - 1.0;
    double const g3 = 4.0 * el2 * (el2 + 5.0 * el + 1.0);
    double const q =
        g1 * (a.alpha_par * b.alpha_par - a.beta_par * b.beta_par) -
        g2 * (a.alpha_z * b.alpha_z - a.beta_z * b.beta_z) +
        g3 * (0.5 * (a.alpha_z * b.beta_par + b.alpha_z * a.beta_par) -
              0.5 * (a.alpha_par * b.beta_z + b.alpha_par * a.beta_z));
    out.three_body = (4.0 / pi) * q /
                     (std::pow(L, 3) * std::pow(D, 4) * std::pow(el + 1.0, 5));
  }
  out.total = out.two_body_direct + out.two_body_image + out.three_body;
  return out;
}

// ---------------------------------------------------------------------------
// Perfect-metal sphere facing a wall: small-object expansion of the force.
// F(R, L, H) = (1 / (pi R^2)) * sum_j f_j(H / L) (R / L)^(j+2) with j = 6, 8;
// the j = 7 coefficient vanishes and j > 8 requires orders that are not
// available in closed form.

namespace detail {

// Taylor coefficients of f6 and f8 in powers of h^2, used below the seam at
// h = 0.3 where the closed forms lose precision to cancellation.
inline constexpr long double kF6Series[40] = {
    -98.875L, 842.625L, -10308.375L, 94487.25L, -732785.625L, 5092337.25L,
    -32736453.75L, 198535018.5L, -1150702882.875L, 6431796043.75L,
    -34897179611.25L, 184701339517.5L, -957220521075.0L, 4871986385805.0L,
    -24410979565087.5L, 120639570770565.0L, -588996679127731.875L,
    2844676045856823.75L, -13606221701987996.25L, 64512274581979087.5L,
    -303461640414306123.75L, 1417197209436540031.5L, -6574918904734272088.5L,
    30319322624475739155.0L, -139035268503229266918.8L,
    634293980223095982289.5L, -2879916262208549064617.0L,
    1.301784196028114268154e+22L, -5.8600218608797892739e+22L,
    2.627718537127697883713e+23L, -1.174045046524188059763e+24L,
    5.227740313409217768574e+24L, -2.320357373343932970319e+25L,
    1.02680498470214737921e+26L, -4.530926647793144134127e+26L,
    1.993975154729717605948e+27L, -8.752827063834935643332e+27L,
    3.832924194625708377446e+28L, -1.674628215152996885535e+29L,
    7.300657083629663064372e+29L,
};
inline constexpr long double kF8Series[40] = {
    -761.7375L, 7285.9875L, -99844.3875L, 1042791.75L, -9172011.0625L,
    71598618.65L, -511894526.325L, 3421149219.75L, -21676217800.3125L,
    131520141905.625L, -769916600417.25L, 4373308437688.125L,
    -24211295797849.875L, 131098458222125.625L, -696280395026906.25L,
    3635712536117161.5L, -18700477034577046.3125L, 94902365691639514.125L,
    -475836964827843425.625L, 2359960901490539412.0L,
    -11589238129051642596.07L, 56401176064261872967.2L,
    -272230042929695343706.1L, 1304035859894458383193.0L,
    -6203052549543403717288.0L, 2.931647175170183821376e+22L,
    -1.377245480317972484715e+23L, 6.434076441308361942341e+23L,
    -2.990195989233939504212e+24L, 1.382926285295965989109e+25L,
    -6.366748941113108618047e+25L, 2.918615253414765646612e+26L,
    -1.332559806543801961325e+27L, 6.061052764148071130849e+27L,
    -2.746965387538795644476e+28L, 1.240757182521563731621e+29L,
    -5.586333612387031072251e+29L, 2.507525268346323733855e+30L,
    -1.122299139872532066701e+31L, 5.00931545946675537977e+31L,
};

inline long double horner40(long double const (&c)[40], long double u) {
  long double acc = 0.0L;
  for (int k = 39; k >= 0; --k) acc = c[k] + u * acc;
  return acc;
}

inline long double f6_direct(long double h) {
  long double const u = h * h;
  long double const s = std::sqrt(1.0L + 4.0L * u);
  long double const a =
      18.0L + u * (312.0L + u * (2052.0L + u * (6048.0L + u * 5719.0L)));
  long double const poly = 18.0L + u * (-12.0L + u * u * u * 1001.0L);
  return -(poly - a / std::pow(s, 9)) / (16.0L * u * u * u * u);
}

inline long double f8_direct(long double h) {
  long double const u = h * h;
  long double const s = std::sqrt(1.0L + 4.0L * u);
  long double const b =
      6210.0L +
      u * (140554.0L +
           u * (1315364.0L +
                u * (6500242.0L +
                     u * (17830560.0L + u * (25611168.0L + u * 15000675.0L)))));
  long double const poly =
      -6210.0L +
      u * (-3934.0L + u * (764.0L + u * (-78.0L + u * u * u * 71523.0L)));
  long double const u6 = u * u * u * u * u * u;
  return -(b / std::pow(s, 11) + poly) / (160.0L * u6);
}

}  // namespace detail

// Expansion coefficients of the sphere-wall force; h = H / L is the height of
// the sphere center above the wall over its distance to the far object.
inline double spheres_wall_f6(double h) {
  if (h < 0.0)
    throw std::domain_error("spheres_wall_f6: h must be >= 0");
  if (h < 0.3)
    return double(detail::horner40(detail::kF6Series, (long double)h * h));
  return double(detail::f6_direct((long double)h));
}

inline double spheres_wall_f8(double h) {
  if (h < 0.0)
    throw std::domain_error("spheres_wall_f8: h must be >= 0");
  if (h < 0.3)
    return double(detail::horner40(detail::kF8Series, (long double)h * h));
  return double(detail::f8_direct((long double)h));
}

// Force on the sphere through order (R/L)^(j_max + 2); j_max is 6, 7 or 8.
inline double spheres_wall_force_series(double radius, double distance,
                                        double height, int j_max = 8) {
  if (!(radius > 0.0))
    throw std::domain_error("spheres_wall_force_series: radius must be positive");
  if (!(distance > 0.0))
    throw std::domain_error(
        "spheres_wall_force_series: distance must be positive");
  if (height < 0.0)
    throw std::domain_error("spheres_wall_force_series: height must be >= 0");
  if (j_max < 6 || j_max > 8)
    throw std::domain_error(
        "spheres_wall_force_series: only orders 6 through 8 are available");
  double const h = height / distance;
  double const x = radius / distance;
  double const x8 = std::pow(x, 8);
  double f = spheres_wall_f6(h) * x8;
  if (j_max >= 8) f += spheres_wall_f8(h) * x8 * x * x;
  double const pi = boost::math::constants::pi<double>();
  return f / (pi * radius * radius);
}

// ---------------------------------------------------------------------------
// Two tilted cylinders.  Cylinder j is rotated by -gamma about the unit
// vector along the center-to-center offset d = separation * (cos theta_ji,
// sin theta_ji, 0) relative to cylinder i, whose axis is the z axis.

struct CylinderConfig {
  double radius = 1.0;
  double separation = 10.0;
  double gamma = boost::math::constants::half_pi<double>();
  double theta_ji = 0.0;
  CylinderBC bc = CylinderBC::dirichlet;

  void validate() const {
    if (!(radius > 0.0))
      throw std::domain_error("CylinderConfig: radius must be positive");
    if (!(separation > 0.0))
      throw std::domain_error("CylinderConfig: separation must be positive");
    if (!(gamma > 0.0) ||
        gamma > boost::math::constants::half_pi<double>() + 1.0e-12)
      throw std::domain_error(
          "CylinderConfig: gamma must lie in (0, pi/2]; the gamma = 0 "
          "geometry is covered by the parallel-cylinder routines");
  }
};

struct CylEmBlock {
  std::complex<double> ee, em, me, mm;
};

struct CylEnergyResult {
  double energy = 0.0;
  double force = 0.0;
  // When the interaction is not trace class the energy cannot be assigned
  // directly and is recovered by integrating the (well-defined) force from
  // infinite separation; this flags those classical Dirichlet / EM results.
  bool energy_from_force_integration = false;
};

// Maps a point from the frame of cylinder j (axis tilted by -gamma) to the
// frame of cylinder i; the translation matrices below expand outgoing waves
// of j, written at x, into regular waves of i at this image point.
inline std::array<double, 3> cyl_map_point(CylinderConfig const& config,
                                           std::array<double, 3> const& x) {
  config.validate();
  double const ct = std::cos(config.theta_ji);
  double const st = std::sin(config.theta_ji);
  double const cg = std::cos(config.gamma);
  double const sg = std::sin(config.gamma);
  double const oc = 1.0 - cg;
  std::array<double, 3> out{};
  out[0] = (cg + ct * ct * oc) * x[0] + ct * st * oc * x[1] - sg * st * x[2] +
           config.separation * ct;
  out[1] = ct * st * oc * x[0] + (cg + st * st * oc) * x[1] + sg * ct * x[2] +
           config.separation * st;
  out[2] = sg * st * x[0] - sg * ct * x[1] + cg * x[2];
  return out;
}

// Scalar translation matrix element U_{n' kz', n kz} at imaginary frequency
// kappa: the coefficient density (per dkz) of the regular wave (n, kz) of
// cylinder i in the expansion of the outgoing wave (n', kz') of cylinder j.
inline std::complex<double> cyl_translation_scalar(int n_out, double kz_out,
                                                   int n_in, double kz_in,
                                                   double kappa,
                                                   CylinderConfig const& config) {
  config.validate();
  if (!(kappa > 0.0))
    throw std::domain_error("cyl_translation_scalar: kappa must be positive");
  double const cg = std::cos(config.gamma);
  double const sg = std::sin(config.gamma);
  double const p_in = std::hypot(kappa, kz_in);
  double const p_out = std::hypot(kappa, kz_out);
  double const kperp_in = (cg * kz_in - kz_out) / sg;
  double const kperp_out = (kz_in - cg * kz_out) / sg;
  double const xi_in = kperp_in / p_in;
  double const xi_out = kperp_out / p_out;
  double const kpar = std::hypot(kperp_out, p_out);
  double const logmag = n_out * std::asinh(xi_out) - n_in * std::asinh(xi_in) -
                        config.separation * kpar;
  double const mag = std::exp(logmag) / (2.0 * kpar * sg);
  double const sign = (std::abs(n_in) % 2 == 0) ? 1.0 : -1.0;
  double const phase = (n_out - n_in) * config.theta_ji;
  return sign * mag * std::complex<double>(std::cos(phase), std::sin(phase));
}

// Electromagnetic (E/M polarization) translation block for perfect metals:
// a scalar factor times a rotation in polarization space.
inline CylEmBlock cyl_translation_em(int n_out, double kz_out, int n_in,
                                     double kz_in, double kappa,
                                     CylinderConfig const& config) {
  std::complex<double> const u =
      cyl_translation_scalar(n_out, kz_out, n_in, kz_in, kappa, config);
  double const cg = std::cos(config.gamma);
  double const sg = std::sin(config.gamma);
  double const p_in = std::hypot(kappa, kz_in);
  double const p_out = std::hypot(kappa, kz_out);
  double const xi_in = ((cg * kz_in - kz_out) / sg) / p_in;
  double const a = cg + sg * (kz_in / p_in) * xi_in;
  double const b = sg * (kappa / p_in) * std::sqrt(1.0 + xi_in * xi_in);
  std::complex<double> const f = (p_in / p_out) * u;
  return {a * f, b * f, -b * f, a * f};
}

// Parallel-cylinder (gamma = 0) translation matrix, diagonal in kz.
inline std::complex<double> cyl_translation_parallel(int n_out, int n_in,
                                                     double kz, double kappa,
                                                     double separation,
                                                     double theta_ji) {
  if (!(kappa > 0.0))
    throw std::domain_error(
        "cyl_translation_parallel: kappa must be positive");
  if (!(separation > 0.0))
    throw std::domain_error(
        "cyl_translation_parallel: separation must be positive");
  double const p = std::hypot(kappa, kz);
  double const mag =
      std::cyl_bessel_k(unsigned(std::abs(n_in - n_out)), separation * p);
  double const sign = (std::abs(n_in) % 2 == 0) ? 1.0 : -1.0;
  double const phase = (n_out - n_in) * theta_ji;
  return sign * mag * std::complex<double>(std::cos(phase), std::sin(phase));
}

// ---------------------------------------------------------------------------
// Angular factor of the electromagnetic tilted-cylinder energy relative to
// the Dirichlet scalar, Omega(gamma); Omega(0) = 1 and
// Omega(pi/2) = 1 - log 2.

inline double omega_gamma(double gamma, EvalPolicy const& policy = {}) {
  policy.validate();
  double const pi = boost::math::constants::pi<double>();
  if (gamma < 0.0 || gamma > pi)
    throw std::domain_error("omega_gamma: gamma must lie in [0, pi]");
  if (gamma > 0.5 * pi) gamma = pi - gamma;
  double const cg = std::cos(gamma);
  double const sg = std::sin(gamma);
  EvalPolicy inner_pol = policy;
  inner_pol.rel_tol = std::max(policy.rel_tol, 1.0e-11);
  auto inner = [&](double phi) {
    double const sf = std::sin(phi);
    double const cf = std::cos(phi);
    auto f = [&](double az) {
      double const sa = std::sin(az);
      double const ca = std::cos(az);
      double const num = cg * sf + sg * cf * sa;
      double const den1 = sg * cf + cg * sf * sa;
      double const den = den1 * den1 + sf * sf * ca * ca;
      return num * num / den;
    };
    // The integrand has removable 0/0 points on the panel boundaries; the
    // split keeps the quadrature nodes away from them.
    return integrate(f, 0.0, 0.5 * pi, inner_pol) +
           integrate(f, 0.5 * pi, 1.5 * pi, inner_pol) +
           integrate(f, 1.5 * pi, 2.0 * pi, inner_pol);
  };
  auto outer = [&](double phi) { return std::sin(phi) * inner(phi); };
  double result = 0.0;
  if (gamma > 0.0 && gamma < 0.5 * pi) {
    result = integrate(outer, 0.0, gamma, inner_pol) +
             integrate(outer, gamma, 0.5 * pi, inner_pol);
  } else {
    result = integrate(outer, 0.0, 0.5 * pi, inner_pol);
  }
  return result / (2.0 * pi);
}

// Cosine coefficients c_k of Omega(gamma) = sum_k c_k cos(2 k gamma),
// computed from a 512-point midpoint grid on [0, pi/2].
inline std::vector<double> omega_fourier_coefficients(
    std::size_t count = 4, EvalPolicy const& policy = {}) {
  if (count < 1 || count > 64)
    throw std::domain_error(
        "omega_fourier_coefficients: count must lie in [1, 64]");
  double const pi = boost::math::constants::pi<double>();
  std::size_t const kGrid = 512;
  EvalPolicy pol = policy;
  pol.rel_tol = std::max(policy.rel_tol, 1.0e-9);
  std::vector<double> values(kGrid);
  for (std::size_t j = 0; j < kGrid; ++j) {
    double const g = (j + 0.5) * (0.5 * pi) / kGrid;
    values[j] = omega_gamma(g, pol);
  }
  std::vector<double> coeffs(count, 0.0);
  for (std::size_t k = 0; k < count; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < kGrid; ++j) {
      double const g = (j + 0.5) * (0.5 * pi) / kGrid;
      acc += values[j] * std::cos(2.0 * k * g);
    }
    coeffs[k] = (k == 0 ? 1.0 : 2.0) * acc / kGrid;
  }
  return coeffs;
}

// ---------------------------------------------------------------------------
// Asymptotic interaction of two tilted cylinders at separation d >> R.

inline CylEnergyResult cyl_energy_asymptotic(CylinderConfig const& config,
                                             ThermalRegime regime,
                                             double temperature = 1.0,
                                             EvalPolicy const& policy = {}) {
  config.validate();
  if (!(config.radius < config.separation))
    throw std::domain_error(
        "cyl_energy_asymptotic: requires radius < separation");
  if (regime == ThermalRegime::classical && !(temperature > 0.0))
    throw std::domain_error(
        "cyl_energy_asymptotic: classical regime needs temperature > 0");
  double const pi = boost::math::constants::pi<double>();
  double const d = config.separation;
  double const R = config.radius;
  double const sg = std::abs(std::sin(config.gamma));
  double const u = std::log(R / d);  // negative for R < d
  double const c2g = std::cos(2.0 * config.gamma);
  CylEnergyResult out;
  switch (config.bc) {
    case CylinderBC::dirichlet:
      if (regime == ThermalRegime::zero_temperature) {
        out.energy = -1.0 / (8.0 * d * sg * u * u);
        out.force = -(1.0 - 2.0 / u) / (8.0 * d * d * sg * u * u);
      } else {
        out.force = -temperature * pi / (4.0 * d * sg * u * u);
        out.energy = temperature * pi / (4.0 * sg * u);
        out.energy_from_force_integration = true;
      }
      break;
    case CylinderBC::neumann:
      if (regime == ThermalRegime::zero_temperature) {
        out.energy = -std::pow(R, 4) * (167.0 + c2g) / (320.0 * std::pow(d, 5) * sg);
        out.force = 5.0 * out.energy / d;
      } else {
        out.energy = -3.0 * temperature * pi * std::pow(R, 4) * (98.0 + c2g) /
                     (1024.0 * std::pow(d, 4) * sg);
        out.force = 4.0 * out.energy / d;
      }
      break;
    case CylinderBC::perfect_metal_em:
      if (regime == ThermalRegime::zero_temperature) {
        double const omega = omega_gamma(config.gamma, policy);
        out.energy = -omega / (8.0 * d * sg * u * u);
        out.force = -omega * (1.0 - 2.0 / u) / (8.0 * d * d * sg * u * u);
      } else {
        // The classical electromagnetic result coincides with the Dirichlet
        // scalar: only the E mode survives the high-temperature limit.
        out.force = -temperature * pi / (4.0 * d * sg * u * u);
        out.energy = temperature * pi / (4.0 * sg * u);
        out.energy_from_force_integration = true;
      }
      break;
  }
  return out;
}

// Parallel cylinders of length Lz at axis-to-axis separation d >> R
// (Dirichlet scalar, zero temperature): same structure as the tilted result
// under |sin gamma| <-> pi d / Lz.
inline double cyl_parallel_energy_asymptotic(double radius, double separation,
                                             double length) {
  if (!(radius > 0.0) || !(separation > radius))
    throw std::domain_error(
        "cyl_parallel_energy_asymptotic: needs 0 < radius < separation");
  if (!(length > 0.0))
    throw std::domain_error(
        "cyl_parallel_energy_asymptotic: length must be positive");
  double const pi = boost::math::constants::pi<double>();
  double const u = std::log(radius / separation);
  return -length / (8.0 * pi * separation * separation * u * u);
}

// ---------------------------------------------------------------------------
// Proximity-force approximation for cylinders; gap = d - 2R is the surface
// separation.

inline double cyl_pfa(double radius, double gap, double gamma,
                      ThermalRegime regime, double temperature = 1.0) {
  if (!(radius > 0.0) || !(gap > 0.0))
    throw std::domain_error("cyl_pfa: radius and gap must be positive");
  double const sg = std::abs(std::sin(gamma));
  if (!(sg > 0.0))
    throw std::domain_error("cyl_pfa: gamma must not be a multiple of pi");
  double const pi = boost::math::constants::pi<double>();
  if (regime == ThermalRegime::zero_temperature)
    return -std::pow(pi, 3) * radius / (720.0 * sg * gap * gap);
  return -std::riemann_zeta(3.0) * temperature * radius / (4.0 * sg * gap);
}

inline double cyl_pfa_parallel(double radius, double gap, double length,
                               ThermalRegime regime, double temperature = 1.0) {
  if (!(radius > 0.0) || !(gap > 0.0) || !(length > 0.0))
    throw std::domain_error(
        "cyl_pfa_parallel: radius, gap and length must be positive");
  double const pi = boost::math::constants::pi<double>();
  if (regime == ThermalRegime::zero_temperature)
    return -std::pow(pi, 3) / 1920.0 * length *
           std::sqrt(radius / std::pow(gap, 5));
  return -std::riemann_zeta(3.0) / 16.0 * temperature * length *
         std::sqrt(radius / std::pow(gap, 3));
}

namespace detail {

// I_p(eps) = eps^p * 4 * int_0^{1/sqrt(eps)} ds dt
//            [eps + 2 - sqrt(1 - eps s^2) - sqrt(1 - eps t^2)]^(-p);
// I_3 -> pi and I_2 -> 2 pi as eps -> 0.
inline double pfa_profile_integral(double eps, int p, EvalPolicy const& pol) {
  double const lim = 1.0 / std::sqrt(eps);
  auto sq = [&](double v) { return std::sqrt(std::max(0.0, 1.0 - eps * v * v)); };
  auto inner = [&](double s) {
    double const c = eps + 2.0 - sq(s);
    auto f = [&](double t) { return std::pow(c - sq(t), -p); };
    return integrate_singular(f, 0.0, lim, pol);
  };
  return 4.0 * std::pow(eps, p) * integrate_singular(inner, 0.0, lim, pol);
}

}  // namespace detail

// PFA energy evaluated with the exact circular height profile rather than
// its small-gap limit; reduces to cyl_pfa as gap / radius -> 0.
inline double cyl_pfa_exact(double radius, double gap, double gamma,
                            ThermalRegime regime, double temperature = 1.0,
                            EvalPolicy const& policy = {}) {
  if (!(radius > 0.0) || !(gap > 0.0))
    throw std::domain_error("cyl_pfa_exact: radius and gap must be positive");
  double const sg = std::abs(std::sin(gamma));
  if (!(sg > 0.0))
    throw std::domain_error("cyl_pfa_exact: gamma must not be a multiple of pi");
  policy.validate();
  EvalPolicy pol = policy;
  pol.rel_tol = std::max(policy.rel_tol, 1.0e-10);
  double const pi = boost::math::constants::pi<double>();
  double const eps = gap / radius;
  if (regime == ThermalRegime::zero_temperature) {
    double const i3 = detail::pfa_profile_integral(eps, 3, pol);
    return -pi * pi / 720.0 * radius / (sg * gap * gap) * i3;
  }
  double const i2 = detail::pfa_profile_integral(eps, 2, pol);
  return -std::riemann_zeta(3.0) / (8.0 * pi) * temperature * radius /
         (sg * gap) * i2;
}

}  // namespace casimir::scatter
