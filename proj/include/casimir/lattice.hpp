#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "casimir/media.hpp"
#include "casimir/policy.hpp"

// Stochastic oracle: direct Euler-Maruyama integration of the mode-space
// Langevin dynamics  d phi_n = -mu_n phi_n dt + noise,  used to validate the
// closed-form steady-state correlators and stresses independently of any
// analytic resummation.

namespace casimir::lattice {

struct SimConfig {
  std::size_t mode_count = 1;
  double dt = 1e-2;
  std::size_t burn_in = 1000;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  std::size_t realizations = 1;

  // The explicit scheme is only trusted well inside its stability region.
  void validate(double max_re_mu) const {
    if (!(dt > 0.0)) throw std::domain_error("SimConfig: dt must be positive");
    if (!(dt * max_re_mu < 0.1))
      throw std::domain_error("SimConfig: dt * max Re(mu) must stay below 0.1");
    if (samples < 1000) throw std::domain_error("SimConfig: need at least 1000 samples");
    if (realizations == 0) throw std::domain_error("SimConfig: need at least one realization");
  }
};

struct ModeEstimate {
  std::complex<double> value = {0.0, 0.0};
  double std_error = 0.0;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Empirical pair correlators <phi_n phi_m^*>; row n, column m.
struct CorrelatorMatrix {
  std::vector<std::vector<ModeEstimate>> pair;
  std::size_t size() const { return pair.size(); }
};

// Noise shared by all modes (rank-one overlap h_nm = gamma) versus one
// independent stream per mode (h_nm = gamma delta_nm).
enum class NoiseCoupling { independent, common };

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based stream labels: every (realization, mode) pair owns a
// reproducible generator regardless of evaluation order.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t realization,
                                 std::uint64_t mode) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  s = h ^ (0x9e3779b97f4a7c15ULL * (realization + 1));
  h = splitmix64(s);
  s = h ^ (0xbf58476d1ce4e5b9ULL * (mode + 1));
  return splitmix64(s);
}

// Mean and standard error from independent chunk means (one chunk per
// realization, or fixed-size batches when only one realization is run).
inline ModeEstimate pooled(std::vector<std::complex<double>> const& chunks) {
  std::size_t const n = chunks.size();
  std::complex<double> mean{0.0, 0.0};
  for (auto const& c : chunks) mean += c;
  mean /= static_cast<double>(n);
  if (n < 2) return {mean, 0.0};
  double var_re = 0.0, var_im = 0.0;
  for (auto const& c : chunks) {
    var_re += (c.real() - mean.real()) * (c.real() - mean.real());
    var_im += (c.imag() - mean.imag()) * (c.imag() - mean.imag());
  }
  double const denom = static_cast<double>(n) * static_cast<double>(n - 1);
  return {mean, std::sqrt((var_re + var_im) / denom)};
}

inline std::size_t chunk_count(SimConfig const& cfg) {
  return cfg.realizations >= 2 ? 1 : 16;
}

[[noreturn]] inline void unstable(std::size_t mode) {
  throw ConvergenceError("lattice: mode " + std::to_string(mode) +
                         " diverged; reduce dt below the stability margin");
}

}  // namespace detail

// Integrates d phi_n = -mu_n phi_n dt + xi_n dt for white or exponentially
// correlated noise and returns the empirical steady-state pair correlators.
// White noise targets h_nm c~ pair sums with c~ = 1/2; the colored case uses
// an auxiliary Ornstein-Uhlenbeck noise with <xi xi'> = gamma (a/2) e^{-a|t-t'|},
// whose Laplace kernel is a / (2 (a + mu)).
inline CorrelatorMatrix simulate_modes(std::vector<std::complex<double>> const& mu,
                                       media::NoiseSpec const& noise,
                                       NoiseCoupling coupling, SimConfig const& cfg) {
  if (mu.empty()) throw std::domain_error("simulate_modes: empty spectrum");
  double max_rate = 0.0;
  for (auto const& m : mu) {
    if (!(m.real() > 0.0))
      throw std::domain_error("simulate_modes: every Re(mu) must be positive");
    max_rate = std::max(max_rate, m.real());
  }
  bool colored = false;
  switch (noise.kind) {
    case media::NoiseKind::white:
      break;
    case media::NoiseKind::temporal_exponential:
      if (!(noise.a > 0.0))
        throw std::domain_error(
            "simulate_modes: zero-rate colored noise has no stationary realization");
      colored = true;
      max_rate = std::max(max_rate, noise.a);
      break;
    default:
      throw std::domain_error(
          "simulate_modes: only white or exponentially correlated noise is simulable");
  }
  cfg.validate(max_rate);

  std::size_t const n_modes = mu.size();
  double min_rate = mu[0].real();
  for (auto const& m : mu) min_rate = std::min(min_rate, m.real());
  double const blowup = 1e8 * (1.0 + std::sqrt(noise.gamma / (2.0 * min_rate)));
  double const bound_sq = blowup * blowup;

  std::size_t const batches = detail::chunk_count(cfg);
  std::size_t const batch_len = cfg.samples / batches;

  std::vector<std::vector<std::vector<std::complex<double>>>> chunk_means(
      n_modes, std::vector<std::vector<std::complex<double>>>(n_modes));

  double const root_dt = std::sqrt(cfg.dt);
  double const noise_amp = std::sqrt(noise.gamma);

  for (std::size_t r = 0; r < cfg.realizations; ++r) {
    std::vector<std::mt19937_64> engines;
    std::size_t const n_streams = coupling == NoiseCoupling::common ? 1 : n_modes;
    engines.reserve(n_streams);
    for (std::size_t s = 0; s < n_streams; ++s)
      engines.emplace_back(detail::stream_seed(cfg.seed, r, s));
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<std::complex<double>> phi(n_modes, {0.0, 0.0});
    std::vector<double> eta(colored ? n_streams : 0, 0.0);
    if (colored) {
      // Warm-start the auxiliary noise from its stationary law.
      double const sd = std::sqrt(0.5 * noise.a * noise.gamma);
      for (std::size_t s = 0; s < n_streams; ++s) eta[s] = sd * gauss(engines[s]);
    }

    std::vector<std::vector<std::complex<double>>> acc(
        n_modes, std::vector<std::complex<double>>(n_modes, {0.0, 0.0}));
    std::size_t in_batch = 0;

    auto step = [&]() {
      if (colored) {
        for (std::size_t s = 0; s < n_streams; ++s) {
          double const dW = root_dt * gauss(engines[s]);
          eta[s] += -noise.a * eta[s] * cfg.dt + noise.a * noise_amp * dW;
        }
        for (std::size_t n = 0; n < n_modes; ++n) {
          std::size_t const s = coupling == NoiseCoupling::common ? 0 : n;
          phi[n] += (-mu[n] * phi[n] + eta[s]) * cfg.dt;
          if (!(std::norm(phi[n]) < bound_sq)) detail::unstable(n);
        }
      } else {
        double shared = 0.0;
        if (coupling == NoiseCoupling::common)
          shared = noise_amp * root_dt * gauss(engines[0]);
        for (std::size_t n = 0; n < n_modes; ++n) {
          double const dW = coupling == NoiseCoupling::common
                                ? shared
                                : noise_amp * root_dt * gauss(engines[n]);
          phi[n] += -mu[n] * phi[n] * cfg.dt + dW;
          if (!(std::norm(phi[n]) < bound_sq)) detail::unstable(n);
        }
      }
    };

    for (std::size_t t = 0; t < cfg.burn_in; ++t) step();
    for (std::size_t b = 0; b < batches; ++b) {
      for (auto& row : acc)
        for (auto& cell : row) cell = {0.0, 0.0};
      for (in_batch = 0; in_batch < batch_len; ++in_batch) {
        step();
        for (std::size_t n = 0; n < n_modes; ++n)
          for (std::size_t m = 0; m < n_modes; ++m)
            acc[n][m] += phi[n] * std::conj(phi[m]);
      }
      for (std::size_t n = 0; n < n_modes; ++n)
        for (std::size_t m = 0; m < n_modes; ++m)
          chunk_means[n][m].push_back(acc[n][m] / static_cast<double>(batch_len));
    }
  }

  CorrelatorMatrix out;
  out.pair.assign(n_modes, std::vector<ModeEstimate>(n_modes));
  for (std::size_t n = 0; n < n_modes; ++n)
    for (std::size_t m = 0; m < n_modes; ++m)
      out.pair[n][m] = detail::pooled(chunk_means[n][m]);
  return out;
}

inline CorrelatorMatrix simulate_modes(std::vector<std::complex<double>> const& mu,
                                       media::NoiseSpec const& noise,
                                       SimConfig const& cfg) {
  return simulate_modes(mu, noise, NoiseCoupling::independent, cfg);
}

// Damped second-order dynamics  phi'' + damping phi' + c2^2 mu phi = c2^2 xi
// integrated as a two-component system.  Its stationary variance is
// c2^2 gamma / (2 damping mu); at damping = 4 c2 sqrt(mu) this coincides with
// the half-weighted marginal-pole value gamma c2 / (8 mu^{3/2}), which is the
// p = 2 member of the generalized kernel family.  The undamped equation has
// no stationary state, so the damping must be strictly positive.
inline Estimate simulate_second_order(double mu, double gamma, double c2, double damping,
                                      SimConfig const& cfg) {
  if (!(mu > 0.0)) throw std::domain_error("simulate_second_order: mu must be positive");
  if (!(gamma > 0.0))
    throw std::domain_error("simulate_second_order: gamma must be positive");
  if (!(c2 > 0.0)) throw std::domain_error("simulate_second_order: c2 must be positive");
  if (!(damping > 0.0))
    throw std::domain_error(
        "simulate_second_order: undamped dynamics has no stationary variance");
  double const w0sq = c2 * c2 * mu;
  double const disc = damping * damping - 4.0 * w0sq;
  double const max_rate =
      disc >= 0.0 ? 0.5 * (damping + std::sqrt(disc)) : 0.5 * damping;
  cfg.validate(max_rate);

  double const target = c2 * c2 * gamma / (2.0 * damping * mu);
  double const bound = 1e8 * (1.0 + std::sqrt(target));
  double const amp = c2 * c2 * std::sqrt(gamma);
  double const root_dt = std::sqrt(cfg.dt);

  std::size_t const batches = detail::chunk_count(cfg);
  std::size_t const batch_len = cfg.samples / batches;
  std::vector<std::complex<double>> chunks;

  for (std::size_t r = 0; r < cfg.realizations; ++r) {
    std::mt19937_64 engine(detail::stream_seed(cfg.seed, r, 0));
    std::normal_distribution<double> gauss(0.0, 1.0);
    // Warm start near the stationary law of the continuous dynamics.
    double x = std::sqrt(target) * gauss(engine);
    double v = std::sqrt(target * w0sq) * gauss(engine);
    auto step = [&]() {
      double const x_old = x;
      x += v * cfg.dt;
      v += (-damping * v - w0sq * x_old) * cfg.dt + amp * root_dt * gauss(engine);
      if (!(std::abs(x) < bound)) detail::unstable(0);
    };
    for (std::size_t t = 0; t < cfg.burn_in; ++t) step();
    for (std::size_t b = 0; b < batches; ++b) {
      double acc = 0.0;
      for (std::size_t t = 0; t < batch_len; ++t) {
        step();
        acc += x * x;
      }
      chunks.emplace_back(acc / static_cast<double>(batch_len), 0.0);
    }
  }
  auto const est = detail::pooled(chunks);
  return {est.value.real(), est.std_error};
}

inline Estimate simulate_second_order(double mu, double gamma, double c2,
                                      SimConfig const& cfg) {
  return simulate_second_order(mu, gamma, c2, 4.0 * c2 * std::sqrt(mu), cfg);
}

// Stress on the plate at x = 0 for the 1D reaction-diffusion analog with
// Neumann walls: T(0) = (1/2) <phi(0)^2> truncated to cfg.mode_count modes
// with k_n = pi n / L.  Modes are independent scalar processes, so each one
// is integrated on its own stream and only the diagonal variance is kept.
inline Estimate estimate_rd_stress(double k0, double D, double gamma, double L,
                                   SimConfig const& cfg) {
  if (!(k0 > 0.0) || !(D > 0.0) || !(gamma > 0.0) || !(L > 0.0))
    throw std::domain_error("estimate_rd_stress: k0, D, gamma, L must be positive");
  if (cfg.mode_count == 0)
    throw std::domain_error("estimate_rd_stress: need at least one mode");

  std::vector<double> mu(cfg.mode_count);
  for (std::size_t n = 0; n < cfg.mode_count; ++n) {
    double const kn = M_PI * static_cast<double>(n) / L;
    mu[n] = D * (kn * kn + k0 * k0);
  }
  cfg.validate(mu.back());

  std::size_t const batches = detail::chunk_count(cfg);
  std::size_t const batch_len = cfg.samples / batches;
  double const root_dt = std::sqrt(cfg.dt);
  double const amp = std::sqrt(gamma);

  // chunk index -> accumulated stress of that chunk
  std::vector<std::complex<double>> chunks(cfg.realizations * batches, {0.0, 0.0});

  for (std::size_t r = 0; r < cfg.realizations; ++r) {
    for (std::size_t n = 0; n < cfg.mode_count; ++n) {
      std::mt19937_64 engine(detail::stream_seed(cfg.seed, r, n));
      std::normal_distribution<double> gauss(0.0, 1.0);
      double const decay = 1.0 - mu[n] * cfg.dt;
      double const step_var = gamma * cfg.dt / (1.0 - decay * decay);
      double const bound = 1e8 * (1.0 + std::sqrt(step_var));
      // Eigenfunction weight at the wall: sqrt(1/L) for n = 0, sqrt(2/L) else.
      double const weight = 0.5 * (n == 0 ? 1.0 : 2.0) / L;
      // Warm start from the stationary law of the discrete chain.
      double x = std::sqrt(step_var) * gauss(engine);
      auto step = [&]() {
        x = decay * x + amp * root_dt * gauss(engine);
        if (!(std::abs(x) < bound)) detail::unstable(n);
      };
      for (std::size_t t = 0; t < cfg.burn_in; ++t) step();
      for (std::size_t b = 0; b < batches; ++b) {
        double acc = 0.0;
        for (std::size_t t = 0; t < batch_len; ++t) {
          step();
          acc += x * x;
        }
        chunks[r * batches + b] += weight * acc / static_cast<double>(batch_len);
      }
    }
  }
  auto const est = detail::pooled(chunks);
  return {est.value.real(), est.std_error};
}

// CSV dump of the pair correlators.
inline void write_csv(std::ostream& os, CorrelatorMatrix const& corr) {
  os << "mode_n, mode_m, re, im, stderr\n";
  for (std::size_t n = 0; n < corr.size(); ++n)
    for (std::size_t m = 0; m < corr.size(); ++m) {
      auto const& e = corr.pair[n][m];
      os << n << ", " << m << ", " << e.value.real() << ", " << e.value.imag() << ", "
         << e.std_error << "\n";
    }
}

}  // namespace casimir::lattice
