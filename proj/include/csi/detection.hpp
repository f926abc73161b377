#pragma once

// Idealized two-beam-splitter detection: singles rates from a transition
// amplitude and the inversion back to its real and imaginary parts.
// Rate constants are normalized to 1 and detectors are perfect.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <utility>

#include "csi/error.hpp"

namespace csi {

struct SinglesRates {
  double n_plus = 0.0;
  double n_minus = 0.0;
};

/// Re(a) is only known up to sign from two rates.
struct RecoveredAmplitude {
  double re_magnitude = 0.0;
  double im = 0.0;
  bool sign_ambiguous = true;
};

/// Radicand below this is treated as an infeasible rate pair rather than rounding.
inline constexpr double kRateTolerance = 1e-9;

/// N+ = |a + i|^2, N- = |i a + 1|^2.
inline SinglesRates singles_rates(std::complex<double> a) {
  const std::complex<double> i{0.0, 1.0};
  return {std::norm(a + i), std::norm(i * a + 1.0)};
}

/// Im(a) = (N+ - N-)/4 and |Re(a)| = sqrt(N+ - 1 - (N+ - N-)/2 - (N+ - N-)^2/16).
inline RecoveredAmplitude invert_rates(const SinglesRates& r) {
  if (!std::isfinite(r.n_plus) || !std::isfinite(r.n_minus) || r.n_plus < 0.0 || r.n_minus < 0.0)
    throw InconsistentRates("singles rates must be finite and non-negative");
  const double diff = r.n_plus - r.n_minus;
  const double im = diff / 4.0;
  const double radicand = r.n_plus - 1.0 - diff / 2.0 - diff * diff / 16.0;
  if (radicand < -kRateTolerance)
    throw InconsistentRates("rate pair (" + std::to_string(r.n_plus) + ", " +
                            std::to_string(r.n_minus) + ") is not produced by any amplitude");
  return {std::sqrt(std::max(radicand, 0.0)), im, true};
}

/// A miswritten variant of the radicand with (N+^2 - N-^2 - 2 N+ N-)/16 in
/// place of (N+ - N-)^2/16. Kept only so tests can show it does not invert
/// singles_rates(); do not use it for recovery.
inline double printed_radicand(const SinglesRates& r) {
  const double diff = r.n_plus - r.n_minus;
  return r.n_plus - 1.0 -
         (r.n_plus * r.n_plus - r.n_minus * r.n_minus - 2.0 * r.n_plus * r.n_minus) / 16.0 -
         diff / 2.0;
}

/// Finite-statistics counts: Poisson draws with means photons * N+/(N+ + N-)
/// and photons * N-/(N+ + N-) from mt19937_64 seeded with `seed`.
inline std::pair<std::uint64_t, std::uint64_t> simulate_counts(const SinglesRates& r,
                                                               std::uint64_t photons,
                                                               std::uint64_t seed) {
  if (photons < 1) throw InvalidArgument("photons must be >= 1");
  if (!(r.n_plus >= 0.0) || !(r.n_minus >= 0.0))
    throw InvalidArgument("rates must be non-negative");
  const double total = r.n_plus + r.n_minus;
  if (!(total > 0.0)) throw InvalidArgument("rates must not both be zero");
  std::mt19937_64 rng(seed);
  auto draw = [&](double mean) -> std::uint64_t {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(rng);
  };
  const double n = static_cast<double>(photons);
  const auto plus = draw(n * r.n_plus / total);
  const auto minus = draw(n * r.n_minus / total);
  return {plus, minus};
}

}  // namespace csi
