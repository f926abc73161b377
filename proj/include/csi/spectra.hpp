#pragma once

// Joint OAM coincidence spectra built from an amplitude table and an SPDC
// pair source, with marginals and mutual information.
//
// A joint spectrum is indexed [signal mode][reference mode]. The signal axis
// is the post-object mode (l_o, p_o) = (l', p'); the reference axis is
// (l_r, p_r) with l_r = -l for input signal mode (l, p), so
//   P(l', p'; l_r, p) ∝ w(-l_r, p) |a^{l', -l_r}_{p', p}|^2.

#include <cmath>
#include <cstddef>
#include <algorithm>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "csi/amplitudes.hpp"
#include "csi/error.hpp"
#include "csi/io.hpp"
#include "csi/modes.hpp"

namespace csi {

/// Accurate sum of many non-negative terms (recursive halving, naive below 16).
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 16) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

/// Dense non-negative matrix of joint probabilities, row-major.
struct ProbabilityMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double total() const { return pairwise_sum(values); }
};

/// Pair source pumped by |0, 0>: reference l_r = -l for every signal input (l, p).
struct SpdcSource {
  std::function<double(int l, int p)> weight = [](int, int) { return 1.0; };
  std::string description = "flat";

  static SpdcSource flat() { return {}; }
  /// Gaussian OAM bandwidth, w = exp(-l^2 / (2 sigma^2)), flat in p.
  static SpdcSource gaussian(double sigma) {
    if (!(sigma > 0.0)) throw InvalidArgument("source bandwidth must be positive");
    return {[sigma](int l, int) { return std::exp(-0.5 * l * l / (sigma * sigma)); },
            "gaussian:" + std::to_string(sigma)};
  }
};

struct JointSpectrum {
  ModeSet modes{kDefaultLMax, kDefaultPMax};  // same ranges on both axes
  ProbabilityMatrix probability;              // [signal index][reference index]
  double normalization_total = 0.0;           // mass before normalization
  bool diagonal_removed = false;
  bool renormalized = true;

  double at(const ModeIndex& signal, const ModeIndex& reference) const {
    return probability.at(modes.index(signal), modes.index(reference));
  }
};

/// Q(l_o, l_r) summed over both radial indices; rows l_o, columns l_r, ascending.
struct CollapsedSpectrum {
  int l_max = 0;
  ProbabilityMatrix probability;

  double at(int l_o, int l_r) const {
    return probability.at(static_cast<std::size_t>(l_o + l_max), static_cast<std::size_t>(l_r + l_max));
  }
};

struct Marginals {
  std::vector<double> signal;     // P_s over rows
  std::vector<double> reference;  // P_i over columns
};

inline JointSpectrum joint_spectrum(const AmplitudeTable& table, const SpdcSource& source = {}) {
  const ModeSet& modes = table.modes;
  const std::size_t m = modes.size();
  JointSpectrum s{modes, {m, m, std::vector<double>(m * m)}, 0.0, false, true};
  for (std::size_t r = 0; r < m; ++r) {
    const ModeIndex ref = modes[r];
    const ModeIndex in{-ref.l, ref.p};
    const double w = source.weight(in.l, in.p);
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("source weights must be finite and >= 0");
    const std::size_t in_idx = modes.index(in);
    for (std::size_t o = 0; o < m; ++o) s.probability.at(o, r) = w * std::norm(table.at(o, in_idx));
  }
  const double total = s.probability.total();
  if (!(total > 0.0))
    throw DegenerateDistribution("joint spectrum has no mass (fully opaque object or zero weights)");
  for (double& v : s.probability.values) v /= total;
  s.normalization_total = total;
  return s;
}

inline bool on_conservation_diagonal(const ModeIndex& signal, const ModeIndex& reference) {
  return signal.l == -reference.l;
}

struct ZeroDiagonalOptions {
  bool renormalize = true;
  /// Off-diagonal mass at or below this fraction of the input mass counts as
  /// none; it sits above quadrature noise (~1e-13 for a transparent object).
  double floor = 1e-10;
};

/// Zeroes entries with l_o = -l_r and (by default) renormalizes the rest.
inline JointSpectrum zero_diagonal(const JointSpectrum& spec, ZeroDiagonalOptions opts = {}) {
  JointSpectrum out = spec;
  const std::size_t m = spec.modes.size();
  const double before = spec.probability.total();
  for (std::size_t o = 0; o < m; ++o)
    for (std::size_t r = 0; r < m; ++r)
      if (on_conservation_diagonal(spec.modes[o], spec.modes[r])) out.probability.at(o, r) = 0.0;
  const double mass = out.probability.total();
  if (!(mass > opts.floor * before))
    throw DegenerateDistribution("spectrum has no off-diagonal mass to keep");
  if (opts.renormalize)
    for (double& v : out.probability.values) v /= mass;
  out.diagonal_removed = true;
  out.renormalized = opts.renormalize;
  return out;
}

inline double off_diagonal_mass(const JointSpectrum& spec) {
  std::vector<double> off;
  const std::size_t m = spec.modes.size();
  for (std::size_t o = 0; o < m; ++o)
    for (std::size_t r = 0; r < m; ++r)
      if (!on_conservation_diagonal(spec.modes[o], spec.modes[r])) off.push_back(spec.probability.at(o, r));
  return pairwise_sum(off);
}

inline Marginals marginals(const ProbabilityMatrix& p) {
  Marginals mg{std::vector<double>(p.rows), std::vector<double>(p.cols)};
  std::vector<double> col(p.rows);
  for (std::size_t r = 0; r < p.rows; ++r)
    mg.signal[r] = pairwise_sum(std::span(p.values).subspan(r * p.cols, p.cols));
  for (std::size_t c = 0; c < p.cols; ++c) {
    for (std::size_t r = 0; r < p.rows; ++r) col[r] = p.at(r, c);
    mg.reference[c] = pairwise_sum(col);
  }
  return mg;
}

inline Marginals marginals(const JointSpectrum& s) { return marginals(s.probability); }

/// Shannon entropy in bits, 0 log 0 = 0.
inline double entropy(std::span<const double> p) {
  std::vector<double> terms;
  terms.reserve(p.size());
  for (double v : p)
    if (v > 0.0) terms.push_back(-v * std::log2(v));
  return pairwise_sum(terms);
}

/// I = sum P log2(P / (P_s P_i)) in bits, 0 log 0 = 0. Marginals are taken
/// from `p` itself, so an unnormalized matrix is evaluated as given.
inline double mutual_information(const ProbabilityMatrix& p) {
  const Marginals mg = marginals(p);
  std::vector<double> terms;
  terms.reserve(p.values.size());
  for (std::size_t r = 0; r < p.rows; ++r)
    for (std::size_t c = 0; c < p.cols; ++c) {
      const double v = p.at(r, c);
      if (v > 0.0) terms.push_back(v * std::log2(v / (mg.signal[r] * mg.reference[c])));
    }
  // Non-negative by Gibbs' inequality; only rounding can push it below zero.
  return std::max(0.0, pairwise_sum(terms));
}

inline double mutual_information(const JointSpectrum& s) { return mutual_information(s.probability); }

inline CollapsedSpectrum collapse(const JointSpectrum& s) {
  const int l_max = s.modes.l_max();
  const auto nl = static_cast<std::size_t>(2 * l_max + 1);
  CollapsedSpectrum c{l_max, {nl, nl, std::vector<double>(nl * nl)}};
  const std::size_t m = s.modes.size();
  for (std::size_t o = 0; o < m; ++o)
    for (std::size_t r = 0; r < m; ++r) {
      const auto lo = static_cast<std::size_t>(s.modes[o].l + l_max);
      const auto lr = static_cast<std::size_t>(s.modes[r].l + l_max);
      c.probability.at(lo, lr) += s.probability.at(o, r);
    }
  return c;
}

/// 0.5 * sum |P - Q|.
inline double total_variation(const ProbabilityMatrix& a, const ProbabilityMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw InvalidArgument("spectra have different shapes");
  std::vector<double> d(a.values.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::fabs(a.values[i] - b.values[i]);
  return 0.5 * pairwise_sum(d);
}

inline double total_variation(const JointSpectrum& a, const JointSpectrum& b) {
  return total_variation(a.probability, b.probability);
}

/// Number of entries strictly above `floor`.
inline std::size_t support_count(const ProbabilityMatrix& p, double floor) {
  std::size_t n = 0;
  for (double v : p.values)
    if (v > floor) ++n;
  return n;
}

/// Long-form CSV, `l_out,p_out,l_ref,p_ref,probability`, signal-major.
inline std::string spectrum_csv(const JointSpectrum& s, std::string_view header = {}) {
  std::string out(header);
  out += "l_out,p_out,l_ref,p_ref,probability\n";
  const std::size_t m = s.modes.size();
  for (std::size_t o = 0; o < m; ++o)
    for (std::size_t r = 0; r < m; ++r) {
      const ModeIndex so = s.modes[o], rr = s.modes[r];
      out += std::to_string(so.l) + "," + std::to_string(so.p) + "," + std::to_string(rr.l) + "," +
             std::to_string(rr.p) + "," + format_double(s.probability.at(o, r)) + "\n";
    }
  return out;
}

/// Dense Q(l_o, l_r): the first row holds the l_r axis, the first column l_o.
inline std::string collapsed_csv(const CollapsedSpectrum& c, std::string_view header = {}) {
  std::string out(header);
  out += "l_out\\l_ref";
  for (int lr = -c.l_max; lr <= c.l_max; ++lr) out += "," + std::to_string(lr);
  out += "\n";
  for (int lo = -c.l_max; lo <= c.l_max; ++lo) {
    out += std::to_string(lo);
    for (int lr = -c.l_max; lr <= c.l_max; ++lr) out += "," + format_double(c.at(lo, lr));
    out += "\n";
  }
  return out;
}

}  // namespace csi
