#pragma once

// Laguerre-Gauss mode fields in the object plane.
//
// Lengths are in units of the beam waist unless a BeamGeometry with another
// waist is passed explicitly. The mode convention is
//
//   u_lp(r, phi) = C_lp / w0 * (sqrt(2) r / w0)^|l| * exp(-r^2 / w0^2)
//                  * L_p^|l|(2 r^2 / w0^2) * exp(-i l phi)
//
// with C_lp = sqrt(2 p! / (pi (p + |l|)!)). The constant per-mode Gouy-like
// phase is dropped; it cancels between expansion and reconstruction.

#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "csi/error.hpp"

namespace csi {

using ComplexField = std::complex<double>;

struct ModeIndex {
  int l = 0;
  int p = 0;

  friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
  friend auto operator<=>(const ModeIndex&, const ModeIndex&) = default;
};

struct BeamGeometry {
  double waist = 1.0;

  static BeamGeometry unit() { return {}; }
};

inline void validate(const ModeIndex& mode) {
  if (mode.p < 0) throw InvalidArgument("mode radial index p must be >= 0");
}

inline void validate(const BeamGeometry& beam) {
  if (!(beam.waist > 0.0) || !std::isfinite(beam.waist))
    throw InvalidArgument("beam waist must be positive and finite");
}

/// Generalized Laguerre polynomial L_n^alpha(x) by upward three-term recurrence.
inline double laguerre(int n, int alpha, double x) {
  if (n < 0 || alpha < 0) throw InvalidArgument("laguerre: n and alpha must be non-negative");
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 1.0 + alpha - x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Fills out[0..p_max] with L_p^alpha(x); each value matches laguerre(p, alpha, x) bit for bit.
inline void laguerre_row(int p_max, int alpha, double x, double* out) {
  out[0] = 1.0;
  if (p_max == 0) return;
  out[1] = 1.0 + alpha - x;
  for (int k = 1; k < p_max; ++k)
    out[k + 1] = ((2.0 * k + 1.0 + alpha - x) * out[k] - (k + alpha) * out[k - 1]) / (k + 1.0);
}

/// Positive prefactor C_lp / w0 making the mode unit-norm over the plane.
inline double normalization(const ModeIndex& mode, const BeamGeometry& beam = {}) {
  validate(mode);
  validate(beam);
  const int al = std::abs(mode.l);
  // p! / (p + |l|)! accumulated as a product to stay finite for large |l|.
  double ratio = 1.0;
  for (int k = mode.p + 1; k <= mode.p + al; ++k) ratio /= k;
  return std::sqrt(2.0 * ratio / std::numbers::pi) / beam.waist;
}

namespace detail {

// Shared radial kernel so that scalar and batched evaluation agree exactly.
inline double radial_value(double norm, double power, double gauss, double lag) {
  return ((norm * power) * gauss) * lag;
}

inline double scaled_power(double s, int k) {
  double v = 1.0;
  for (int i = 0; i < k; ++i) v *= s;
  return v;
}

}  // namespace detail

/// u_lp(r, phi); r must be non-negative.
inline ComplexField mode_field(const ModeIndex& mode, const BeamGeometry& beam, double r,
                               double phi) {
  if (!(r >= 0.0)) throw InvalidArgument("mode_field: r must be >= 0");
  const int al = std::abs(mode.l);
  const double rho = r / beam.waist;
  const double rho2 = rho * rho;
  const double radial = detail::radial_value(normalization(mode, beam),
                                             detail::scaled_power(std::numbers::sqrt2 * rho, al),
                                             std::exp(-rho2), laguerre(mode.p, al, 2.0 * rho2));
  const double angle = static_cast<double>(al) * phi;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  // exp(-i l phi): the sine flips sign with l so that u_{-l} == conj(u_l) exactly.
  return {radial * c, mode.l >= 0 ? -(radial * s) : radial * s};
}

inline ComplexField mode_field(const ModeIndex& mode, double r, double phi) {
  return mode_field(mode, BeamGeometry{}, r, phi);
}

/// The ordered set of modes |l| <= l_max, 0 <= p <= p_max used by tables.
/// Index order is l ascending, then p ascending.
class ModeSet {
 public:
  ModeSet(int l_max, int p_max) : l_max_(l_max), p_max_(p_max) {
    if (l_max < 0) throw InvalidArgument("l_max must be >= 0");
    if (p_max < 0) throw InvalidArgument("p_max must be >= 0");
  }

  int l_max() const { return l_max_; }
  int p_max() const { return p_max_; }
  std::size_t size() const {
    return static_cast<std::size_t>(2 * l_max_ + 1) * static_cast<std::size_t>(p_max_ + 1);
  }
  std::size_t index(const ModeIndex& m) const {
    return static_cast<std::size_t>(m.l + l_max_) * static_cast<std::size_t>(p_max_ + 1) +
           static_cast<std::size_t>(m.p);
  }
  bool contains(const ModeIndex& m) const {
    return m.p >= 0 && m.p <= p_max_ && m.l >= -l_max_ && m.l <= l_max_;
  }
  ModeIndex operator[](std::size_t i) const {
    const auto np = static_cast<std::size_t>(p_max_ + 1);
    return {static_cast<int>(i / np) - l_max_, static_cast<int>(i % np)};
  }

 private:
  int l_max_;
  int p_max_;
};

/// Evaluates a list of modes at many points in the unit-waist frame.
/// Values are identical to mode_field() for the same (mode, point).
class ModeEvaluator {
 public:
  explicit ModeEvaluator(std::vector<ModeIndex> modes) : modes_(std::move(modes)) {
    for (const auto& m : modes_) {
      validate(m);
      abs_l_max_ = std::max(abs_l_max_, std::abs(m.l));
      p_max_ = std::max(p_max_, m.p);
    }
    norms_.reserve(modes_.size());
    for (const auto& m : modes_) norms_.push_back(normalization(m));
  }

  const std::vector<ModeIndex>& modes() const { return modes_; }

  /// Writes mode-major arrays re[m * stride + k], im[m * stride + k] for k < count.
  void evaluate(const double* xs, const double* ys, std::size_t count, std::size_t stride,
                double* re, double* im) const {
    const int na = abs_l_max_ + 1;
    std::vector<double> powers(static_cast<std::size_t>(na));
    std::vector<double> lag(static_cast<std::size_t>(na) * static_cast<std::size_t>(p_max_ + 1));
    std::vector<double> cs(static_cast<std::size_t>(na)), sn(static_cast<std::size_t>(na));
    for (std::size_t k = 0; k < count; ++k) {
      const double x = xs[k], y = ys[k];
      const double r = std::hypot(x, y);
      const double phi = std::atan2(y, x);
      const double rho2 = r * r;
      const double gauss = std::exp(-rho2);
      const double s = std::numbers::sqrt2 * r;
      powers[0] = 1.0;
      for (int a = 1; a < na; ++a) powers[a] = powers[a - 1] * s;
      for (int a = 0; a < na; ++a) {
        laguerre_row(p_max_, a, 2.0 * rho2, &lag[static_cast<std::size_t>(a) * (p_max_ + 1)]);
        const double angle = static_cast<double>(a) * phi;
        cs[a] = std::cos(angle);
        sn[a] = std::sin(angle);
      }
      for (std::size_t m = 0; m < modes_.size(); ++m) {
        const int l = modes_[m].l;
        const int a = std::abs(l);
        const double radial = detail::radial_value(
            norms_[m], powers[a], gauss, lag[static_cast<std::size_t>(a) * (p_max_ + 1) + modes_[m].p]);
        re[m * stride + k] = radial * cs[a];
        im[m * stride + k] = l >= 0 ? -(radial * sn[a]) : radial * sn[a];
      }
    }
  }

 private:
  std::vector<ModeIndex> modes_;
  std::vector<double> norms_;
  int abs_l_max_ = 0;
  int p_max_ = 0;
};

}  // namespace csi
