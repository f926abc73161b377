#pragma once

// Shared fixtures and independent reference computations for the test suites.
// The references here deliberately avoid the library's own code paths.

#include <cmath>
#include <complex>
#include <filesystem>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "csi/csi.hpp"

namespace csitest {

using namespace csi;

/// One engine per (l_max, p_max, grid), so the Gram matrix is built once per process.
inline const AmplitudeEngine& engine(int l_max = kDefaultLMax, int p_max = kDefaultPMax,
                                     QuadratureGrid grid = {}) {
  static std::map<std::tuple<int, int, double, int>, std::unique_ptr<AmplitudeEngine>> cache;
  auto& slot = cache[{l_max, p_max, grid.half_width, grid.n}];
  if (!slot) slot = std::make_unique<AmplitudeEngine>(l_max, p_max, grid);
  return *slot;
}

inline AmplitudeTable table_of(const TransmissionMap& map, int l_max = kDefaultLMax, int p_max = kDefaultPMax) {
  return engine(l_max, p_max).table(map);
}

inline TransmissionMap star5() { return make_shape(parse_shape("star:5")); }
inline TransmissionMap fan8() { return make_shape(parse_shape("fan:8")); }

inline std::filesystem::path data_dir() { return CSI_TEST_DATA_DIR; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("csi-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------
// References

/// Generalized Laguerre polynomial from its explicit series,
/// sum_k (-1)^k C(n+a, n-k) x^k / k!, in long double.
inline long double laguerre_series(int n, int a, long double x) {
  long double sum = 0.0L;
  for (int k = 0; k <= n; ++k) {
    long double binom = 1.0L;  // C(n+a, n-k)
    for (int j = 1; j <= n - k; ++j) binom = binom * (a + k + j) / j;
    long double term = binom;
    for (int j = 1; j <= k; ++j) term = term * x / j;
    sum += (k % 2 ? -term : term);
  }
  return sum;
}

/// Radial part of u_{lp} (unit waist) built from the series and factorials.
inline long double radial_reference(int l, int p, long double r) {
  const int a = std::abs(l);
  long double ratio = 1.0L;  // p! / (p + a)!
  for (int j = p + 1; j <= p + a; ++j) ratio /= j;
  const long double c = std::sqrt(2.0L * ratio / std::numbers::pi_v<long double>);
  return c * std::pow(std::sqrt(2.0L) * r, a) * std::exp(-r * r) * laguerre_series(p, a, 2.0L * r * r);
}

/// 2 pi * integral_{r0}^{r1} R_{l p1}(r) R_{l p2}(r) r dr by composite Simpson.
inline double radial_overlap(int l, int p1, int p2, double r0, double r1, int panels = 20000) {
  const long double h = (static_cast<long double>(r1) - r0) / panels;
  long double s = 0.0L;
  for (int k = 0; k <= panels; ++k) {
    const long double r = r0 + k * h;
    const long double f = radial_reference(l, p1, r) * radial_reference(l, p2, r) * r;
    s += f * (k == 0 || k == panels ? 1 : (k % 2 ? 4 : 2));
  }
  return static_cast<double>(2.0L * std::numbers::pi_v<long double> * s * h / 3.0L);
}

/// Mutual information of a dense row-major joint distribution, written out
/// term by term with natural logs and explicit marginals.
inline double mutual_information_reference(const std::vector<std::vector<double>>& p) {
  const std::size_t rows = p.size(), cols = p.front().size();
  std::vector<long double> ps(rows, 0.0L), pi(cols, 0.0L);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      ps[r] += p[r][c];
      pi[c] += p[r][c];
    }
  long double i = 0.0L;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (p[r][c] > 0.0) i += p[r][c] * std::log(p[r][c] / (ps[r] * pi[c]));
  return static_cast<double>(i / std::log(2.0L));
}

inline ProbabilityMatrix matrix_of(const std::vector<std::vector<double>>& rows) {
  ProbabilityMatrix m{rows.size(), rows.front().size(), {}};
  for (const auto& r : rows) m.values.insert(m.values.end(), r.begin(), r.end());
  return m;
}

/// max |a - e^{i s (l'-l) theta} b| / max |b|.
inline double phase_law_error(const AmplitudeTable& rotated, const AmplitudeTable& base, double theta, int sign) {
  double worst = 0.0;
  const std::size_t m = base.size();
  for (std::size_t o = 0; o < m; ++o)
    for (std::size_t i = 0; i < m; ++i) {
      const int dl = base.modes[o].l - base.modes[i].l;
      const Complex phase = std::polar(1.0, sign * dl * theta);
      worst = std::max(worst, std::abs(rotated.at(o, i) - phase * base.at(o, i)));
    }
  return worst / base.max_magnitude();
}

/// Share of the off-diagonal mass of `spec` lying off the lines (l_o + l_r) mod n = 0.
inline double off_rule_fraction(const JointSpectrum& spec, int n) {
  double off = 0.0, bad = 0.0;
  const std::size_t m = spec.modes.size();
  for (std::size_t o = 0; o < m; ++o)
    for (std::size_t r = 0; r < m; ++r) {
      const int s = spec.modes[o].l + spec.modes[r].l;
      if (s == 0) continue;
      off += spec.probability.at(o, r);
      if (s % n != 0) bad += spec.probability.at(o, r);
    }
  return off > 0.0 ? bad / off : 0.0;
}

}  // namespace csitest
