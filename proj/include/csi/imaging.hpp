#pragma once

// Image reconstruction from an amplitude table and the transition-amplitude
// phase spectrum.
//
// The rendered image is the position diagonal of the operator expansion,
//   R(x) = sum a^{l'l}_{p'p} u_{l'p'}(x) conj(u_{lp}(x)),
// which tends to T(x) as the index ranges grow.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "csi/amplitudes.hpp"
#include "csi/error.hpp"
#include "csi/io.hpp"
#include "csi/modes.hpp"
#include "csi/parallel.hpp"
#include "csi/pgm.hpp"
#include "csi/scene.hpp"

namespace csi {

/// Square raster over [-extent, extent]^2; pixel centers, top row first.
struct ReconstructedImage {
  int resolution = 0;
  double extent = 0.0;
  int l_max = 0;
  int p_max = 0;
  std::vector<Complex> samples;  // row-major

  double pitch() const { return 2.0 * extent / resolution; }
  double x(int col) const { return -extent + pitch() * (col + 0.5); }
  double y(int row) const { return extent - pitch() * (row + 0.5); }
  const Complex& at(int col, int row) const {
    return samples[static_cast<std::size_t>(row) * static_cast<std::size_t>(resolution) +
                   static_cast<std::size_t>(col)];
  }
};

namespace detail {

inline void check_raster(int resolution, double extent) {
  if (resolution < 1 || resolution > 8192) throw InvalidArgument("image resolution must be in 1..8192");
  if (!(extent > 0.0) || !std::isfinite(extent)) throw InvalidArgument("image extent must be positive");
}

}  // namespace detail

/// R at arbitrary points. Each point sums v_o = sum_i a[o,i] conj(u_i), then
/// sum_o u_o v_o, in mode order.
inline std::vector<Complex> reconstruct_at(const AmplitudeTable& table, const std::vector<double>& xs,
                                           const std::vector<double>& ys, unsigned threads = 1) {
  if (xs.size() != ys.size()) throw InvalidArgument("point lists differ in length");
  const std::size_t m = table.size();
  const ModeEvaluator eval(detail::mode_list(table.modes));
  std::vector<Complex> out(xs.size());
  constexpr std::size_t kChunk = 64;
  const std::size_t chunks = (xs.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    const std::size_t count = std::min(kChunk, xs.size() - begin);
    std::vector<double> re(m * count), im(m * count);
    eval.evaluate(xs.data() + begin, ys.data() + begin, count, count, re.data(), im.data());
    for (std::size_t k = 0; k < count; ++k) {
      Complex total{};
      for (std::size_t o = 0; o < m; ++o) {
        Complex v{};
        const Complex* row = &table.entries[o * m];
        for (std::size_t i = 0; i < m; ++i) v += row[i] * Complex(re[i * count + k], -im[i * count + k]);
        total += Complex(re[o * count + k], im[o * count + k]) * v;
      }
      out[begin + k] = total;
    }
  });
  return out;
}

inline ReconstructedImage reconstruct(const AmplitudeTable& table, int resolution, double extent,
                                      unsigned threads = 1) {
  detail::check_raster(resolution, extent);
  ReconstructedImage img{resolution, extent, table.modes.l_max(), table.modes.p_max(), {}};
  const auto n = static_cast<std::size_t>(resolution);
  std::vector<double> xs(n * n), ys(n * n);
  for (int r = 0; r < resolution; ++r)
    for (int c = 0; c < resolution; ++c) {
      xs[r * n + c] = img.x(c);
      ys[r * n + c] = img.y(r);
    }
  img.samples = reconstruct_at(table, xs, ys, threads);
  return img;
}

/// The transmission itself on the same raster (imaginary parts zero); the
/// reference an ideal pipeline would reproduce.
inline ReconstructedImage sample_image(const TransmissionMap& map, int resolution, double extent) {
  detail::check_raster(resolution, extent);
  ReconstructedImage img{resolution, extent, 0, 0, {}};
  img.samples.resize(static_cast<std::size_t>(resolution) * resolution);
  for (int r = 0; r < resolution; ++r)
    for (int c = 0; c < resolution; ++c)
      img.samples[static_cast<std::size_t>(r) * resolution + c] = map.sample(img.x(c), img.y(r));
  return img;
}

/// |R| mapped affinely onto [0, 1]; a constant image maps to all zeros.
inline std::vector<double> display_magnitude(const ReconstructedImage& img) {
  std::vector<double> mag(img.samples.size());
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(img.samples[k]);
  if (mag.empty()) return mag;
  const auto [lo, hi] = std::minmax_element(mag.begin(), mag.end());
  const double a = *lo, span = *hi - *lo;
  for (double& v : mag) v = span > 0.0 ? (v - a) / span : 0.0;
  return mag;
}

struct ImageError {
  double nrmse = 0.0;        // RMS difference over the truth's range
  double correlation = 0.0;  // Pearson
  std::size_t pixels = 0;
};

/// Compares |R|, rescaled to [0, 1] over the region, with T sampled at the
/// same pixel centers, for pixels with r < radius.
inline ImageError image_error(const ReconstructedImage& img, const TransmissionMap& truth, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("comparison radius must be positive");
  std::vector<double> a, t;
  for (int r = 0; r < img.resolution; ++r)
    for (int c = 0; c < img.resolution; ++c) {
      const double x = img.x(c), y = img.y(r);
      if (std::hypot(x, y) >= radius) continue;
      a.push_back(std::abs(img.at(c, r)));
      t.push_back(truth.sample(x, y));
    }
  if (a.size() < 2) throw InvalidArgument("comparison region contains fewer than two pixels");
  const auto [alo, ahi] = std::minmax_element(a.begin(), a.end());
  const auto [tlo, thi] = std::minmax_element(t.begin(), t.end());
  const double a_min = *alo, a_span = *ahi - *alo, t_span = *thi - *tlo;
  if (!(a_span > 0.0) || !(t_span > 0.0))
    throw DegenerateDistribution("image is constant over the region; correlation is undefined");
  for (double& v : a) v = (v - a_min) / a_span;

  const double n = static_cast<double>(a.size());
  double ma = 0.0, mt = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ma += a[k];
    mt += t[k];
  }
  ma /= n;
  mt /= n;
  double saa = 0.0, stt = 0.0, sat = 0.0, sq = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double da = a[k] - ma, dt = t[k] - mt;
    saa += da * da;
    stt += dt * dt;
    sat += da * dt;
    sq += (a[k] - t[k]) * (a[k] - t[k]);
  }
  return {std::sqrt(sq / n) / t_span, sat / std::sqrt(saa * stt), a.size()};
}

/// arg a^{l'l}_{p'p} over (l', l) at fixed (p', p); undefined entries are NaN.
struct PhaseSpectrum {
  int l_max = 0;
  int p_out = 0;
  int p_in = 0;
  double floor = 0.01;
  std::vector<double> alpha;      // rows l' ascending, columns l ascending
  std::vector<double> magnitude;  // |a| on the same layout

  std::size_t side() const { return static_cast<std::size_t>(2 * l_max + 1); }
  double at(int l_out, int l_in) const {
    return alpha[static_cast<std::size_t>(l_out + l_max) * side() + static_cast<std::size_t>(l_in + l_max)];
  }
  double magnitude_at(int l_out, int l_in) const {
    return magnitude[static_cast<std::size_t>(l_out + l_max) * side() + static_cast<std::size_t>(l_in + l_max)];
  }
  bool defined(int l_out, int l_in) const { return !std::isnan(at(l_out, l_in)); }
};

/// Phase in (-pi, pi].
inline double principal_phase(Complex a) {
  const double t = std::arg(a);
  return t <= -std::numbers::pi ? std::numbers::pi : t;
}

inline PhaseSpectrum phase_spectrum(const AmplitudeTable& table, int p_out, int p_in, double floor = 0.01) {
  const int p_max = table.modes.p_max();
  if (p_out < 0 || p_out > p_max || p_in < 0 || p_in > p_max)
    throw InvalidArgument("phase slice (p_out=" + std::to_string(p_out) + ", p_in=" + std::to_string(p_in) +
                          ") is outside the table's p range 0.." + std::to_string(p_max));
  if (!(floor >= 0.0) || !(floor < 1.0)) throw InvalidArgument("phase floor must be in [0, 1)");
  const int l_max = table.modes.l_max();
  PhaseSpectrum ps{l_max, p_out, p_in, floor, {}, {}};
  const std::size_t side = ps.side();
  ps.alpha.assign(side * side, std::numeric_limits<double>::quiet_NaN());
  ps.magnitude.resize(side * side);
  double peak = 0.0;
  for (int lo = -l_max; lo <= l_max; ++lo)
    for (int li = -l_max; li <= l_max; ++li) {
      const double m = std::abs(table.at({lo, p_out}, {li, p_in}));
      ps.magnitude[static_cast<std::size_t>(lo + l_max) * side + static_cast<std::size_t>(li + l_max)] = m;
      peak = std::max(peak, m);
    }
  if (!(peak > 0.0)) throw DegenerateDistribution("phase slice is identically zero");
  for (int lo = -l_max; lo <= l_max; ++lo)
    for (int li = -l_max; li <= l_max; ++li) {
      const std::size_t k = static_cast<std::size_t>(lo + l_max) * side + static_cast<std::size_t>(li + l_max);
      if (ps.magnitude[k] >= floor * peak) ps.alpha[k] = principal_phase(table.at({lo, p_out}, {li, p_in}));
    }
  return ps;
}

/// Largest |a| in the slice with (l' - l) mod n != 0, relative to the slice maximum.
inline double rule_leakage(const PhaseSpectrum& ps, int n) {
  if (n < 1) throw InvalidArgument("symmetry order must be >= 1");
  double peak = 0.0, off = 0.0;
  for (int lo = -ps.l_max; lo <= ps.l_max; ++lo)
    for (int li = -ps.l_max; li <= ps.l_max; ++li) {
      const double m = ps.magnitude_at(lo, li);
      peak = std::max(peak, m);
      if ((lo - li) % n != 0) off = std::max(off, m);
    }
  return peak > 0.0 ? off / peak : 0.0;
}

inline Graymap to_graymap(const ReconstructedImage& img, int maxval = 255) {
  if (maxval < 1 || maxval > 65535) throw InvalidArgument("maxval must be in 1..65535");
  const auto mag = display_magnitude(img);
  Graymap g{img.resolution, img.resolution, maxval, std::vector<std::uint16_t>(mag.size()), {}};
  for (std::size_t k = 0; k < mag.size(); ++k)
    g.samples[k] = static_cast<std::uint16_t>(std::lround(mag[k] * maxval));
  return g;
}

/// Raw samples, one pixel per line: `row,col,x,y,re,im`.
inline std::string image_csv(const ReconstructedImage& img, std::string_view header = {}) {
  std::string out(header);
  out += "row,col,x,y,re,im\n";
  for (int r = 0; r < img.resolution; ++r)
    for (int c = 0; c < img.resolution; ++c) {
      const Complex v = img.at(c, r);
      out += std::to_string(r) + "," + std::to_string(c) + "," + format_double(img.x(c)) + "," +
             format_double(img.y(r)) + "," + format_double(v.real()) + "," + format_double(v.imag()) + "\n";
    }
  return out;
}

/// Dense alpha(l', l); first row is the l axis, first column l'. Undefined entries are `nan`.
inline std::string phase_csv(const PhaseSpectrum& ps, std::string_view header = {}) {
  std::string out(header);
  out += "l_out\\l_in";
  for (int li = -ps.l_max; li <= ps.l_max; ++li) out += "," + std::to_string(li);
  out += "\n";
  for (int lo = -ps.l_max; lo <= ps.l_max; ++lo) {
    out += std::to_string(lo);
    for (int li = -ps.l_max; li <= ps.l_max; ++li) out += "," + format_double(ps.at(lo, li));
    out += "\n";
  }
  return out;
}

}  // namespace csi
