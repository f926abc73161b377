#pragma once

// Scripted studies: off-axis mutual-information sweep, rotational
// insensitivity under random per-entry rotations, selection-rule audit and
// the centered-object catalog. Results are plain values; writers render
// them to CSV/PGM through an ArtifactSink that also keeps the manifest.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "csi/amplitudes.hpp"
#include "csi/error.hpp"
#include "csi/imaging.hpp"
#include "csi/io.hpp"
#include "csi/pgm.hpp"
#include "csi/scene.hpp"
#include "csi/spectra.hpp"

namespace csi {

/// Index ranges, quadrature grid and engine options shared by every study.
struct StudySetup {
  int l_max = kDefaultLMax;
  int p_max = kDefaultPMax;
  QuadratureGrid grid{};
  EngineOptions engine{};
  SpdcSource source{};
  ZeroDiagonalOptions zeroing{};
};

// ---------------------------------------------------------------------------
// Translation sweep

struct SweepConfig {
  int steps = 13;
  double step = 0.25;       // in waists
  double shrink = 1.0;      // object is scaled by 1/shrink before translation
  double direction = 0.0;   // angle of the translation axis, radians
};

struct SweepPoint {
  double displacement = 0.0;
  double mutual_information = 0.0;
  double off_diagonal_mi = 0.0;
  double off_diagonal_mass = 0.0;
  bool vanished = false;  // no off-diagonal mass; off_diagonal_mi reported as 0
};

struct SweepResult {
  SweepConfig config;
  std::vector<SweepPoint> points;
};

inline void validate(const SweepConfig& c) {
  if (c.steps < 2) throw InvalidArgument("sweep needs at least 2 steps");
  if (!(c.step > 0.0) || !std::isfinite(c.step)) throw InvalidArgument("sweep step must be positive");
  if (!(c.shrink > 0.0) || !std::isfinite(c.shrink)) throw InvalidArgument("shrink factor must be positive");
  if (!std::isfinite(c.direction)) throw InvalidArgument("sweep direction must be finite");
}

inline SweepResult translation_sweep(const TransmissionMap& object, const SweepConfig& config,
                                     const StudySetup& setup = {}) {
  validate(config);
  const AmplitudeEngine engine(setup.l_max, setup.p_max, setup.grid, setup.engine);
  const TransmissionMap base = object.scaled(1.0 / config.shrink);
  SweepResult result{config, {}};
  for (int k = 0; k < config.steps; ++k) {
    SweepPoint pt;
    pt.displacement = k * config.step;
    const TransmissionMap moved = base.translated(pt.displacement * std::cos(config.direction),
                                                  pt.displacement * std::sin(config.direction));
    try {
      const JointSpectrum spec = joint_spectrum(engine.table(moved), setup.source);
      pt.mutual_information = mutual_information(spec);
      pt.off_diagonal_mass = off_diagonal_mass(spec);
      pt.off_diagonal_mi = mutual_information(zero_diagonal(spec, setup.zeroing));
    } catch (const DegenerateDistribution&) {
      pt.off_diagonal_mi = 0.0;
      pt.vanished = true;
    }
    result.points.push_back(pt);
  }
  return result;
}

inline std::string sweep_csv(const SweepResult& r, std::string_view header = {}) {
  std::string out(header);
  out += "displacement,mutual_information,off_diagonal_mi,off_diagonal_mass,vanished\n";
  for (const auto& p : r.points)
    out += format_double(p.displacement) + "," + format_double(p.mutual_information) + "," +
           format_double(p.off_diagonal_mi) + "," + format_double(p.off_diagonal_mass) + "," +
           (p.vanished ? "1" : "0") + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Rotational insensitivity

/// splitmix64 output for `counter` under `seed`: a counter-based stream, so an
/// entry's draw does not depend on which thread evaluates it or when.
inline std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + (counter + 1) * 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Uniform angle in [0, 2 pi).
inline double random_angle(std::uint64_t seed, std::uint64_t counter) {
  const double u = static_cast<double>(splitmix64(seed, counter) >> 11) * 0x1.0p-53;
  return 2.0 * std::numbers::pi * u;
}

struct RotationTrialConfig {
  std::uint64_t seed = 1;
  int trials = 1;
  int image_resolution = 96;
  double image_extent = 2.0;
  double variance_radius = 2.0;  // polar grid for the azimuthal variance
  int radial_samples = 32;
  int angular_samples = 64;
};

inline void validate(const RotationTrialConfig& c) {
  if (c.trials < 1) throw InvalidArgument("trial count must be >= 1");
  if (c.radial_samples < 1 || c.angular_samples < 2) throw InvalidArgument("polar grid too small");
  if (!(c.variance_radius > 0.0)) throw InvalidArgument("variance radius must be positive");
}

struct RotationReport {
  JointSpectrum fixed_spectrum;
  JointSpectrum random_spectrum;
  ReconstructedImage fixed_image;
  ReconstructedImage random_image;
  double total_variation = 0.0;
  double zeroed_total_variation = std::numeric_limits<double>::quiet_NaN();  // NaN if degenerate
  double fixed_azimuthal_variance = 0.0;
  double random_azimuthal_variance = 0.0;
};

/// Mean over radii of the population variance of |R| over azimuth.
inline double mean_azimuthal_variance(const AmplitudeTable& table, double radius, int radial, int angular,
                                      unsigned threads = 1) {
  std::vector<double> xs, ys;
  for (int i = 0; i < radial; ++i) {
    const double r = radius * (i + 0.5) / radial;
    for (int j = 0; j < angular; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / angular;
      xs.push_back(r * std::cos(phi));
      ys.push_back(r * std::sin(phi));
    }
  }
  const auto values = reconstruct_at(table, xs, ys, threads);
  double acc = 0.0;
  for (int i = 0; i < radial; ++i) {
    double mean = 0.0, sq = 0.0;
    for (int j = 0; j < angular; ++j) mean += std::abs(values[static_cast<std::size_t>(i * angular + j)]);
    mean /= angular;
    for (int j = 0; j < angular; ++j) {
      const double d = std::abs(values[static_cast<std::size_t>(i * angular + j)]) - mean;
      sq += d * d;
    }
    acc += sq / angular;
  }
  return acc / radial;
}

namespace detail {

inline AmplitudeTable average_tables(const std::vector<AmplitudeTable>& tables) {
  AmplitudeTable avg = tables.front();
  for (std::size_t t = 1; t < tables.size(); ++t)
    for (std::size_t q = 0; q < avg.entries.size(); ++q) avg.entries[q] += tables[t].entries[q];
  for (auto& e : avg.entries) e /= static_cast<double>(tables.size());
  return avg;
}

}  // namespace detail

/// Each table entry sees the object under its own uniformly drawn rotation.
/// With several trials the spectra are averaged as probability mixtures and
/// the images from the averaged amplitudes.
inline RotationReport rotational_insensitivity(const TransmissionMap& object, const RotationTrialConfig& config,
                                               const StudySetup& setup = {}) {
  validate(config);
  if (!object.is_analytic()) throw InvalidArgument("random rotation needs an analytic shape");
  const AmplitudeEngine engine(setup.l_max, setup.p_max, setup.grid, setup.engine);
  const std::size_t m = engine.modes().size();
  const unsigned threads = setup.engine.threads;

  const AmplitudeTable fixed = engine.table(object);
  // Support is rotation invariant only about its own center.
  const SupportDisc s = object.support();
  const double reach = std::hypot(s.center.x - object.pose().translation.x, s.center.y - object.pose().translation.y);
  const SupportDisc support{object.pose().translation, s.radius < 0.0 ? s.radius : s.radius + reach};

  std::vector<AmplitudeTable> tables;
  std::vector<JointSpectrum> spectra;
  for (int t = 0; t < config.trials; ++t) {
    const auto base = static_cast<std::uint64_t>(t) * m * m;
    tables.push_back(engine.table_per_entry(
        [&](std::size_t out, std::size_t in) { return object.rotated(random_angle(config.seed, base + out * m + in)); },
        support, object.background()));
    spectra.push_back(joint_spectrum(tables.back(), setup.source));
  }
  JointSpectrum mixed = spectra.front();
  for (std::size_t t = 1; t < spectra.size(); ++t)
    for (std::size_t q = 0; q < mixed.probability.values.size(); ++q)
      mixed.probability.values[q] += spectra[t].probability.values[q];
  for (auto& v : mixed.probability.values) v /= static_cast<double>(spectra.size());
  const AmplitudeTable random = detail::average_tables(tables);

  RotationReport rep{joint_spectrum(fixed, setup.source), std::move(mixed),
                     reconstruct(fixed, config.image_resolution, config.image_extent, threads),
                     reconstruct(random, config.image_resolution, config.image_extent, threads)};
  rep.total_variation = total_variation(rep.fixed_spectrum, rep.random_spectrum);
  try {
    rep.zeroed_total_variation = total_variation(zero_diagonal(rep.fixed_spectrum, setup.zeroing),
                                                 zero_diagonal(rep.random_spectrum, setup.zeroing));
  } catch (const DegenerateDistribution&) {
  }
  rep.fixed_azimuthal_variance = mean_azimuthal_variance(fixed, config.variance_radius, config.radial_samples,
                                                         config.angular_samples, threads);
  rep.random_azimuthal_variance = mean_azimuthal_variance(random, config.variance_radius, config.radial_samples,
                                                          config.angular_samples, threads);
  return rep;
}

// ---------------------------------------------------------------------------
// Selection-rule audit

struct AuditResult {
  int order = 1;
  double leakage = 0.0;               // share of sum |a|^2 with (l' - l) mod N != 0
  double off_diagonal_leakage = 0.0;  // the same, relative to the l' != l mass
  double total = 0.0;
  double off_diagonal_total = 0.0;
};

/// Below this share of sum |a|^2 the l' != l mass is quadrature noise and
/// off_diagonal_leakage is reported as 0.
inline constexpr double kAuditNoiseFloor = 1e-10;

inline AuditResult symmetry_audit(const AmplitudeTable& table, int order) {
  if (order < 1) throw InvalidArgument("symmetry order must be >= 1");
  const std::size_t m = table.size();
  std::vector<double> all, off, leak;
  all.reserve(m * m);
  for (std::size_t o = 0; o < m; ++o)
    for (std::size_t i = 0; i < m; ++i) {
      const double w = std::norm(table.at(o, i));
      const int dl = table.modes[o].l - table.modes[i].l;
      all.push_back(w);
      if (dl != 0) off.push_back(w);
      if (dl % order != 0) leak.push_back(w);
    }
  AuditResult r{order, 0.0, 0.0, pairwise_sum(all), pairwise_sum(off)};
  const double leaked = pairwise_sum(leak);
  if (r.total > 0.0) r.leakage = leaked / r.total;
  if (r.off_diagonal_total > kAuditNoiseFloor * r.total) r.off_diagonal_leakage = leaked / r.off_diagonal_total;
  return r;
}

// ---------------------------------------------------------------------------
// Artifacts and manifest

/// Writes files under one run directory and lists each in manifest.csv with
/// the hash of the configuration that produced it.
class ArtifactSink {
 public:
  ArtifactSink(std::filesystem::path dir, std::string config_hash)
      : dir_(std::move(dir)), config_hash_(std::move(config_hash)) {}

  const std::filesystem::path& directory() const { return dir_; }

  void write(const std::string& name, std::string_view content) {
    write_file(dir_ / name, content);
    entries_.push_back({name, hex64(fnv1a64(content))});
  }

  /// Writes manifest.csv and returns its path.
  std::filesystem::path finish() const {
    std::string out = "artifact,config_hash,content_hash\n";
    for (const auto& e : entries_) out += e.name + "," + config_hash_ + "," + e.content_hash + "\n";
    write_file(dir_ / "manifest.csv", out);
    return dir_ / "manifest.csv";
  }

  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    std::string name;
    std::string content_hash;
  };
  std::filesystem::path dir_;
  std::string config_hash_;
  std::vector<Entry> entries_;
};

// ---------------------------------------------------------------------------
// Centered catalog

struct CatalogItem {
  std::string name;  // file stem, [A-Za-z0-9_-]
  std::optional<TransmissionMap> map;
  std::string load_error;  // set when the map could not be built
};

struct CatalogBundle {
  std::string name;
  std::optional<AmplitudeTable> table;
  std::optional<JointSpectrum> spectrum;
  std::optional<JointSpectrum> zeroed;
  std::optional<ReconstructedImage> image;
  std::optional<PhaseSpectrum> phase;
  double off_diagonal_mi = 0.0;
  std::string error;  // "kind: message" of the first failing stage, empty on success
};

struct CatalogConfig {
  int image_resolution = 96;
  double image_extent = 2.0;
  int phase_p_out = 7;  // clamped to the table's p range
  int phase_p_in = 2;
  double phase_floor = 0.01;
};

inline std::vector<CatalogBundle> centered_catalog(const std::vector<CatalogItem>& items,
                                                   const CatalogConfig& config = {},
                                                   const StudySetup& setup = {}) {
  const AmplitudeEngine engine(setup.l_max, setup.p_max, setup.grid, setup.engine);
  std::vector<CatalogBundle> bundles;
  for (const auto& item : items) {
    CatalogBundle b;
    b.name = item.name;
    if (!item.map) {
      b.error = item.load_error.empty() ? "invalid-argument: no object" : item.load_error;
      bundles.push_back(std::move(b));
      continue;
    }
    try {
      b.table = engine.table(*item.map);
      b.image = reconstruct(*b.table, config.image_resolution, config.image_extent, setup.engine.threads);
      b.phase = phase_spectrum(*b.table, std::min(config.phase_p_out, setup.p_max),
                               std::min(config.phase_p_in, setup.p_max), config.phase_floor);
      b.spectrum = joint_spectrum(*b.table, setup.source);
      b.zeroed = zero_diagonal(*b.spectrum, setup.zeroing);
      b.off_diagonal_mi = mutual_information(*b.zeroed);
    } catch (const Error& e) {
      b.error = std::string(e.kind()) + ": " + e.what();
    }
    bundles.push_back(std::move(b));
  }
  return bundles;
}

}  // namespace csi
