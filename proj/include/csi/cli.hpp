#pragma once

// Command-line front end: option parsing into a RunConfig and dispatch to the
// pipelines. Exit status 0 = success, 1 = runtime error (one `kind: message`
// line on stderr), 2 = usage error.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csi/amplitudes.hpp"
#include "csi/detection.hpp"
#include "csi/error.hpp"
#include "csi/experiments.hpp"
#include "csi/imaging.hpp"
#include "csi/io.hpp"
#include "csi/pgm.hpp"
#include "csi/scene.hpp"
#include "csi/spectra.hpp"

namespace csi::cli {

inline constexpr const char* kOutputDirEnv = "CSI_OUTPUT_DIR";

struct RunConfig {
  std::string command;

  // Object
  std::string shape;   // shape descriptor, "identity" or "uniform:V"
  std::string raster;  // PGM path
  double pitch = 0.0;  // raster pixel size in waists; 0 = longest side spans 2 waists
  double rotation = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double scale = 1.0;
  bool invert = false;

  // Ranges, grid, source
  int l_max = kDefaultLMax;
  int p_max = kDefaultPMax;
  double half_width = kDefaultHalfWidth;
  int grid_n = kDefaultResolution;
  std::string source = "flat";
  bool renormalize = true;

  // Per-command
  int resolution = 128;
  double extent = 2.0;
  int p_out = 7;
  int p_in = 2;
  double floor = 0.01;
  int steps = 13;
  double step = 0.25;
  double shrink = 1.0;
  int order = 0;  // 0 = taken from the shape
  std::uint64_t seed = 1;
  int trials = 1;
  std::vector<std::string> items;

  // Execution; neither affects any artifact byte.
  unsigned threads = 0;
  std::string output_dir;
};

/// Bad command line; maps to exit status 2.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error("usage-error", what) {}
};

/// --help was given; `text` is what to print.
struct HelpRequested {
  std::string text;
};

namespace detail {

inline bool has_object(const RunConfig& c) { return !c.shape.empty() || !c.raster.empty(); }

inline SpdcSource parse_source(const std::string& s) {
  if (s == "flat") return SpdcSource::flat();
  if (s.rfind("gauss:", 0) == 0) return SpdcSource::gaussian(csi::detail::parse_double(s.substr(6), s));
  throw InvalidArgument("unknown source '" + s + "' (expected flat or gauss:SIGMA)");
}

inline TransmissionMap object_from_text(const std::string& text, Convention conv) {
  if (text == "identity") return TransmissionMap::uniform(1.0);
  if (text.rfind("uniform:", 0) == 0)
    return TransmissionMap::uniform(csi::detail::parse_double(std::string_view(text).substr(8), text));
  return TransmissionMap::shape(parse_shape(text), conv);
}

inline TransmissionMap raster_from_file(const std::string& path, double pitch, Convention conv) {
  const std::string bytes = read_file(path);
  const Graymap g = read_pgm(bytes);
  const double p = pitch > 0.0 ? pitch : 2.0 / std::max(g.width, g.height);
  return load_raster(bytes, p, {}, conv);
}

inline TransmissionMap build_object(const RunConfig& c) {
  const Convention conv = c.invert ? Convention::inverted : Convention::opaque;
  TransmissionMap m = c.raster.empty() ? object_from_text(c.shape, conv) : raster_from_file(c.raster, c.pitch, conv);
  SceneTransform pose;
  pose.rotation = c.rotation;
  pose.translation = {c.dx, c.dy};
  pose.scale = c.scale;
  return m.with_pose(pose);
}

inline StudySetup study_setup(const RunConfig& c) {
  StudySetup s;
  s.l_max = c.l_max;
  s.p_max = c.p_max;
  s.grid = build_grid(c.half_width, c.grid_n);
  s.engine.threads = c.threads;
  s.source = parse_source(c.source);
  s.zeroing.renormalize = c.renormalize;
  return s;
}

/// Symmetry order implied by the configured shape, or 0.
inline int shape_order(const RunConfig& c) {
  if (!c.raster.empty() || c.shape.empty() || c.shape == "identity" || c.shape.rfind("uniform:", 0) == 0) return 0;
  const ShapeDescriptor d = parse_shape(c.shape);
  if (const auto* s = std::get_if<Star>(&d)) return s->points;
  if (const auto* f = std::get_if<Fan>(&d)) return f->bands;
  return 0;
}

inline void validate_semantics(const RunConfig& c) {
  if (!c.shape.empty() && !c.raster.empty()) throw UsageError("--shape and --raster are mutually exclusive");
  const bool needs_object = c.command != "shapes" && c.command != "catalog";
  if (needs_object && !has_object(c)) throw UsageError(c.command + " needs --shape or --raster");
  try {
    if (!c.shape.empty()) object_from_text(c.shape, Convention::opaque);
    parse_source(c.source);
    validate(SceneTransform{c.rotation, {c.dx, c.dy}, c.scale});
    build_grid(c.half_width, c.grid_n);
    for (const auto& item : c.items)
      if (item.find('=') == std::string::npos || item.front() == '=')
        throw InvalidArgument("catalog item '" + item + "' must be NAME=SHAPE or NAME=pgm:PATH");
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  if ((c.command == "rotate-random") && !c.raster.empty())
    throw UsageError("rotate-random needs an analytic --shape");
  if (c.command == "audit" && c.order == 0 && shape_order(c) == 0)
    throw UsageError("audit needs --order for shapes without an intrinsic symmetry order");
}

inline void add_object_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--shape", c.shape, "Shape descriptor (star:5, fan:8, disc:1, ..., identity)");
  sub->add_option("--raster", c.raster, "PGM raster object")->check(CLI::ExistingFile);
  sub->add_option("--pitch", c.pitch, "Raster pixel size in waists (0: fit to 2 waists)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--rotate", c.rotation, "Object rotation, radians");
  sub->add_option("--dx", c.dx, "Object translation along x, waists");
  sub->add_option("--dy", c.dy, "Object translation along y, waists");
  sub->add_option("--scale", c.scale, "Object scale factor")->check(CLI::PositiveNumber);
  sub->add_flag("--invert", c.invert, "Inverted convention (shape interiors transmit)");
}

inline void add_range_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--lmax", c.l_max, "Largest |l|")->check(CLI::Range(0, 64));
  sub->add_option("--pmax", c.p_max, "Largest p")->check(CLI::Range(0, 64));
  sub->add_option("--half-width", c.half_width, "Quadrature half-width L, waists")->check(CLI::PositiveNumber);
  sub->add_option("--grid", c.grid_n, "Quadrature nodes per side")->check(CLI::Range(16, 32768));
  sub->add_option("--source", c.source, "SPDC weights: flat or gauss:SIGMA");
  sub->add_flag("!--no-renormalize", c.renormalize, "Keep the diagonal-zeroed spectrum unnormalized");
}

inline void add_image_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--resolution", c.resolution, "Image side in pixels")->check(CLI::Range(1, 8192));
  sub->add_option("--extent", c.extent, "Image half-width, waists")->check(CLI::PositiveNumber);
}

}  // namespace detail

/// Parses arguments (without the program name). Throws UsageError or HelpRequested.
inline RunConfig parse_cli(std::vector<std::string> args) {
  RunConfig c;
  CLI::App app{"Correlated spiral imaging: OAM transition amplitudes, spectra and reconstructions", "csi"};
  app.require_subcommand(1);
  app.fallthrough();  // --threads, --out, --config may follow the subcommand
  app.set_config("--config", "", "Key-value config file");
  app.add_option("--threads", c.threads, "Worker threads (0: all cores); results do not depend on it");
  app.add_option("--out", c.output_dir, std::string("Output directory (default $") + kOutputDirEnv + " or csi-out)");

  using namespace detail;
  auto* shapes = app.add_subcommand("shapes", "Rasterize the object to PGM, or list the shape grammar");
  add_object_options(shapes, c);
  add_image_options(shapes, c);

  auto* amplitudes = app.add_subcommand("amplitudes", "Transition amplitude table");
  add_object_options(amplitudes, c);
  add_range_options(amplitudes, c);

  auto* spectrum = app.add_subcommand("spectrum", "Joint OAM spectrum, collapsed and diagonal-zeroed");
  add_object_options(spectrum, c);
  add_range_options(spectrum, c);

  auto* mi = app.add_subcommand("mutual-info", "Full and off-diagonal mutual information");
  add_object_options(mi, c);
  add_range_options(mi, c);

  auto* recon = app.add_subcommand("reconstruct", "Image reconstructed from the amplitudes");
  add_object_options(recon, c);
  add_range_options(recon, c);
  add_image_options(recon, c);

  auto* phase = app.add_subcommand("phase-spectrum", "Amplitude phases at fixed (p_out, p_in)");
  add_object_options(phase, c);
  add_range_options(phase, c);
  phase->add_option("--p-out", c.p_out, "Radial index of the outgoing mode")->check(CLI::NonNegativeNumber);
  phase->add_option("--p-in", c.p_in, "Radial index of the incoming mode")->check(CLI::NonNegativeNumber);
  phase->add_option("--floor", c.floor, "Magnitude floor relative to the slice maximum")->check(CLI::Range(0.0, 0.999999));
  phase->add_option("--order", c.order, "Symmetry order for the leakage report")->check(CLI::NonNegativeNumber);

  auto* sweep = app.add_subcommand("sweep", "Mutual information versus displacement");
  add_object_options(sweep, c);
  add_range_options(sweep, c);
  sweep->add_option("--steps", c.steps, "Number of displacements")->check(CLI::Range(2, 100000));
  sweep->add_option("--step", c.step, "Displacement increment, waists")->check(CLI::PositiveNumber);
  sweep->add_option("--shrink", c.shrink, "Scale the object by 1/shrink first")->check(CLI::PositiveNumber);

  auto* rotate = app.add_subcommand("rotate-random", "Independent random rotation per amplitude");
  add_object_options(rotate, c);
  add_range_options(rotate, c);
  add_image_options(rotate, c);
  rotate->add_option("--seed", c.seed, "PRNG seed");
  rotate->add_option("--trials", c.trials, "Independent rotation draws per entry")->check(CLI::Range(1, 100000));

  auto* audit = app.add_subcommand("audit", "Selection-rule leakage of the amplitude table");
  add_object_options(audit, c);
  add_range_options(audit, c);
  audit->add_option("--order", c.order, "Symmetry order N (default: from the shape)")->check(CLI::NonNegativeNumber);

  auto* catalog = app.add_subcommand("catalog", "Spectra, images and phases for a list of centered objects");
  add_range_options(catalog, c);
  add_image_options(catalog, c);
  catalog->add_option("--item", c.items, "NAME=SHAPE or NAME=pgm:PATH (repeatable)");
  catalog->add_flag("--invert", c.invert, "Inverted convention");
  catalog->add_option("--pitch", c.pitch, "Raster pixel size in waists (0: fit to 2 waists)")
      ->check(CLI::NonNegativeNumber);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::ostringstream text;
      app.exit(e, text, text);
      throw HelpRequested{text.str()};
    }
    throw UsageError(e.what());
  }
  for (auto* sub : app.get_subcommands()) c.command = sub->get_name();
  validate_semantics(c);
  return c;
}

inline RunConfig parse_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_cli(std::move(args));
}

/// Every field that can influence an artifact, in a fixed order. Threads and
/// the output directory are deliberately absent.
inline KeyValues describe(const RunConfig& c) {
  KeyValues kv{{"command", c.command},
               {"shape", c.shape},
               {"raster", c.raster},
               {"pitch", format_double(c.pitch)},
               {"rotation", format_double(c.rotation)},
               {"dx", format_double(c.dx)},
               {"dy", format_double(c.dy)},
               {"scale", format_double(c.scale)},
               {"convention", c.invert ? "inverted" : "opaque"},
               {"l_max", std::to_string(c.l_max)},
               {"p_max", std::to_string(c.p_max)},
               {"grid_half_width", format_double(c.half_width)},
               {"grid_n", std::to_string(c.grid_n)},
               {"source", c.source},
               {"renormalize", c.renormalize ? "1" : "0"},
               {"resolution", std::to_string(c.resolution)},
               {"extent", format_double(c.extent)},
               {"p_out", std::to_string(c.p_out)},
               {"p_in", std::to_string(c.p_in)},
               {"phase_floor", format_double(c.floor)},
               {"steps", std::to_string(c.steps)},
               {"step", format_double(c.step)},
               {"shrink", format_double(c.shrink)},
               {"order", std::to_string(c.order)},
               {"seed", std::to_string(c.seed)},
               {"trials", std::to_string(c.trials)}};
  std::string items;
  for (const auto& i : c.items) items += (items.empty() ? "" : ";") + i;
  kv.emplace_back("items", items);
  return kv;
}

inline std::string config_hash(const RunConfig& c) { return hex64(fnv1a64(comment_header(describe(c)))); }

/// Hash of the object's defining inputs: raster bytes (including catalog
/// rasters) or descriptor text.
inline std::string input_hash(const RunConfig& c) {
  std::uint64_t h = fnv1a64(c.shape);
  if (!c.raster.empty()) h = fnv1a64(read_file(c.raster), h);
  for (const auto& item : c.items) {
    h = fnv1a64(item, h);
    const auto eq = item.find('=');
    if (eq != std::string::npos && item.compare(eq + 1, 4, "pgm:") == 0) {
      try {
        h = fnv1a64(read_file(item.substr(eq + 5)), h);
      } catch (const IoError&) {
      }
    }
  }
  return hex64(h);
}

inline std::filesystem::path output_directory(const RunConfig& c) {
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "csi-out";
}

namespace detail {

struct Emitter {
  ArtifactSink sink;
  KeyValues base;

  std::string header(const KeyValues& extra = {}) const {
    KeyValues all = base;
    all.insert(all.end(), extra.begin(), extra.end());
    return comment_header(all);
  }

  void pgm(const std::string& name, Graymap g, const KeyValues& extra = {}) {
    KeyValues all = base;
    all.insert(all.end(), extra.begin(), extra.end());
    for (const auto& [k, v] : all) g.comments.push_back(" " + k + "=" + v);
    sink.write(name, write_pgm(g, PgmFormat::raw));
  }
};

inline std::string amplitudes_csv(const AmplitudeTable& t, std::string_view header) {
  std::string out(header);
  out += "l_out,p_out,l_in,p_in,re,im\n";
  const std::size_t m = t.size();
  for (std::size_t o = 0; o < m; ++o)
    for (std::size_t i = 0; i < m; ++i) {
      const ModeIndex a = t.modes[o], b = t.modes[i];
      const Complex v = t.at(o, i);
      out += std::to_string(a.l) + "," + std::to_string(a.p) + "," + std::to_string(b.l) + "," +
             std::to_string(b.p) + "," + format_double(v.real()) + "," + format_double(v.imag()) + "\n";
    }
  return out;
}

inline std::string key_value_csv(const KeyValues& kv, std::string_view header) {
  std::string out(header);
  out += "key,value\n";
  for (const auto& [k, v] : kv) out += k + "," + v + "\n";
  return out;
}

inline const KeyValues kCollapseNote{{"collapse", "summed over p_out and p_ref"}};

inline std::string describe_mi(const JointSpectrum& spec, const ZeroDiagonalOptions& zeroing, KeyValues& kv) {
  const double mi = mutual_information(spec);
  kv.emplace_back("mutual_information_bits", format_double(mi));
  kv.emplace_back("off_diagonal_mass", format_double(off_diagonal_mass(spec)));
  try {
    kv.emplace_back("off_diagonal_mi_bits", format_double(mutual_information(zero_diagonal(spec, zeroing))));
  } catch (const DegenerateDistribution&) {
    kv.emplace_back("off_diagonal_mi_bits", "0");
    kv.emplace_back("off_diagonal", "degenerate");
  }
  return format_double(mi);
}

inline std::vector<CatalogItem> catalog_items(const RunConfig& c) {
  std::vector<std::string> specs = c.items;
  if (specs.empty()) specs = {"star5=star:5", "fan8=fan:8", "disc=disc:1", "annulus=annulus:0.5:1", "empty=empty"};
  const Convention conv = c.invert ? Convention::inverted : Convention::opaque;
  std::vector<CatalogItem> items;
  for (const auto& s : specs) {
    const auto eq = s.find('=');
    CatalogItem item{s.substr(0, eq), std::nullopt, {}};
    const std::string what = s.substr(eq + 1);
    try {
      item.map = what.rfind("pgm:", 0) == 0 ? raster_from_file(what.substr(4), c.pitch, conv) : object_from_text(what, conv);
    } catch (const Error& e) {
      item.load_error = std::string(e.kind()) + ": " + e.what();
    }
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace detail

/// Executes a validated config. Library errors propagate as csi::Error.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& /*err*/ = std::cerr) {
  using namespace detail;
  if (c.command == "shapes" && !has_object(c)) {
    out << "shape descriptors:\n"
           "  disc[:R]  empty  annulus:RI:RO  rect:W:H  star:N[:RO[:RI]]\n"
           "  fan:N[:RIN:ROUT[:DUTY]]  polygon:X,Y;X,Y;...  identity  uniform:V\n";
    return 0;
  }
  KeyValues base{{"csi", c.command}};
  for (auto& kv : describe(c)) base.push_back(kv);
  base.emplace_back("config_hash", config_hash(c));
  base.emplace_back("input_hash", input_hash(c));
  Emitter em{ArtifactSink(output_directory(c), config_hash(c)), base};

  const StudySetup setup = study_setup(c);
  const auto object = [&] { return build_object(c); };
  const auto engine = [&] { return AmplitudeEngine(setup.l_max, setup.p_max, setup.grid, setup.engine); };

  if (c.command == "shapes") {
    const double pitch = 2.0 * c.extent / c.resolution;
    em.pgm("object.pgm", to_graymap(rasterize(object(), c.resolution, c.resolution, pitch)));
  } else if (c.command == "amplitudes") {
    em.sink.write("amplitudes.csv", amplitudes_csv(engine().table(object()), em.header()));
  } else if (c.command == "spectrum" || c.command == "mutual-info") {
    const JointSpectrum spec = joint_spectrum(engine().table(object()), setup.source);
    KeyValues summary;
    const std::string mi = describe_mi(spec, setup.zeroing, summary);
    if (c.command == "spectrum") {
      em.sink.write("spectrum.csv", spectrum_csv(spec, em.header()));
      em.sink.write("spectrum_collapsed.csv", collapsed_csv(collapse(spec), em.header(kCollapseNote)));
      try {
        const JointSpectrum z = zero_diagonal(spec, setup.zeroing);
        em.sink.write("offdiag_spectrum.csv", spectrum_csv(z, em.header()));
        em.sink.write("offdiag_collapsed.csv", collapsed_csv(collapse(z), em.header(kCollapseNote)));
      } catch (const DegenerateDistribution&) {
      }
    }
    em.sink.write("mutual_info.csv", key_value_csv(summary, em.header()));
    for (const auto& [k, v] : summary) out << k << "=" << v << "\n";
  } else if (c.command == "reconstruct") {
    const ReconstructedImage img = reconstruct(engine().table(object()), c.resolution, c.extent, c.threads);
    em.pgm("image.pgm", to_graymap(img));
    em.sink.write("image.csv", image_csv(img, em.header()));
  } else if (c.command == "phase-spectrum") {
    const PhaseSpectrum ps = phase_spectrum(engine().table(object()), c.p_out, c.p_in, c.floor);
    KeyValues extra;
    const int n = c.order ? c.order : shape_order(c);
    if (n > 0) {
      extra.emplace_back("leakage_order", std::to_string(n));
      extra.emplace_back("leakage_max_relative", format_double(rule_leakage(ps, n)));
    }
    em.sink.write("phase.csv", phase_csv(ps, em.header(extra)));
  } else if (c.command == "sweep") {
    SweepConfig sc;
    sc.steps = c.steps;
    sc.step = c.step;
    sc.shrink = c.shrink;
    const SweepResult r = translation_sweep(object(), sc, setup);
    em.sink.write("sweep.csv", sweep_csv(r, em.header()));
    for (const auto& p : r.points)
      out << "d=" << format_double(p.displacement) << " off_diagonal_mi=" << format_double(p.off_diagonal_mi) << "\n";
  } else if (c.command == "rotate-random") {
    RotationTrialConfig rc;
    rc.seed = c.seed;
    rc.trials = c.trials;
    rc.image_resolution = c.resolution;
    rc.image_extent = c.extent;
    const RotationReport rep = rotational_insensitivity(object(), rc, setup);
    em.sink.write("spectrum_fixed.csv", spectrum_csv(rep.fixed_spectrum, em.header()));
    em.sink.write("spectrum_random.csv", spectrum_csv(rep.random_spectrum, em.header()));
    em.sink.write("collapsed_random.csv", collapsed_csv(collapse(rep.random_spectrum), em.header(kCollapseNote)));
    em.pgm("image_fixed.pgm", to_graymap(rep.fixed_image));
    em.pgm("image_random.pgm", to_graymap(rep.random_image));
    const KeyValues report{{"total_variation", format_double(rep.total_variation)},
                           {"zeroed_total_variation", format_double(rep.zeroed_total_variation)},
                           {"fixed_azimuthal_variance", format_double(rep.fixed_azimuthal_variance)},
                           {"random_azimuthal_variance", format_double(rep.random_azimuthal_variance)}};
    em.sink.write("rotation_report.csv", key_value_csv(report, em.header()));
    for (const auto& [k, v] : report) out << k << "=" << v << "\n";
  } else if (c.command == "audit") {
    const int n = c.order ? c.order : shape_order(c);
    const AuditResult a = symmetry_audit(engine().table(object()), n);
    const KeyValues report{{"order", std::to_string(a.order)},
                           {"leakage", format_double(a.leakage)},
                           {"off_diagonal_leakage", format_double(a.off_diagonal_leakage)},
                           {"total", format_double(a.total)},
                           {"off_diagonal_total", format_double(a.off_diagonal_total)}};
    em.sink.write("audit.csv", key_value_csv(report, em.header()));
    for (const auto& [k, v] : report) out << k << "=" << v << "\n";
  } else if (c.command == "catalog") {
    CatalogConfig cc;
    cc.image_resolution = c.resolution;
    cc.image_extent = c.extent;
    const auto bundles = centered_catalog(catalog_items(c), cc, setup);
    std::string summary = em.header() + "name,off_diagonal_mi,error\n";
    for (const auto& b : bundles) {
      if (b.spectrum)
        em.sink.write(b.name + "/spectrum_collapsed.csv", collapsed_csv(collapse(*b.spectrum), em.header(kCollapseNote)));
      if (b.zeroed)
        em.sink.write(b.name + "/offdiag_collapsed.csv", collapsed_csv(collapse(*b.zeroed), em.header(kCollapseNote)));
      if (b.image) em.pgm(b.name + "/image.pgm", to_graymap(*b.image));
      if (b.phase) em.sink.write(b.name + "/phase.csv", phase_csv(*b.phase, em.header()));
      summary += b.name + "," + format_double(b.off_diagonal_mi) + "," + b.error + "\n";
      out << b.name << ": " << (b.error.empty() ? "ok" : b.error) << "\n";
    }
    em.sink.write("catalog.csv", summary);
  } else {
    throw UsageError("unknown command '" + c.command + "'");
  }
  em.sink.finish();
  out << "wrote " << em.sink.size() << " artifacts to " << em.sink.directory().string() << "\n";
  return 0;
}

/// Parse, run and map failures onto exit status and a single stderr line.
inline int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  try {
    c = parse_cli(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const UsageError& e) {
    err << e.kind() << ": " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {  // e.g. unreadable raster while validating
    err << e.kind() << ": " << e.what() << "\n";
    return 2;
  }
  try {
    return run(c, out, err);
  } catch (const UsageError& e) {
    err << e.kind() << ": " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << e.kind() << ": " << msg << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal-error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace csi::cli
