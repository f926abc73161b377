#pragma once

// Object transmission functions T(x, y) in the object plane.
//
// A TransmissionMap pairs a source (analytic shape, raster, or uniform value)
// with a pose. Shapes are sampled by exact point-membership tests, so a
// rotated shape is the same shape evaluated at rotated coordinates with no
// resampling.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "csi/error.hpp"
#include "csi/pgm.hpp"

namespace csi {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Applied to shape coordinates as scale, then rotate (counterclockwise), then translate.
struct SceneTransform {
  double rotation = 0.0;
  Point translation{};
  double scale = 1.0;

  /// World point -> shape-local point.
  Point to_local(double x, double y) const {
    double dx = x - translation.x;
    double dy = y - translation.y;
    if (rotation != 0.0) {
      const double c = std::cos(rotation);
      const double s = std::sin(rotation);
      const double rx = c * dx + s * dy;
      const double ry = -s * dx + c * dy;
      dx = rx;
      dy = ry;
    }
    if (scale != 1.0) {
      dx /= scale;
      dy /= scale;
    }
    return {dx, dy};
  }

  Point to_world(Point local) const {
    double x = local.x * scale;
    double y = local.y * scale;
    const double c = std::cos(rotation);
    const double s = std::sin(rotation);
    return {c * x - s * y + translation.x, s * x + c * y + translation.y};
  }
};

inline void validate(const SceneTransform& t) {
  if (!(t.scale > 0.0) || !std::isfinite(t.scale))
    throw InvalidArgument("pose scale must be positive and finite");
  if (!std::isfinite(t.rotation) || !std::isfinite(t.translation.x) ||
      !std::isfinite(t.translation.y))
    throw InvalidArgument("pose must be finite");
}

// ---------------------------------------------------------------------------
// Shape descriptors. Each is centered on its local origin.

struct Disc {
  double radius = 1.0;
};
struct Annulus {
  double r_in = 0.5;
  double r_out = 1.0;
};
struct Rectangle {
  double width = 1.0;
  double height = 1.0;
};
/// N-pointed star; tips at angles 2*pi*k/N, valleys halfway between.
struct Star {
  int points = 5;
  double r_outer = 0.47;
  double r_inner = 0.18;
};
/// N radial bands centered on angles 2*pi*k/N, each spanning duty * 2*pi/N.
struct Fan {
  int bands = 8;
  double r_in = 0.1;
  double r_out = 1.0;
  double duty = 0.5;
};
struct Polygon {
  std::vector<Point> vertices;
};

using ShapeDescriptor = std::variant<Disc, Annulus, Rectangle, Star, Fan, Polygon>;

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

inline bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double v) { return std::isfinite(v); });
}

/// Folds an angle into [0, sector/2] assuming mirror symmetry about every
/// multiple of `sector`. Uses |phi| so mirrored points fold identically.
inline double fold_angle(double phi, double sector) {
  double t = std::fmod(std::fabs(phi), sector);
  if (t > 0.5 * sector) t = sector - t;
  return t;
}

inline bool inside(const Disc& d, double x, double y) { return std::hypot(x, y) < d.radius; }

inline bool inside(const Annulus& a, double x, double y) {
  const double r = std::hypot(x, y);
  return r >= a.r_in && r < a.r_out;
}

inline bool inside(const Rectangle& r, double x, double y) {
  return std::fabs(x) < 0.5 * r.width && std::fabs(y) < 0.5 * r.height;
}

inline bool inside(const Star& s, double x, double y) {
  const double rho = std::hypot(x, y);
  if (rho == 0.0) return true;
  if (rho >= s.r_outer) return false;
  if (rho < s.r_inner) return true;
  const double sector = 2.0 * std::numbers::pi / s.points;
  const double t = fold_angle(std::atan2(y, x), sector);
  const double beta = 0.5 * sector;
  // Inside iff on the origin side of the tip -> valley edge.
  const double ex = s.r_inner * std::cos(beta) - s.r_outer;
  const double ey = s.r_inner * std::sin(beta);
  const double px = rho * std::cos(t) - s.r_outer;
  const double py = rho * std::sin(t);
  return ex * py - ey * px > 0.0;
}

inline bool inside(const Fan& f, double x, double y) {
  const double rho = std::hypot(x, y);
  if (rho < f.r_in || rho >= f.r_out) return false;
  const double sector = 2.0 * std::numbers::pi / f.bands;
  return fold_angle(std::atan2(y, x), sector) < 0.5 * f.duty * sector;
}

inline bool inside(const Polygon& poly, double x, double y) {
  bool in = false;
  const auto& v = poly.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > y) != (v[j].y > y)) {
      const double xc = v[j].x + (y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (x < xc) in = !in;
    }
  }
  return in;
}

inline double bounding_radius(const Disc& d) { return d.radius; }
inline double bounding_radius(const Annulus& a) { return a.r_out; }
inline double bounding_radius(const Rectangle& r) { return std::hypot(0.5 * r.width, 0.5 * r.height); }
inline double bounding_radius(const Star& s) { return s.r_outer; }
inline double bounding_radius(const Fan& f) { return f.r_out; }
inline double bounding_radius(const Polygon& p) {
  double r = 0.0;
  for (const auto& v : p.vertices) r = std::max(r, std::hypot(v.x, v.y));
  return r;
}

}  // namespace detail

inline void validate(const ShapeDescriptor& shape) {
  using detail::finite_all;
  using detail::require;
  std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Disc>) {
          require(finite_all({s.radius}) && s.radius >= 0.0, "disc radius must be >= 0");
        } else if constexpr (std::is_same_v<S, Annulus>) {
          require(finite_all({s.r_in, s.r_out}) && s.r_in >= 0.0 && s.r_in < s.r_out,
                  "annulus needs 0 <= r_in < r_out");
        } else if constexpr (std::is_same_v<S, Rectangle>) {
          require(finite_all({s.width, s.height}) && s.width > 0.0 && s.height > 0.0,
                  "rectangle sides must be positive");
        } else if constexpr (std::is_same_v<S, Star>) {
          require(s.points >= 2, "star needs at least 2 points");
          require(finite_all({s.r_inner, s.r_outer}) && s.r_inner > 0.0 && s.r_inner < s.r_outer,
                  "star needs 0 < r_inner < r_outer");
        } else if constexpr (std::is_same_v<S, Fan>) {
          require(s.bands >= 1, "fan needs at least 1 band");
          require(finite_all({s.r_in, s.r_out, s.duty}) && s.r_in >= 0.0 && s.r_in < s.r_out,
                  "fan needs 0 <= r_in < r_out");
          require(s.duty > 0.0 && s.duty <= 1.0, "fan duty must be in (0, 1]");
        } else {
          require(s.vertices.size() >= 3, "polygon needs at least 3 vertices");
          for (const auto& v : s.vertices)
            require(finite_all({v.x, v.y}), "polygon vertices must be finite");
        }
      },
      shape);
}

// ---------------------------------------------------------------------------

/// Grayscale raster in [0, 1]. `origin` is the local position of the raster
/// center; `pitch` is the pixel size in waist units. Row 0 is the top row.
struct RasterPayload {
  int width = 0;
  int height = 0;
  double pitch = 1.0;
  Point origin{};
  std::vector<double> samples;

  double at(int col, int row) const {
    return samples[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                   static_cast<std::size_t>(col)];
  }
};

inline void validate(const RasterPayload& r) {
  detail::require(r.width > 0 && r.height > 0, "raster dimensions must be positive");
  detail::require(r.pitch > 0.0 && std::isfinite(r.pitch), "raster pitch must be positive");
  detail::require(r.samples.size() ==
                      static_cast<std::size_t>(r.width) * static_cast<std::size_t>(r.height),
                  "raster sample count must equal width * height");
  for (double v : r.samples)
    detail::require(v >= 0.0 && v <= 1.0, "raster samples must lie in [0, 1]");
}

/// How an object's footprint becomes transmission.
/// opaque: the object blocks light and the surround transmits (T = 1 - mask).
/// inverted: the object transmits and the surround is dark (T = mask).
/// For rasters the pixel value v is transmission under `opaque` (dark pixels
/// are the opaque object, so mask = 1 - v) and 1 - v under `inverted`.
enum class Convention { opaque, inverted };

/// Disc outside of which a map is known to equal its background value.
struct SupportDisc {
  Point center{};
  double radius = 0.0;  // negative: no point differs from the background
};

class TransmissionMap {
 public:
  struct Uniform {
    double value = 1.0;
  };
  using Source = std::variant<Uniform, ShapeDescriptor, RasterPayload>;

  /// T identically equal to `value` everywhere.
  static TransmissionMap uniform(double value) {
    detail::require(value >= 0.0 && value <= 1.0, "uniform transmission must lie in [0, 1]");
    return TransmissionMap(Source{Uniform{value}}, Convention::opaque, {});
  }

  static TransmissionMap shape(ShapeDescriptor d, Convention c = Convention::opaque,
                               SceneTransform pose = {}) {
    validate(d);
    validate(pose);
    return TransmissionMap(Source{std::move(d)}, c, pose);
  }

  static TransmissionMap raster(RasterPayload r, Convention c = Convention::opaque,
                                SceneTransform pose = {}) {
    validate(r);
    validate(pose);
    return TransmissionMap(Source{std::move(r)}, c, pose);
  }

  const Source& source() const { return *source_; }
  Convention convention() const { return convention_; }
  const SceneTransform& pose() const { return pose_; }

  bool is_analytic() const { return !std::holds_alternative<RasterPayload>(*source_); }

  TransmissionMap with_pose(const SceneTransform& pose) const {
    validate(pose);
    TransmissionMap m = *this;
    m.pose_ = pose;
    return m;
  }
  TransmissionMap rotated(double angle) const {
    auto p = pose_;
    p.rotation += angle;
    return with_pose(p);
  }
  TransmissionMap translated(double dx, double dy) const {
    auto p = pose_;
    p.translation.x += dx;
    p.translation.y += dy;
    return with_pose(p);
  }
  TransmissionMap scaled(double factor) const {
    auto p = pose_;
    p.scale *= factor;
    return with_pose(p);
  }
  TransmissionMap with_convention(Convention c) const {
    TransmissionMap m = *this;
    m.convention_ = c;
    return m;
  }

  /// T at the world point (x, y), in [0, 1].
  double sample(double x, double y) const {
    if (const auto* u = std::get_if<Uniform>(source_.get())) return u->value;
    const Point q = pose_.to_local(x, y);
    if (const auto* s = std::get_if<ShapeDescriptor>(source_.get())) {
      const bool in = std::visit([&](const auto& shape) { return detail::inside(shape, q.x, q.y); }, *s);
      return (in != (convention_ == Convention::opaque)) ? 1.0 : 0.0;
    }
    const auto& r = std::get<RasterPayload>(*source_);
    const double left = r.origin.x - 0.5 * r.width * r.pitch;
    const double top = r.origin.y + 0.5 * r.height * r.pitch;
    const double fc = std::floor((q.x - left) / r.pitch);
    const double fr = std::floor((top - q.y) / r.pitch);
    if (!(fc >= 0.0 && fc < r.width && fr >= 0.0 && fr < r.height)) return 1.0;
    const double v = r.at(static_cast<int>(fc), static_cast<int>(fr));
    return convention_ == Convention::opaque ? v : 1.0 - v;
  }

  /// Value of T outside the support disc.
  double background() const {
    if (const auto* u = std::get_if<Uniform>(source_.get())) return u->value;
    if (std::holds_alternative<RasterPayload>(*source_)) return 1.0;
    return convention_ == Convention::opaque ? 1.0 : 0.0;
  }

  /// World-space disc containing every point where T may differ from background().
  SupportDisc support() const {
    if (std::holds_alternative<Uniform>(*source_)) return {{}, -1.0};
    Point center{};
    double radius = 0.0;
    if (const auto* s = std::get_if<ShapeDescriptor>(source_.get())) {
      radius = std::visit([](const auto& shape) { return detail::bounding_radius(shape); }, *s);
      if (radius <= 0.0) return {{}, -1.0};
    } else {
      const auto& r = std::get<RasterPayload>(*source_);
      center = r.origin;
      radius = std::hypot(0.5 * r.width * r.pitch, 0.5 * r.height * r.pitch);
    }
    return {pose_.to_world(center), radius * pose_.scale};
  }

 private:
  TransmissionMap(Source src, Convention c, SceneTransform pose)
      : source_(std::make_shared<const Source>(std::move(src))), convention_(c), pose_(pose) {}

  std::shared_ptr<const Source> source_;
  Convention convention_ = Convention::opaque;
  SceneTransform pose_{};
};

inline TransmissionMap make_shape(const ShapeDescriptor& d, Convention c = Convention::opaque) {
  return TransmissionMap::shape(d, c);
}

inline double sample(const TransmissionMap& map, double x, double y) { return map.sample(x, y); }

/// Raster from PGM bytes; pixel values are scaled by maxval into [0, 1].
inline TransmissionMap load_raster(std::string_view bytes, double pitch, Point origin = {},
                                   Convention c = Convention::opaque) {
  const Graymap g = read_pgm(bytes);
  RasterPayload r;
  r.width = g.width;
  r.height = g.height;
  r.pitch = pitch;
  r.origin = origin;
  r.samples.reserve(g.samples.size());
  for (auto s : g.samples) r.samples.push_back(static_cast<double>(s) / g.maxval);
  return TransmissionMap::raster(std::move(r), c);
}

/// Quantizes a raster payload to PGM samples.
inline Graymap to_graymap(const RasterPayload& r, int maxval = 255) {
  Graymap g;
  g.width = r.width;
  g.height = r.height;
  g.maxval = maxval;
  g.samples.reserve(r.samples.size());
  for (double v : r.samples)
    g.samples.push_back(static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * maxval)));
  return g;
}

/// Samples a map at pixel centers of a width x height raster of the given pitch
/// centered on `center`; row 0 is the top row.
inline RasterPayload rasterize(const TransmissionMap& map, int width, int height, double pitch,
                               Point center = {}) {
  RasterPayload r;
  r.width = width;
  r.height = height;
  r.pitch = pitch;
  r.origin = center;
  detail::require(width > 0 && height > 0 && pitch > 0.0, "raster size must be positive");
  r.samples.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int row = 0; row < height; ++row) {
    const double y = center.y + (0.5 * height - row - 0.5) * pitch;
    for (int col = 0; col < width; ++col) {
      const double x = center.x + (col + 0.5 - 0.5 * width) * pitch;
      r.samples[static_cast<std::size_t>(row) * width + col] = map.sample(x, y);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Textual shape descriptors, e.g. "star:5", "fan:8:0.1:1:0.5", "disc:1",
// "polygon:0,0;1,0;0,1".

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto at = s.find(sep, start);
    out.push_back(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

inline double parse_double(std::string_view s, std::string_view context) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != end || !std::isfinite(v))
    throw InvalidArgument("bad number '" + std::string(s) + "' in " + std::string(context));
  return v;
}

inline int parse_int(std::string_view s, std::string_view context) {
  int v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != end)
    throw InvalidArgument("bad integer '" + std::string(s) + "' in " + std::string(context));
  return v;
}

}  // namespace detail

inline ShapeDescriptor parse_shape(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  const std::string_view rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  std::vector<std::string_view> args;
  if (!rest.empty()) args = detail::split(rest, ':');
  auto num = [&](std::size_t i, double def) {
    return i < args.size() ? detail::parse_double(args[i], text) : def;
  };
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi)
      throw InvalidArgument("wrong number of parameters in shape '" + std::string(text) + "'");
  };
  ShapeDescriptor d;
  if (kind == "disc") {
    need(0, 1);
    d = Disc{num(0, 1.0)};
  } else if (kind == "empty") {
    need(0, 0);
    d = Disc{0.0};
  } else if (kind == "annulus") {
    need(2, 2);
    d = Annulus{num(0, 0.0), num(1, 0.0)};
  } else if (kind == "rect" || kind == "rectangle") {
    need(2, 2);
    d = Rectangle{num(0, 0.0), num(1, 0.0)};
  } else if (kind == "star") {
    need(1, 3);
    Star s;
    s.points = detail::parse_int(args[0], text);
    s.r_outer = num(1, s.r_outer);
    s.r_inner = args.size() > 2 ? num(2, 0.0) : s.r_outer * (s.r_inner / Star{}.r_outer);
    d = s;
  } else if (kind == "fan") {
    need(1, 4);
    Fan f;
    f.bands = detail::parse_int(args[0], text);
    f.r_in = num(1, f.r_in);
    f.r_out = num(2, f.r_out);
    f.duty = num(3, f.duty);
    d = f;
  } else if (kind == "polygon") {
    need(1, 1);
    Polygon p;
    for (auto pair : detail::split(args[0], ';')) {
      const auto xy = detail::split(pair, ',');
      if (xy.size() != 2) throw InvalidArgument("polygon vertex must be 'x,y' in '" + std::string(text) + "'");
      p.vertices.push_back({detail::parse_double(xy[0], text), detail::parse_double(xy[1], text)});
    }
    d = std::move(p);
  } else {
    throw InvalidArgument("unknown shape kind '" + std::string(kind) + "'");
  }
  validate(d);
  return d;
}

}  // namespace csi
