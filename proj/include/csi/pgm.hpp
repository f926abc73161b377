#pragma once

// Portable graymap (PGM) reader/writer. Both the plain (P2) and raw (P5)
// variants are supported; raw samples above 255 are two bytes, big-endian.
// '#' comments are accepted wherever whitespace is allowed in the header.

#include <cctype>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csi/error.hpp"

namespace csi {

struct Graymap {
  int width = 0;
  int height = 0;
  int maxval = 255;
  std::vector<std::uint16_t> samples;  // row-major, top row first
  std::vector<std::string> comments;   // header comments, without the leading '#'

  std::uint16_t at(int col, int row) const {
    return samples[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                   static_cast<std::size_t>(col)];
  }
};

enum class PgmFormat { plain, raw };

namespace detail {

class PgmCursor {
 public:
  explicit PgmCursor(std::string_view bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ >= bytes_.size(); }

  void skip_space_and_comments(std::vector<std::string>* comments) {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        const std::size_t start = ++pos_;
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
        if (comments) comments->emplace_back(bytes_.substr(start, pos_ - start));
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long read_uint(const char* what, std::vector<std::string>* comments) {
    skip_space_and_comments(comments);
    const std::size_t start = pos_;
    unsigned long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + static_cast<unsigned long>(bytes_[pos_] - '0');
      if (value > 0xFFFFFFFFul) throw ParseError(std::string("PGM ") + what + " too large", start);
      ++pos_;
    }
    if (pos_ == start) {
      if (done()) throw ParseError(std::string("PGM truncated while reading ") + what, pos_);
      throw ParseError(std::string("PGM expected ") + what, pos_);
    }
    return value;
  }

  unsigned char byte() { return static_cast<unsigned char>(bytes_[pos_++]); }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  char peek() const { return bytes_[pos_]; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Graymap read_pgm(std::string_view bytes) {
  detail::PgmCursor cur(bytes);
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
    throw ParseError("PGM magic must be P2 or P5", 0);
  const bool raw = bytes[1] == '5';
  Graymap g;
  {
    // consume the magic
    cur.byte();
    cur.byte();
  }
  if (!cur.done() && !std::isspace(static_cast<unsigned char>(cur.peek())) && cur.peek() != '#')
    throw ParseError("PGM magic must be followed by whitespace", cur.pos());
  cur.skip_space_and_comments(&g.comments);
  const std::size_t w_at = cur.pos();
  const auto w = cur.read_uint("width", &g.comments);
  const auto h = cur.read_uint("height", &g.comments);
  if (w == 0 || h == 0) throw ParseError("PGM has zero dimensions", w_at);
  if (w > 1u << 16 || h > 1u << 16) throw ParseError("PGM dimensions too large", w_at);
  cur.skip_space_and_comments(&g.comments);
  const std::size_t mv_at = cur.pos();
  const auto maxval = cur.read_uint("maxval", &g.comments);
  if (maxval == 0 || maxval > 65535) throw ParseError("PGM maxval must be in 1..65535", mv_at);
  g.width = static_cast<int>(w);
  g.height = static_cast<int>(h);
  g.maxval = static_cast<int>(maxval);
  const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  g.samples.resize(count);

  if (raw) {
    if (cur.done() || !std::isspace(static_cast<unsigned char>(cur.peek())))
      throw ParseError("PGM raw header must end with one whitespace byte", cur.pos());
    cur.byte();
    const std::size_t bps = maxval > 255 ? 2 : 1;
    if (cur.remaining() < count * bps)
      throw ParseError("PGM raw payload truncated", cur.pos() + cur.remaining());
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t at = cur.pos();
      unsigned v = cur.byte();
      if (bps == 2) v = (v << 8) | cur.byte();
      if (v > maxval) throw ParseError("PGM sample exceeds maxval", at);
      g.samples[i] = static_cast<std::uint16_t>(v);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      cur.skip_space_and_comments(nullptr);
      const std::size_t at = cur.pos();
      const auto v = cur.read_uint("sample", nullptr);
      if (v > maxval) throw ParseError("PGM sample exceeds maxval", at);
      g.samples[i] = static_cast<std::uint16_t>(v);
    }
  }
  return g;
}

inline std::string write_pgm(const Graymap& g, PgmFormat format = PgmFormat::raw) {
  if (g.width <= 0 || g.height <= 0) throw InvalidArgument("PGM dimensions must be positive");
  if (g.maxval <= 0 || g.maxval > 65535) throw InvalidArgument("PGM maxval must be in 1..65535");
  if (g.samples.size() != static_cast<std::size_t>(g.width) * static_cast<std::size_t>(g.height))
    throw InvalidArgument("PGM sample count does not match dimensions");
  std::string out = format == PgmFormat::raw ? "P5\n" : "P2\n";
  for (const auto& c : g.comments) {
    if (c.find_first_of("\r\n") != std::string::npos)
      throw InvalidArgument("PGM comment must be a single line");
    out += "#" + c + "\n";
  }
  out += std::to_string(g.width) + " " + std::to_string(g.height) + "\n" +
         std::to_string(g.maxval) + "\n";
  if (format == PgmFormat::raw) {
    const bool wide = g.maxval > 255;
    out.reserve(out.size() + g.samples.size() * (wide ? 2 : 1));
    for (auto s : g.samples) {
      if (s > g.maxval) throw InvalidArgument("PGM sample exceeds maxval");
      if (wide) out.push_back(static_cast<char>(s >> 8));
      out.push_back(static_cast<char>(s & 0xFF));
    }
  } else {
    for (int r = 0; r < g.height; ++r) {
      for (int c = 0; c < g.width; ++c) {
        const auto s = g.at(c, r);
        if (s > g.maxval) throw InvalidArgument("PGM sample exceeds maxval");
        if (c) out.push_back(' ');
        out += std::to_string(s);
      }
      out.push_back('\n');
    }
  }
  return out;
}

}  // namespace csi
