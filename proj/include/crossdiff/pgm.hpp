#ifndef CROSSDIFF_PGM_HPP
#define CROSSDIFF_PGM_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "crossdiff/csv.hpp"
#include "crossdiff/field.hpp"

namespace crossdiff::pgm {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

namespace detail {

inline void skip_space_and_comments(std::istream& is) {
  for (;;) {
    const int c = is.peek();
    if (c == '#') {
      std::string line;
      std::getline(is, line);
    } else if (c != EOF && std::isspace(c)) {
      is.get();
    } else {
      return;
    }
  }
}

inline int read_header_int(std::istream& is, const std::string& what) {
  skip_space_and_comments(is);
  int value = -1;
  if (!(is >> value) || value <= 0) throw Error(ErrorCode::Io, "bad PGM " + what);
  return value;
}

}  // namespace detail

/// Binary greymap (P5) with maxval <= 255.
inline Image read(std::istream& is) {
  char magic[2] = {};
  if (!is.read(magic, 2) || magic[0] != 'P' || magic[1] != '5') {
    throw Error(ErrorCode::Io, "not a binary PGM (P5) stream");
  }
  Image img;
  img.width = detail::read_header_int(is, "width");
  img.height = detail::read_header_int(is, "height");
  const int maxval = detail::read_header_int(is, "maxval");
  if (maxval > 255) throw Error(ErrorCode::Io, "only 8-bit PGM is supported");
  if (!std::isspace(is.get())) throw Error(ErrorCode::Io, "malformed PGM header");
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  if (!is.read(reinterpret_cast<char*>(img.pixels.data()),
               static_cast<std::streamsize>(img.pixels.size()))) {
    throw Error(ErrorCode::Io, "truncated PGM raster");
  }
  return img;
}

inline Image read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return read(is);
}

inline void write(std::ostream& os, const Image& img) {
  os << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.pixels.data()),
           static_cast<std::streamsize>(img.pixels.size()));
}

inline void write_file(const std::string& path, const Image& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  write(os, img);
  if (!os) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

inline ScalarField to_field(const Image& img, double h = 1.0) {
  std::vector<double> values(img.pixels.begin(), img.pixels.end());
  return ScalarField(make_grid(img.width, img.height, h), std::move(values));
}

enum class Rescale {
  None,       // values used as grey levels directly
  MinMax,     // [min, max] -> [0, 255]
  Symmetric,  // [-A, A] -> [0, 255], A = max |x|
};

/// byte = round_half_even((x - offset) * scale), clamped to [0, 255].
struct Quantization {
  Rescale mode = Rescale::None;
  double offset = 0.0;
  double scale = 1.0;
};

inline Quantization plan_quantization(const ScalarField& f, Rescale mode) {
  Quantization q{mode, 0.0, 1.0};
  const auto [lo, hi] = std::minmax_element(f.values().begin(), f.values().end());
  if (mode == Rescale::MinMax) {
    q.offset = *lo;
    q.scale = *hi > *lo ? 255.0 / (*hi - *lo) : 1.0;
  } else if (mode == Rescale::Symmetric) {
    const double a = std::max(std::abs(*lo), std::abs(*hi));
    q.offset = a > 0.0 ? -a : -127.5;
    q.scale = a > 0.0 ? 255.0 / (2.0 * a) : 1.0;
  }
  return q;
}

inline Image quantize(const ScalarField& f, const Quantization& q) {
  Image img{f.width(), f.height(), std::vector<std::uint8_t>(f.size())};
  for (std::size_t k = 0; k < f.size(); ++k) {
    // nearbyint honours the default round-to-nearest-even mode.
    const double x = std::nearbyint((f[k] - q.offset) * q.scale);
    img.pixels[k] = static_cast<std::uint8_t>(std::clamp(x, 0.0, 255.0));
  }
  return img;
}

inline std::string_view to_string(Rescale r) {
  switch (r) {
    case Rescale::None: return "none";
    case Rescale::MinMax: return "minmax";
    case Rescale::Symmetric: return "symmetric";
  }
  return "?";
}

/// Writes `path` and a `path.rescale` sidecar holding the mapping used.
inline void write_field(const std::string& path, const ScalarField& f, Rescale mode) {
  const Quantization q = plan_quantization(f, mode);
  write_file(path, quantize(f, q));
  std::ofstream side(path + ".rescale");
  if (!side) throw Error(ErrorCode::Io, "cannot write '" + path + ".rescale'");
  side << "mode=" << to_string(q.mode) << "\noffset=" << csv::format(q.offset)
       << "\nscale=" << csv::format(q.scale) << "\n";
}

}  // namespace crossdiff::pgm

#endif  // CROSSDIFF_PGM_HPP
