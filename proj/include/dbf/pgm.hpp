#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "dbf/image.hpp"
#include "dbf/png.hpp"

namespace dbf {

namespace detail {

// Cursor over the PNM header: whitespace and '#' comments separate tokens.
class PnmHeaderReader {
 public:
  PnmHeaderReader(const std::vector<unsigned char>& bytes, std::string origin)
      : bytes_(bytes), origin_(std::move(origin)) {}

  unsigned read_uint(const char* field) {
    skip_separators();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      fail(std::string("expected ") + field);
    }
    std::uint64_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_++] - '0');
      if (value > 0xFFFFFFFFu) fail(std::string(field) + " out of range");
    }
    return static_cast<unsigned>(value);
  }

  // After maxval exactly one whitespace byte precedes the raster.
  void skip_single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      fail("missing whitespace after maxval");
    }
    ++pos_;
  }

  std::size_t position() const noexcept { return pos_; }
  void seek(std::size_t pos) noexcept { pos_ = pos; }

  [[noreturn]] void fail(const std::string& why) const {
    throw FormatError(origin_ + ": malformed PGM: " + why);
  }

 private:
  void skip_separators() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::string origin_;
  std::size_t pos_ = 0;
};

inline std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read error on " + path.string());
  return bytes;
}

}  // namespace detail

/// Decode an in-memory PGM (P2 ASCII or P5 binary, maxval <= 255).
/// Samples are rescaled to 0..255 when maxval is below 255.
inline GrayImage decode_pgm(const std::vector<unsigned char>& bytes,
                            const std::string& origin = "<memory>") {
  detail::PnmHeaderReader reader(bytes, origin);
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    reader.fail("magic number is not P2 or P5");
  }
  const bool binary = bytes[1] == '5';
  reader.seek(2);
  const unsigned width = reader.read_uint("width");
  const unsigned height = reader.read_uint("height");
  const unsigned maxval = reader.read_uint("maxval");
  if (width == 0 || height == 0) reader.fail("zero dimension");
  if (width > (1u << 16) || height > (1u << 16)) reader.fail("dimensions too large");
  if (maxval == 0) reader.fail("maxval is zero");
  if (maxval > 255) {
    throw FormatError(origin + ": unsupported bit depth (maxval " +
                      std::to_string(maxval) + " > 255)");
  }

  const std::size_t count = static_cast<std::size_t>(width) * height;
  std::vector<double> pixels(count);
  if (binary) {
    reader.skip_single_whitespace();
    const std::size_t start = reader.position();
    if (bytes.size() - start < count) {
      reader.fail("truncated raster (" + std::to_string(bytes.size() - start) +
                  " of " + std::to_string(count) + " bytes)");
    }
    for (std::size_t i = 0; i < count; ++i) {
      if (bytes[start + i] > maxval) reader.fail("sample exceeds maxval");
      pixels[i] = bytes[start + i];
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const unsigned v = reader.read_uint("sample");
      if (v > maxval) reader.fail("sample exceeds maxval");
      pixels[i] = v;
    }
  }
  if (maxval != 255) {
    const double scale = 255.0 / maxval;
    for (double& v : pixels) v *= scale;
  }
  return GrayImage(static_cast<int>(width), static_cast<int>(height),
                   std::move(pixels));
}

/// PGM, or PNG when the build has PNG support.
inline GrayImage load_image(const std::filesystem::path& path) {
  const auto bytes = detail::read_all(path);
  if (has_png_signature(bytes)) return decode_png(bytes, path.string());
  return decode_pgm(bytes, path.string());
}

/// Round half up, then clamp to 0..255.
inline std::uint8_t to_byte(double v) noexcept {
  const double r = std::floor(v + 0.5);
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

/// Encode as binary P5: "P5\n<w> <h>\n255\n" followed by w*h bytes.
inline std::vector<unsigned char> encode_pgm(const GrayImage& img) {
  const std::string header = "P5\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(header.size() + img.size());
  for (double v : img.pixels()) out.push_back(to_byte(v));
  return out;
}

inline void save_image(const GrayImage& img, const std::filesystem::path& path) {
  const auto bytes = encode_pgm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write error on " + path.string());
}

/// Image as it would read back after save_image.
inline GrayImage round_clamp(const GrayImage& img) {
  std::vector<double> px(img.size());
  std::transform(img.pixels().begin(), img.pixels().end(), px.begin(),
                 [](double v) { return static_cast<double>(to_byte(v)); });
  return GrayImage(img.width(), img.height(), std::move(px));
}

}  // namespace dbf
