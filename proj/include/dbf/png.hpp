#pragma once

#include <cstring>
#include <string>
#include <vector>

#include "dbf/image.hpp"

#if defined(DBF_WITH_PNG) && DBF_WITH_PNG
#include <png.h>
#endif

namespace dbf {

inline bool has_png_signature(const std::vector<unsigned char>& bytes) noexcept {
  static constexpr unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), sig, 8) == 0;
}

inline constexpr bool png_supported() noexcept {
#if defined(DBF_WITH_PNG) && DBF_WITH_PNG
  return true;
#else
  return false;
#endif
}

/// Decode an 8-bit PNG. Colour images become the plain average (R + G + B) / 3;
/// alpha is dropped. 16-bit files are reduced to 8 bits by libpng.
inline GrayImage decode_png(const std::vector<unsigned char>& bytes,
                            const std::string& origin = "<memory>") {
#if defined(DBF_WITH_PNG) && DBF_WITH_PNG
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw FormatError(origin + ": malformed PNG: " + image.message);
  }
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string why = image.message;
    png_image_free(&image);
    throw FormatError(origin + ": malformed PNG: " + why);
  }
  const std::size_t count = static_cast<std::size_t>(image.width) * image.height;
  std::vector<double> px(count);
  for (std::size_t i = 0; i < count; ++i) {
    px[i] = gray ? buffer[i]
                 : (buffer[3 * i] + buffer[3 * i + 1] + buffer[3 * i + 2]) / 3.0;
  }
  return GrayImage(static_cast<int>(image.width), static_cast<int>(image.height),
                   std::move(px));
#else
  (void)bytes;
  throw FormatError(origin + ": PNG input is not enabled in this build");
#endif
}

}  // namespace dbf
