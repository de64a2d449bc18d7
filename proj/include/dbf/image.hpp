#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dbf {

/// Raised when a file cannot be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a file is readable but its contents are not a valid image.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major 2-D array. Rows are indexed by m (y, top to bottom) and columns
/// by n (x, left to right).
template <typename T>
class Raster {
 public:
  Raster() = default;

  Raster(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    check_dims(width, height);
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  Raster(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * height) {
      throw std::invalid_argument("raster: pixel count does not match " +
                                  std::to_string(width) + "x" +
                                  std::to_string(height));
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  const T& operator()(int m, int n) const noexcept {
    return data_[static_cast<std::size_t>(m) * width_ + n];
  }
  T& operator()(int m, int n) noexcept {
    return data_[static_cast<std::size_t>(m) * width_ + n];
  }

  std::span<const T> pixels() const noexcept { return data_; }
  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> row(int m) const noexcept {
    return std::span<const T>(data_).subspan(
        static_cast<std::size_t>(m) * width_, width_);
  }
  std::span<T> row(int m) noexcept {
    return std::span<T>(data_).subspan(static_cast<std::size_t>(m) * width_,
                                       width_);
  }

  bool same_shape(const Raster& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  static void check_dims(int width, int height) {
    if (width <= 0 || height <= 0) {
      throw std::invalid_argument("raster: dimensions must be positive, got " +
                                  std::to_string(width) + "x" +
                                  std::to_string(height));
    }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Real-valued scalar field (gradients, tensor components, angles).
using Plane = Raster<double>;

/// Grayscale image with real intensities. Nominal range is 0..255 but values
/// are never clamped; noisy and filtered images routinely leave that range.
/// Every intensity is finite.
class GrayImage : public Raster<double> {
 public:
  GrayImage() = default;

  GrayImage(int width, int height, double fill = 0.0)
      : Raster<double>(width, height, fill) {
    if (!std::isfinite(fill)) throw std::invalid_argument("image: non-finite fill");
  }

  GrayImage(int width, int height, std::vector<double> pixels)
      : Raster<double>(width, height, std::move(pixels)) {
    require_finite();
  }

  explicit GrayImage(Plane plane) : Raster<double>(std::move(plane)) {
    require_finite();
  }

  const Plane& plane() const noexcept { return *this; }

 private:
  void require_finite() const {
    for (double v : pixels()) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("image: intensities must be finite");
      }
    }
  }
};

template <typename T>
void require_same_shape(const Raster<T>& a, const Raster<T>& b,
                        const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(
        std::string(what) + ": dimension mismatch (" +
        std::to_string(a.width()) + "x" + std::to_string(a.height()) + " vs " +
        std::to_string(b.width()) + "x" + std::to_string(b.height()) + ")");
  }
}

/// Exact 90-degree counter-clockwise raster rotation: output(m, n) =
/// input(n, W-1-m), output has swapped dimensions.
template <typename T>
Raster<T> rotate90(const Raster<T>& in) {
  Raster<T> out(in.height(), in.width());
  for (int m = 0; m < out.height(); ++m) {
    for (int n = 0; n < out.width(); ++n) {
      out(m, n) = in(n, in.width() - 1 - m);
    }
  }
  return out;
}

inline GrayImage rotate90(const GrayImage& in) {
  return GrayImage(rotate90(in.plane()));
}

template <typename T>
Raster<T> transpose(const Raster<T>& in) {
  Raster<T> out(in.height(), in.width());
  for (int m = 0; m < in.height(); ++m) {
    for (int n = 0; n < in.width(); ++n) out(n, m) = in(m, n);
  }
  return out;
}

inline GrayImage transpose(const GrayImage& in) {
  return GrayImage(transpose(in.plane()));
}

}  // namespace dbf
