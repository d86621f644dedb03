#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace litho {

/// Side length of every normalized frame.
inline constexpr int kFrameSize = 256;

/// Frame rate of every normalized stream, in Hz.
inline constexpr double kStreamFps = 8.0;

using Rgb = std::array<std::uint8_t, 3>;

/// Interleaved 8-bit RGB raster, row-major.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, Rgb fill = {0, 0, 0});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }

  Rgb at(int x, int y) const noexcept {
    const auto* p = &pixels_[offset(x, y)];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) noexcept {
    auto* p = &pixels_[offset(x, y)];
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }

  std::span<std::uint8_t> bytes() noexcept { return pixels_; }
  std::span<const std::uint8_t> bytes() const noexcept { return pixels_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Binary stone mask: 1 = stone, 0 = anything else.
class StoneMask {
 public:
  StoneMask() = default;
  StoneMask(int width, int height, bool fill = false);

  static StoneMask full(int width, int height) {
    return StoneMask(width, height, true);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return bits_.size(); }

  bool at(int x, int y) const noexcept {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  void set(int x, int y, bool v) noexcept {
    bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0;
  }

  /// Raw 0/1 bytes, row-major.
  std::span<std::uint8_t> bits() noexcept { return bits_; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  std::size_t count() const noexcept;
  /// Fraction of 1-pixels over the whole raster; 0 for a degenerate mask.
  double coverage() const noexcept;
  bool same_shape(const StoneMask& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const StoneMask&, const StoneMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Per-pixel stone probabilities in [0, 1].
class SoftMask {
 public:
  SoftMask() = default;
  SoftMask(int width, int height, double fill = 0.0);
  /// Throws ParamOutOfRange when a value falls outside [0, 1].
  SoftMask(int width, int height, std::vector<double> values);
  static SoftMask from_mask(const StoneMask& mask);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  void set(std::size_t i, double v);

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

/// A normalized video frame together with its position in the 8 Hz stream.
struct FrameGrid {
  RgbImage image;
  std::int64_t stream_index = 0;
  double timestamp = 0.0;

  int width() const noexcept { return image.width(); }
  int height() const noexcept { return image.height(); }
};

inline double stream_timestamp(std::int64_t stream_index) {
  return static_cast<double>(stream_index) / kStreamFps;
}

}  // namespace litho
