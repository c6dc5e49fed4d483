#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace biotrack {

// Single-channel image with intensities in [0, 1], row-major.
class GrayFrame {
 public:
  GrayFrame() = default;
  GrayFrame(int width, int height, double fill = 0.0);
  GrayFrame(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  double at(int x, int y) const { return data_[static_cast<size_t>(y) * width_ + x]; }
  double& at(int x, int y) { return data_[static_cast<size_t>(y) * width_ + x]; }

  // Border-replicating read.
  double clamped(int x, int y) const;

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool same_shape(const GrayFrame& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const GrayFrame&, const GrayFrame&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// 8-bit interleaved image, 1 (gray) or 3 (RGB) channels.
struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  Image8() = default;
  Image8(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c),
        pixels(static_cast<size_t>(w) * h * c, fill) {}

  std::uint8_t* pixel(int x, int y) {
    return pixels.data() + (static_cast<size_t>(y) * width + x) * channels;
  }
  const std::uint8_t* pixel(int x, int y) const {
    return pixels.data() + (static_cast<size_t>(y) * width + x) * channels;
  }

  friend bool operator==(const Image8&, const Image8&) = default;
};

GrayFrame to_unit_gray(const Image8& raw);
Image8 to_rgb(const Image8& raw);
Image8 to_image8(const GrayFrame& frame);

class FrameIndex {
 public:
  FrameIndex(std::int64_t index, double fps);

  std::int64_t index() const { return index_; }
  double fps() const { return fps_; }
  double timestamp() const { return static_cast<double>(index_) / fps_; }

 private:
  std::int64_t index_;
  double fps_;
};

enum class Unit { kPx, kCm, kMm };

std::string_view unit_name(Unit unit);
Unit parse_unit(std::string_view name);

struct PixelPoint {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
  Unit unit = Unit::kPx;
  friend bool operator==(const WorldPoint&, const WorldPoint&) = default;
};

}  // namespace biotrack
