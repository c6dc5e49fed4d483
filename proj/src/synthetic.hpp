#pragma once

#include <cstdint>
#include <vector>

#include "frame_source.hpp"

namespace biotrack {

struct DiskSceneConfig {
  int width = 512;
  int height = 512;
  int disks = 3;
  std::int64_t frames = 200;
  double radius = 8.0;
  double min_speed = 1.0;  // px/frame
  double max_speed = 3.0;
  double noise_sigma = 0.0;  // additive Gaussian noise, unit intensity scale
  std::uint8_t background = 20;
  std::uint8_t foreground = 230;
  double fps = 25.0;
  std::uint64_t seed = 1;
  // Disk centers never come closer than this (default 4 radii).
  double min_separation = 0.0;
};

// Bright disks moving at constant speed and reflecting off the walls. Used as
// a deterministic stand-in for a camera and as ground truth for tests.
class DiskScene final : public FrameProvider {
 public:
  static DiskScene generate(const DiskSceneConfig& config);

  std::int64_t frame_count() const override { return config_.frames; }
  int width() const override { return config_.width; }
  int height() const override { return config_.height; }
  double fps() const override { return config_.fps; }
  Frame read_frame(std::int64_t index) const override;

  Image8 render(std::int64_t index) const;
  const DiskSceneConfig& config() const { return config_; }
  // truth()[disk][frame]
  const std::vector<std::vector<PixelPoint>>& truth() const { return truth_; }

 private:
  explicit DiskScene(DiskSceneConfig config) : config_(config) {}

  DiskSceneConfig config_;
  std::vector<std::vector<PixelPoint>> truth_;
};

}  // namespace biotrack
