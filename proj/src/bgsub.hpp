#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "core.hpp"
#include "tracker.hpp"

namespace biotrack {

enum class Polarity { kBoth, kBrighter, kDarker };

struct BgSubParams {
  double alpha = 0.05;
  double threshold = 25.0 / 255.0;
  int erode_iters = 1;
  int dilate_iters = 1;
  std::int64_t min_area_px = 20;
  std::int64_t max_area_px = 0;  // 0: a quarter of the frame area
  double gate_px = 50.0;
  int max_missed = 10;
  int max_entities = 0;  // 0: unlimited
  Polarity polarity = Polarity::kBoth;
};

BgSubParams bgsub_params_from(const ParamSet& params);

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height) : width_(width), height_(height), bits_(static_cast<size_t>(width) * height, 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int x, int y) const { return bits_[static_cast<size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v) { bits_[static_cast<size_t>(y) * width_ + x] = v ? 1 : 0; }
  std::size_t count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

// B' = (1 - alpha) B + alpha I, per pixel.
GrayFrame update_background(const GrayFrame& background, const GrayFrame& image, double alpha);

// 3x3 square structuring element; pixels outside the image count as background.
BinaryMask erode(const BinaryMask& mask);
BinaryMask dilate(const BinaryMask& mask);

// Thresholded difference followed by erode_iters erosions then dilate_iters dilations.
BinaryMask segment_foreground(const GrayFrame& background, const GrayFrame& image, const BgSubParams& params);

struct Blob {
  std::int64_t m00 = 0;
  PixelPoint centroid;
  // Central moments divided by m00.
  double mu20 = 0.0;
  double mu11 = 0.0;
  double mu02 = 0.0;
  double orientation_rad = 0.0;  // (-pi/2, pi/2]
  double semi_major = 0.0;
  double semi_minor = 0.0;
  std::vector<std::int32_t> pixels;  // linear indices y * width + x
};

// Equivalent-ellipse geometry from normalized central moments.
void fit_ellipse(Blob& blob);

// 8-connected components with min_area <= m00 <= max_area, in raster order of
// their first pixel.
std::vector<Blob> extract_blobs(const BinaryMask& mask, std::int64_t min_area, std::int64_t max_area);

struct ActiveTrack {
  TrackId id = 0;
  PixelPoint last;
  int misses = 0;
};

struct Match {
  TrackId track = 0;
  std::size_t detection = 0;
  double distance = 0.0;
};

struct Association {
  std::vector<Match> matches;
  std::vector<std::size_t> births;    // detection indices, ascending
  std::vector<std::size_t> discarded; // detections dropped by max_entities
  std::vector<TrackId> retired;
  std::vector<ActiveTrack> tracks;    // survivors with updated positions and miss counts
};

// Greedy distance-sorted matching within the gate; ties by lower track id then
// lower detection index.
Association associate(const std::vector<ActiveTrack>& tracks, const std::vector<PixelPoint>& detections,
                      double gate_px, int max_missed, int max_entities);

TrackerDescriptor bgsub_descriptor();
std::unique_ptr<Tracker> make_bgsub_tracker(ParamSet params);

}  // namespace biotrack
