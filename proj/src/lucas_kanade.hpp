#pragma once

#include <memory>
#include <vector>

#include "core.hpp"
#include "tracker.hpp"

namespace biotrack {

struct LkParams {
  int window_half = 7;
  int levels = 3;
  int max_iters = 20;
  double epsilon = 0.01;
  double min_eig = 1e-4;
};

LkParams lk_params_from(const ParamSet& params);

// levels[0] is full resolution; each next level is smoothed with the 5-tap
// binomial kernel (1 4 6 4 1)/16, border replicated, then decimated by 2.
struct Pyramid {
  std::vector<GrayFrame> levels;
};

int max_pyramid_levels(int width, int height);
Pyramid build_pyramid(const GrayFrame& frame, int levels);

// One reduction step: smooth then keep even rows and columns.
GrayFrame pyr_down(const GrayFrame& frame);

// Bilinear read with border replication.
double sample_bilinear(const GrayFrame& image, double x, double y);

enum class PointState { kTracked, kLostFlat, kLostOutOfBounds, kLostDiverged };

const char* point_state_name(PointState state);

struct PointStatus {
  PixelPoint position;
  PointState state = PointState::kTracked;
};

PointStatus track_point(const Pyramid& prev, const Pyramid& next, PixelPoint p, const LkParams& params);

TrackerDescriptor lk_descriptor();
std::unique_ptr<Tracker> make_lk_tracker(ParamSet params);

}  // namespace biotrack
