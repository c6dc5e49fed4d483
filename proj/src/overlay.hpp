#pragma once

#include <cstdint>

#include "core.hpp"
#include "track_store.hpp"

namespace biotrack {

struct OverlayStyle {
  double radius_px = 6.0;
  int tail_frames = 25;
  Rgba line_color{0, 0, 0, 255};
};

// Burns the track overlay for `frame` into a copy of `base`. Each visible
// track with a valid point at `frame` gets a tail over the previous
// tail_frames frames (half alpha), a ring in the track color and, when the
// orientation is known, a black line of length 2 * radius through the centre.
// Returns `base` unchanged (same channel count) when nothing is drawn.
Image8 render_overlay(const Image8& base, const TrackStore& store, std::int64_t frame,
                      const OverlayStyle& style = {});

}  // namespace biotrack
