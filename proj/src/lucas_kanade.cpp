#include "lucas_kanade.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace biotrack {

LkParams lk_params_from(const ParamSet& params) {
  LkParams p;
  p.window_half = static_cast<int>(params.integer("window_half"));
  p.levels = static_cast<int>(params.integer("levels"));
  p.max_iters = static_cast<int>(params.integer("max_iters"));
  p.epsilon = params.real("epsilon");
  p.min_eig = params.real("min_eig");
  return p;
}

int max_pyramid_levels(int width, int height) {
  int levels = 0;
  while (width >= 1 && height >= 1) {
    ++levels;
    width /= 2;
    height /= 2;
  }
  return levels;
}

GrayFrame pyr_down(const GrayFrame& frame) {
  static constexpr double kKernel[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  const int w = frame.width(), h = frame.height();
  const int ow = w / 2, oh = h / 2;
  if (ow < 1 || oh < 1) throw Error(ErrorCode::kValidation, "frame too small to reduce");

  // Horizontal pass at even columns only, all rows.
  GrayFrame rows(ow, h);
  for (int y = 0; y < h; ++y) {
    for (int ox = 0; ox < ow; ++ox) {
      double acc = 0.0;
      for (int k = -2; k <= 2; ++k) acc += kKernel[k + 2] * frame.clamped(2 * ox + k, y);
      rows.at(ox, y) = acc;
    }
  }
  GrayFrame out(ow, oh);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      double acc = 0.0;
      for (int k = -2; k <= 2; ++k) acc += kKernel[k + 2] * rows.clamped(ox, 2 * oy + k);
      out.at(ox, oy) = acc;
    }
  }
  return out;
}

Pyramid build_pyramid(const GrayFrame& frame, int levels) {
  if (levels < 1) throw Error(ErrorCode::kValidation, "pyramid needs at least one level");
  const int feasible = max_pyramid_levels(frame.width(), frame.height());
  if (levels > feasible) {
    throw Error(ErrorCode::kValidation, "a " + std::to_string(frame.width()) + "x" +
                                            std::to_string(frame.height()) + " frame supports at most " +
                                            std::to_string(feasible) + " pyramid levels, " +
                                            std::to_string(levels) + " requested");
  }
  Pyramid pyr;
  pyr.levels.reserve(levels);
  pyr.levels.push_back(frame);
  for (int l = 1; l < levels; ++l) pyr.levels.push_back(pyr_down(pyr.levels.back()));
  return pyr;
}

double sample_bilinear(const GrayFrame& image, double x, double y) {
  const double fx = std::floor(x), fy = std::floor(y);
  const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
  const double ax = x - fx, ay = y - fy;
  const double top = (1 - ax) * image.clamped(x0, y0) + ax * image.clamped(x0 + 1, y0);
  const double bottom = (1 - ax) * image.clamped(x0, y0 + 1) + ax * image.clamped(x0 + 1, y0 + 1);
  return (1 - ay) * top + ay * bottom;
}

const char* point_state_name(PointState state) {
  switch (state) {
    case PointState::kTracked: return "tracked";
    case PointState::kLostFlat: return "lost_flat";
    case PointState::kLostOutOfBounds: return "lost_out_of_bounds";
    case PointState::kLostDiverged: return "lost_diverged";
  }
  return "unknown";
}

namespace {

bool window_inside(const GrayFrame& image, double x, double y, int half) {
  return x - half >= 0.0 && y - half >= 0.0 && x + half <= image.width() - 1 &&
         y + half <= image.height() - 1;
}

}  // namespace

PointStatus track_point(const Pyramid& prev, const Pyramid& next, PixelPoint p, const LkParams& params) {
  if (prev.levels.size() != next.levels.size() || prev.levels.empty()) {
    throw Error(ErrorCode::kValidation, "pyramids must have the same nonzero depth");
  }
  const int half = params.window_half;
  const double window_area = static_cast<double>((2 * half + 1) * (2 * half + 1));
  if (!window_inside(prev.levels[0], p.x, p.y, half)) {
    return {p, PointState::kLostOutOfBounds};
  }

  const int top = static_cast<int>(prev.levels.size()) - 1;
  double gx = 0.0, gy = 0.0;  // guess carried between levels
  double vx = 0.0, vy = 0.0;
  const int n = 2 * half + 1;
  std::vector<double> ix(n * n), iy(n * n), ip(n * n);

  for (int level = top; level >= 0; --level) {
    const GrayFrame& img_prev = prev.levels[level];
    const GrayFrame& img_next = next.levels[level];
    const double scale = std::ldexp(1.0, -level);
    const double px = p.x * scale, py = p.y * scale;

    double gxx = 0.0, gxy = 0.0, gyy = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const double x = px + (i - half), y = py + (j - half);
        const int k = j * n + i;
        ix[k] = 0.5 * (sample_bilinear(img_prev, x + 1, y) - sample_bilinear(img_prev, x - 1, y));
        iy[k] = 0.5 * (sample_bilinear(img_prev, x, y + 1) - sample_bilinear(img_prev, x, y - 1));
        ip[k] = sample_bilinear(img_prev, x, y);
        gxx += ix[k] * ix[k];
        gxy += ix[k] * iy[k];
        gyy += iy[k] * iy[k];
      }
    }
    const double half_trace = 0.5 * (gxx + gyy);
    const double min_eig =
        half_trace - std::sqrt(0.25 * (gxx - gyy) * (gxx - gyy) + gxy * gxy);
    const double det = gxx * gyy - gxy * gxy;
    if (min_eig / window_area < params.min_eig || det <= 0.0) {
      return {p, PointState::kLostFlat};
    }

    vx = vy = 0.0;
    for (int iter = 0; iter < params.max_iters; ++iter) {
      double bx = 0.0, by = 0.0;
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          const int k = j * n + i;
          const double x = px + (i - half) + gx + vx;
          const double y = py + (j - half) + gy + vy;
          const double delta = ip[k] - sample_bilinear(img_next, x, y);
          bx += delta * ix[k];
          by += delta * iy[k];
        }
      }
      const double ex = (gyy * bx - gxy * by) / det;
      const double ey = (gxx * by - gxy * bx) / det;
      vx += ex;
      vy += ey;
      if (std::hypot(vx, vy) > half) {
        return {p, PointState::kLostDiverged};
      }
      if (std::hypot(ex, ey) < params.epsilon) break;
    }
    if (level > 0) {
      gx = 2.0 * (gx + vx);
      gy = 2.0 * (gy + vy);
    }
  }

  const PixelPoint out{p.x + gx + vx, p.y + gy + vy};
  if (!window_inside(next.levels[0], out.x, out.y, half)) {
    return {out, PointState::kLostOutOfBounds};
  }
  return {out, PointState::kTracked};
}

TrackerDescriptor lk_descriptor() {
  TrackerDescriptor d{"lucas_kanade", "Lucas-Kanade Tracker", {}};
  d.params = {
      {"window_half", ParamKind::kInt, std::int64_t{7}, 1.0, 100.0, false, {}, "window is (2w+1)^2 pixels"},
      {"levels", ParamKind::kInt, std::int64_t{3}, 1.0, 16.0, false, {}, "pyramid levels including full resolution"},
      {"max_iters", ParamKind::kInt, std::int64_t{20}, 1.0, 1000.0, false, {}, "iterations per level"},
      {"epsilon", ParamKind::kReal, 0.01, 0.0, std::nullopt, true, {}, "convergence threshold in pixels"},
      {"min_eig", ParamKind::kReal, 1e-4, 0.0, std::nullopt, true, {}, "minimum eigenvalue of the gradient matrix per window pixel"},
  };
  return d;
}

namespace {

class LkTracker final : public Tracker {
 public:
  explicit LkTracker(ParamSet params)
      : Tracker("lucas_kanade", std::move(params)), config_(lk_params_from(this->params())) {}

  TrackId add_point(PixelPoint p) override {
    const TrackId id = next_id_++;
    points_[id] = {p, have_prev_};
    return id;
  }

 protected:
  FrameResult process(const GrayFrame& frame, const FrameIndex& index) override {
    const int coarsest_w = frame.width() >> (config_.levels - 1);
    const int coarsest_h = frame.height() >> (config_.levels - 1);
    if (coarsest_w < 2 * config_.window_half + 1 || coarsest_h < 2 * config_.window_half + 1) {
      int feasible = 1;
      while (feasible < config_.levels && (frame.width() >> feasible) >= 2 * config_.window_half + 1 &&
             (frame.height() >> feasible) >= 2 * config_.window_half + 1) {
        ++feasible;
      }
      throw Error(ErrorCode::kValidation,
                  "parameter 'levels': coarsest level smaller than the tracking window; at most " +
                      std::to_string(feasible) + " levels fit this frame size");
    }
    Pyramid current = build_pyramid(frame, config_.levels);
    FrameResult result;
    for (auto it = points_.begin(); it != points_.end();) {
      auto& [id, point] = *it;
      Detection d;
      d.frame = index.index();
      if (!point.on_previous) {
        // Designated before any frame: the seed is this frame's position.
        d.centroid = point.position;
        point.on_previous = true;
        result.detections.push_back({id, d});
        ++it;
        continue;
      }
      const PointStatus status = track_point(previous_, current, point.position, config_);
      if (status.state != PointState::kTracked) {
        result.ended.push_back(id);
        it = points_.erase(it);
        continue;
      }
      const double dx = status.position.x - point.position.x;
      const double dy = status.position.y - point.position.y;
      d.centroid = status.position;
      if (std::hypot(dx, dy) > 0.5) d.orientation_rad = std::atan2(dy, dx);
      point.position = status.position;
      result.detections.push_back({id, d});
      ++it;
    }
    previous_ = std::move(current);
    have_prev_ = true;
    return result;
  }

 private:
  struct LivePoint {
    PixelPoint position;
    bool on_previous = false;  // position refers to the stored previous frame
  };

  LkParams config_;
  Pyramid previous_;
  bool have_prev_ = false;
  std::map<TrackId, LivePoint> points_;
  TrackId next_id_ = 1;
};

}  // namespace

std::unique_ptr<Tracker> make_lk_tracker(ParamSet params) {
  return std::make_unique<LkTracker>(std::move(params));
}

}  // namespace biotrack
