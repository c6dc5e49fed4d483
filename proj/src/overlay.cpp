#include "overlay.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace biotrack {
namespace {

void blend(Image8& img, int x, int y, const Rgba& c, int alpha) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  std::uint8_t* p = img.pixel(x, y);
  const std::uint8_t rgb[3] = {c.r, c.g, c.b};
  for (int k = 0; k < 3; ++k) {
    p[k] = static_cast<std::uint8_t>((rgb[k] * alpha + p[k] * (255 - alpha) + 127) / 255);
  }
}

// Stamps each pixel once so overlapping samples do not compound alpha.
class Stamp {
 public:
  explicit Stamp(const Image8& img) : w_(img.width), h_(img.height), hit_(static_cast<size_t>(w_) * h_, 0) {}
  bool take(int x, int y) {
    if (x < 0 || y < 0 || x >= w_ || y >= h_) return false;
    auto& h = hit_[static_cast<size_t>(y) * w_ + x];
    if (h) return false;
    h = 1;
    return true;
  }

 private:
  int w_, h_;
  std::vector<std::uint8_t> hit_;
};

void segment(Image8& img, Stamp& stamp, double x0, double y0, double x1, double y1, const Rgba& c, int alpha) {
  const double len = std::hypot(x1 - x0, y1 - y0);
  const int steps = std::max(1, static_cast<int>(std::ceil(len * 4)));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    const int x = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
    const int y = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
    if (stamp.take(x, y)) blend(img, x, y, c, alpha);
  }
}

void ring(Image8& img, double cx, double cy, double r, const Rgba& c) {
  const int x0 = static_cast<int>(std::floor(cx - r - 1)), x1 = static_cast<int>(std::ceil(cx + r + 1));
  const int y0 = static_cast<int>(std::floor(cy - r - 1)), y1 = static_cast<int>(std::ceil(cy + r + 1));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (std::abs(std::hypot(x - cx, y - cy) - r) <= 0.75) blend(img, x, y, c, c.a);
    }
  }
}

}  // namespace

Image8 render_overlay(const Image8& base, const TrackStore& store, std::int64_t frame, const OverlayStyle& style) {
  std::vector<const Trajectory*> drawn;
  for (const auto& [_, t] : store.tracks()) {
    auto it = t.points.find(frame);
    if (t.visible && it != t.points.end() && it->second.valid) drawn.push_back(&t);
  }
  if (drawn.empty()) return base;

  Image8 out = to_rgb(base);
  for (const Trajectory* t : drawn) {
    Stamp stamp(out);
    const PixelPoint* prev = nullptr;
    for (auto it = t->points.lower_bound(frame - style.tail_frames); it != t->points.end() && it->first <= frame; ++it) {
      if (!it->second.valid) continue;
      if (prev) segment(out, stamp, prev->x, prev->y, it->second.pos_px.x, it->second.pos_px.y, t->color, t->color.a / 2);
      prev = &it->second.pos_px;
    }
  }
  for (const Trajectory* t : drawn) {
    const TrackPoint& p = t->points.at(frame);
    ring(out, p.pos_px.x, p.pos_px.y, style.radius_px, t->color);
    if (p.orientation_rad) {
      const double dx = std::cos(*p.orientation_rad) * style.radius_px;
      const double dy = std::sin(*p.orientation_rad) * style.radius_px;
      Stamp stamp(out);
      segment(out, stamp, p.pos_px.x - dx, p.pos_px.y - dy, p.pos_px.x + dx, p.pos_px.y + dy, style.line_color,
              style.line_color.a);
    }
  }
  return out;
}

}  // namespace biotrack
