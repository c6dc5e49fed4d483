#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace biotrack {
namespace {

constexpr int kMaxPlacementAttempts = 5000;

std::vector<std::vector<PixelPoint>> simulate(const DiskSceneConfig& c, std::mt19937_64& rng) {
  const double lo_x = c.radius + 1.0, hi_x = c.width - c.radius - 2.0;
  const double lo_y = c.radius + 1.0, hi_y = c.height - c.radius - 2.0;
  std::uniform_real_distribution<double> ux(lo_x, hi_x), uy(lo_y, hi_y);
  std::uniform_real_distribution<double> speed(c.min_speed, c.max_speed);
  std::uniform_real_distribution<double> heading(0.0, 2.0 * std::numbers::pi);

  std::vector<std::vector<PixelPoint>> paths(c.disks);
  for (auto& path : paths) {
    double x = ux(rng), y = uy(rng);
    const double s = speed(rng), a = heading(rng);
    double vx = s * std::cos(a), vy = s * std::sin(a);
    path.reserve(static_cast<size_t>(c.frames));
    for (std::int64_t f = 0; f < c.frames; ++f) {
      path.push_back({x, y});
      x += vx;
      y += vy;
      if (x < lo_x) x = 2 * lo_x - x, vx = -vx;
      if (x > hi_x) x = 2 * hi_x - x, vx = -vx;
      if (y < lo_y) y = 2 * lo_y - y, vy = -vy;
      if (y > hi_y) y = 2 * hi_y - y, vy = -vy;
    }
  }
  return paths;
}

bool well_separated(const std::vector<std::vector<PixelPoint>>& paths, double min_sep) {
  for (size_t a = 0; a < paths.size(); ++a) {
    for (size_t b = a + 1; b < paths.size(); ++b) {
      for (size_t f = 0; f < paths[a].size(); ++f) {
        if (std::hypot(paths[a][f].x - paths[b][f].x, paths[a][f].y - paths[b][f].y) < min_sep) {
          return false;
        }
      }
    }
  }
  return true;
}

}  // namespace

DiskScene DiskScene::generate(const DiskSceneConfig& config) {
  if (config.disks < 1) throw Error(ErrorCode::kValidation, "disk count must be >= 1");
  if (config.frames < 1) throw Error(ErrorCode::kValidation, "frame count must be >= 1");
  if (!(config.radius > 0.0)) throw Error(ErrorCode::kValidation, "radius must be positive");
  if (config.width < 2 * config.radius + 4 || config.height < 2 * config.radius + 4) {
    throw Error(ErrorCode::kValidation, "scene too small for the disk radius");
  }
  if (!(config.min_speed >= 0.0) || config.max_speed < config.min_speed) {
    throw Error(ErrorCode::kValidation, "invalid speed range");
  }
  if (!(config.fps > 0.0)) throw Error(ErrorCode::kValidation, "fps must be positive");

  DiskScene scene(config);
  const double min_sep = config.min_separation > 0.0 ? config.min_separation : 4.0 * config.radius;
  std::mt19937_64 rng(config.seed);
  for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
    auto paths = simulate(config, rng);
    if (well_separated(paths, min_sep)) {
      scene.truth_ = std::move(paths);
      return scene;
    }
  }
  throw Error(ErrorCode::kData, "could not place " + std::to_string(config.disks) +
                                    " disks without collisions; use a larger scene or fewer disks");
}

Image8 DiskScene::render(std::int64_t index) const {
  if (index < 0 || index >= config_.frames) {
    throw Error(ErrorCode::kRange, "frame " + std::to_string(index) + " out of range");
  }
  Image8 image(config_.width, config_.height, 1, config_.background);
  const double r2 = config_.radius * config_.radius;
  for (const auto& path : truth_) {
    const PixelPoint c = path[static_cast<size_t>(index)];
    const int x0 = std::max(0, static_cast<int>(std::floor(c.x - config_.radius)));
    const int x1 = std::min(config_.width - 1, static_cast<int>(std::ceil(c.x + config_.radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(c.y - config_.radius)));
    const int y1 = std::min(config_.height - 1, static_cast<int>(std::ceil(c.y + config_.radius)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - c.x, dy = y - c.y;
        if (dx * dx + dy * dy <= r2) *image.pixel(x, y) = config_.foreground;
      }
    }
  }
  if (config_.noise_sigma > 0.0) {
    std::mt19937_64 rng(config_.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(index + 1)));
    std::normal_distribution<double> noise(0.0, config_.noise_sigma * 255.0);
    for (auto& v : image.pixels) {
      v = static_cast<std::uint8_t>(std::clamp(std::lround(v + noise(rng)), 0L, 255L));
    }
  }
  return image;
}

Frame DiskScene::read_frame(std::int64_t index) const {
  Image8 image = render(index);
  Frame frame;
  frame.gray = to_unit_gray(image);
  frame.encoded = encode_png(image);
  return frame;
}

}  // namespace biotrack
