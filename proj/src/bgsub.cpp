#include "bgsub.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>

namespace biotrack {

BgSubParams bgsub_params_from(const ParamSet& params) {
  BgSubParams p;
  p.alpha = params.real("alpha");
  p.threshold = params.real("threshold");
  p.erode_iters = static_cast<int>(params.integer("erode_iters"));
  p.dilate_iters = static_cast<int>(params.integer("dilate_iters"));
  p.min_area_px = params.integer("min_area_px");
  p.max_area_px = params.integer("max_area_px");
  p.gate_px = params.real("gate_px");
  p.max_missed = static_cast<int>(params.integer("max_missed"));
  p.max_entities = static_cast<int>(params.integer("max_entities"));
  const std::string& polarity = params.choice("polarity");
  p.polarity = polarity == "brighter" ? Polarity::kBrighter
             : polarity == "darker"   ? Polarity::kDarker
                                      : Polarity::kBoth;
  if (p.max_area_px != 0 && p.max_area_px < p.min_area_px) {
    throw Error(ErrorCode::kValidation, "parameter 'max_area_px' must be >= min_area_px");
  }
  return p;
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

GrayFrame update_background(const GrayFrame& background, const GrayFrame& image, double alpha) {
  if (!background.same_shape(image)) {
    throw Error(ErrorCode::kValidation, "background and frame dimensions differ");
  }
  GrayFrame out = background;
  auto dst = out.data();
  auto src = image.data();
  for (size_t i = 0; i < dst.size(); ++i) dst[i] = (1.0 - alpha) * dst[i] + alpha * src[i];
  return out;
}

BinaryMask erode(const BinaryMask& mask) {
  BinaryMask out(mask.width(), mask.height());
  for (int y = 1; y + 1 < mask.height(); ++y) {
    for (int x = 1; x + 1 < mask.width(); ++x) {
      bool all = true;
      for (int dy = -1; dy <= 1 && all; ++dy) {
        for (int dx = -1; dx <= 1 && all; ++dx) all = mask.at(x + dx, y + dy);
      }
      out.set(x, y, all);
    }
  }
  return out;
}

BinaryMask dilate(const BinaryMask& mask) {
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx >= 0 && ny >= 0 && nx < mask.width() && ny < mask.height()) out.set(nx, ny, true);
        }
      }
    }
  }
  return out;
}

BinaryMask segment_foreground(const GrayFrame& background, const GrayFrame& image, const BgSubParams& params) {
  if (!background.same_shape(image)) {
    throw Error(ErrorCode::kValidation, "background and frame dimensions differ");
  }
  BinaryMask mask(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const double diff = image.at(x, y) - background.at(x, y);
      const double signal = params.polarity == Polarity::kBrighter ? diff
                          : params.polarity == Polarity::kDarker   ? -diff
                                                                   : std::abs(diff);
      mask.set(x, y, signal >= params.threshold);
    }
  }
  for (int i = 0; i < params.erode_iters; ++i) mask = erode(mask);
  for (int i = 0; i < params.dilate_iters; ++i) mask = dilate(mask);
  return mask;
}

void fit_ellipse(Blob& blob) {
  const double half_trace = 0.5 * (blob.mu20 + blob.mu02);
  const double diff = blob.mu20 - blob.mu02;
  const double root = 0.5 * std::sqrt(4.0 * blob.mu11 * blob.mu11 + diff * diff);
  const double lambda_major = half_trace + root;
  const double lambda_minor = std::max(0.0, half_trace - root);
  double theta = 0.5 * std::atan2(2.0 * blob.mu11, diff);
  if (theta <= -std::numbers::pi / 2) theta += std::numbers::pi;
  blob.orientation_rad = theta;
  blob.semi_major = 2.0 * std::sqrt(lambda_major);
  blob.semi_minor = 2.0 * std::sqrt(lambda_minor);
}

std::vector<Blob> extract_blobs(const BinaryMask& mask, std::int64_t min_area, std::int64_t max_area) {
  const int w = mask.width(), h = mask.height();
  std::vector<std::uint8_t> seen(static_cast<size_t>(w) * h, 0);
  std::vector<Blob> blobs;
  std::vector<std::int32_t> stack;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const auto start = static_cast<std::int32_t>(y0 * w + x0);
      if (seen[start] || !mask.at(x0, y0)) continue;
      Blob blob;
      seen[start] = 1;
      stack.assign(1, start);
      while (!stack.empty()) {
        const std::int32_t idx = stack.back();
        stack.pop_back();
        blob.pixels.push_back(idx);
        const int x = idx % w, y = idx / w;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const auto n = static_cast<std::int32_t>(ny * w + nx);
            if (!seen[n] && mask.at(nx, ny)) {
              seen[n] = 1;
              stack.push_back(n);
            }
          }
        }
      }
      const auto area = static_cast<std::int64_t>(blob.pixels.size());
      if (area < min_area || area > max_area) continue;

      // Raw moments in exact integer arithmetic; central moments from
      // m00*m20 - m10^2 etc. so only the final division rounds.
      __int128 m10 = 0, m01 = 0, m20 = 0, m11 = 0, m02 = 0;
      for (const std::int32_t idx : blob.pixels) {
        const __int128 x = idx % w, y = idx / w;
        m10 += x;
        m01 += y;
        m20 += x * x;
        m11 += x * y;
        m02 += y * y;
      }
      const __int128 m00 = area;
      const double m00_sq = static_cast<double>(m00 * m00);
      blob.m00 = area;
      blob.centroid = {static_cast<double>(m10) / static_cast<double>(m00),
                       static_cast<double>(m01) / static_cast<double>(m00)};
      blob.mu20 = static_cast<double>(m00 * m20 - m10 * m10) / m00_sq;
      blob.mu11 = static_cast<double>(m00 * m11 - m10 * m01) / m00_sq;
      blob.mu02 = static_cast<double>(m00 * m02 - m01 * m01) / m00_sq;
      std::sort(blob.pixels.begin(), blob.pixels.end());
      fit_ellipse(blob);
      blobs.push_back(std::move(blob));
    }
  }
  return blobs;
}

Association associate(const std::vector<ActiveTrack>& tracks, const std::vector<PixelPoint>& detections,
                      double gate_px, int max_missed, int max_entities) {
  std::vector<Match> candidates;
  for (const auto& t : tracks) {
    for (size_t d = 0; d < detections.size(); ++d) {
      const double dist = std::hypot(detections[d].x - t.last.x, detections[d].y - t.last.y);
      if (dist <= gate_px) candidates.push_back({t.id, d, dist});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Match& a, const Match& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.track != b.track) return a.track < b.track;
    return a.detection < b.detection;
  });

  Association out;
  std::vector<bool> det_used(detections.size(), false);
  std::vector<TrackId> track_used;
  for (const auto& c : candidates) {
    if (det_used[c.detection] ||
        std::find(track_used.begin(), track_used.end(), c.track) != track_used.end()) {
      continue;
    }
    det_used[c.detection] = true;
    track_used.push_back(c.track);
    out.matches.push_back(c);
  }

  for (const auto& t : tracks) {
    ActiveTrack next = t;
    auto m = std::find_if(out.matches.begin(), out.matches.end(),
                          [&](const Match& mm) { return mm.track == t.id; });
    if (m != out.matches.end()) {
      next.last = detections[m->detection];
      next.misses = 0;
    } else if (++next.misses > max_missed) {
      out.retired.push_back(t.id);
      continue;
    }
    out.tracks.push_back(next);
  }

  std::vector<std::size_t> unmatched;
  for (size_t d = 0; d < detections.size(); ++d) {
    if (!det_used[d]) unmatched.push_back(d);
  }
  if (max_entities > 0) {
    const auto live = static_cast<std::ptrdiff_t>(out.tracks.size());
    const std::ptrdiff_t capacity = std::max<std::ptrdiff_t>(0, max_entities - live);
    if (static_cast<std::ptrdiff_t>(unmatched.size()) > capacity) {
      // Keep the candidates nearest to an existing track; the farthest go first.
      auto nearest = [&](std::size_t d) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& t : tracks) {
          best = std::min(best, std::hypot(detections[d].x - t.last.x, detections[d].y - t.last.y));
        }
        return best;
      };
      std::stable_sort(unmatched.begin(), unmatched.end(),
                       [&](std::size_t a, std::size_t b) { return nearest(a) < nearest(b); });
      out.discarded.assign(unmatched.begin() + capacity, unmatched.end());
      unmatched.resize(static_cast<size_t>(capacity));
      std::sort(unmatched.begin(), unmatched.end());
      std::sort(out.discarded.begin(), out.discarded.end());
    }
  }
  out.births = std::move(unmatched);
  return out;
}

TrackerDescriptor bgsub_descriptor() {
  TrackerDescriptor d{"bgsub", "Background Subtraction Tracker", {}};
  d.params = {
      {"alpha", ParamKind::kReal, 0.05, 0.0, 1.0, true, {}, "weight of the new frame in the running background"},
      {"threshold", ParamKind::kReal, 25.0 / 255.0, 0.0, 1.0, true, {}, "binarization threshold on |frame - background|"},
      {"erode_iters", ParamKind::kInt, std::int64_t{1}, 0.0, 100.0, false, {}, "3x3 erosions after binarization"},
      {"dilate_iters", ParamKind::kInt, std::int64_t{1}, 0.0, 100.0, false, {}, "3x3 dilations after erosion"},
      {"min_area_px", ParamKind::kInt, std::int64_t{20}, 1.0, std::nullopt, false, {}, "smallest blob area kept"},
      {"max_area_px", ParamKind::kInt, std::int64_t{0}, 0.0, std::nullopt, false, {}, "largest blob area kept; 0 = frame area / 4"},
      {"gate_px", ParamKind::kReal, 50.0, 0.0, std::nullopt, true, {}, "maximum match distance between frames"},
      {"max_missed", ParamKind::kInt, std::int64_t{10}, 0.0, std::nullopt, false, {}, "frames a track may go undetected before it ends"},
      {"max_entities", ParamKind::kInt, std::int64_t{0}, 0.0, std::nullopt, false, {}, "maximum simultaneous tracks; 0 = unlimited"},
      {"polarity", ParamKind::kEnum, std::string("both"), std::nullopt, std::nullopt, false,
       {"both", "brighter", "darker"}, "which sign of frame - background counts as foreground"},
  };
  return d;
}

namespace {

class BgSubTracker final : public Tracker {
 public:
  explicit BgSubTracker(ParamSet params)
      : Tracker("bgsub", std::move(params)), config_(bgsub_params_from(this->params())) {}

 protected:
  FrameResult process(const GrayFrame& frame, const FrameIndex& index) override {
    FrameResult result;
    if (background_.empty()) {
      background_ = frame;
      return result;
    }
    if (!background_.same_shape(frame)) {
      throw Error(ErrorCode::kValidation, "frame dimensions changed mid-sequence");
    }
    const std::int64_t max_area = config_.max_area_px > 0
                                      ? config_.max_area_px
                                      : static_cast<std::int64_t>(frame.width()) * frame.height() / 4;
    const BinaryMask mask = segment_foreground(background_, frame, config_);
    const std::vector<Blob> blobs = extract_blobs(mask, config_.min_area_px, std::max(max_area, config_.min_area_px));

    std::vector<PixelPoint> centroids;
    centroids.reserve(blobs.size());
    for (const auto& b : blobs) centroids.push_back(b.centroid);
    Association assoc = associate(tracks_, centroids, config_.gate_px, config_.max_missed, config_.max_entities);

    auto emit = [&](TrackId id, const Blob& b) {
      Detection d;
      d.frame = index.index();
      d.centroid = b.centroid;
      d.orientation_rad = b.orientation_rad;
      d.semi_major_px = b.semi_major;
      d.semi_minor_px = b.semi_minor;
      d.area_px = static_cast<double>(b.m00);
      result.detections.push_back({id, d});
    };
    for (const auto& m : assoc.matches) emit(m.track, blobs[m.detection]);
    tracks_ = std::move(assoc.tracks);
    for (const std::size_t d : assoc.births) {
      const TrackId id = next_id_++;
      tracks_.push_back({id, centroids[d], 0});
      emit(id, blobs[d]);
    }
    std::sort(result.detections.begin(), result.detections.end(),
              [](const TrackedDetection& a, const TrackedDetection& b) { return a.id < b.id; });
    result.ended = std::move(assoc.retired);

    background_ = update_background(background_, frame, config_.alpha);
    return result;
  }

 private:
  BgSubParams config_;
  GrayFrame background_;
  std::vector<ActiveTrack> tracks_;
  TrackId next_id_ = 1;
};

}  // namespace

std::unique_ptr<Tracker> make_bgsub_tracker(ParamSet params) {
  return std::make_unique<BgSubTracker>(std::move(params));
}

}  // namespace biotrack
