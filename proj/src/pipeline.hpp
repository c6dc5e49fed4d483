#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "analysis.hpp"
#include "frame_source.hpp"
#include "serialization.hpp"
#include "synthetic.hpp"
#include "track_store.hpp"
#include "tracker.hpp"

namespace biotrack {

// Tracker name plus parameter overrides. The optional "points" entry
// ([[x, y], ...]) is not a tracker parameter: the points are designated
// through add_point before the first frame.
struct TrackerConfig {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
  std::vector<PixelPoint> points;
};

TrackerConfig tracker_config(const std::string& name, nlohmann::json params);

// Feeds frames to one tracker and records its output in a store. Tracker ids
// are mapped onto fresh store ids so runs never clobber existing tracks.
class TrackingRun {
 public:
  TrackingRun(const TrackerConfig& config, TrackStore& store);

  // Returns the number of detections recorded.
  std::size_t step(const FrameProvider& source, std::int64_t index, TrackStore& store);
  TrackId add_point(PixelPoint p, TrackStore& store);
  const Tracker& tracker() const { return *tracker_; }

 private:
  TrackId store_id(TrackId tracker_id, TrackStore& store);

  std::unique_ptr<Tracker> tracker_;
  std::map<TrackId, TrackId> ids_;
};

using ProgressFn = std::function<void(std::int64_t frame, std::size_t detections)>;

TrackStore track_sequence(const FrameProvider& source, const TrackerConfig& config, const ProgressFn& progress = {});

inline const std::string kOverlayPattern = "frame_{NNNNN}.png";

// One overlay PNG per source frame.
std::size_t render_sequence(const FrameProvider& source, const TrackStore& store, const std::filesystem::path& out_dir,
                            const std::string& pattern = kOverlayPattern);

// Frames as frame_NNNNN.png plus truth.csv in the track CSV schema (disk i
// is track i + 1).
DiskScene write_disk_scene(const DiskSceneConfig& config, const std::filesystem::path& out_dir);
TrackStore truth_store(const DiskScene& scene);

struct AnalyzeOptions {
  std::optional<ColumnMapping> mapping;
  AnalysisConfig config;
  SliceFilter slice;  // rect.world is decided from the loaded store
  std::optional<double> fps;
};

std::vector<PairSummary> analyze_file(const std::filesystem::path& in, const AnalyzeOptions& options,
                                      const std::filesystem::path& out_dir);

void rectify_file(const std::filesystem::path& tracks, const std::filesystem::path& calibration,
                  const std::filesystem::path& out);

}  // namespace biotrack
