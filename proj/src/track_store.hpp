#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "core.hpp"
#include "rectification.hpp"
#include "tracker.hpp"

namespace biotrack {

enum class PointSource : std::uint8_t { kDetected = 0, kManual = 1, kInterpolated = 2 };

std::string_view source_name(PointSource source);
PointSource parse_source(std::string_view name);

struct TrackPoint {
  std::int64_t frame = 0;
  PixelPoint pos_px;
  std::optional<WorldPoint> pos_world;
  std::optional<double> orientation_rad;
  PointSource source = PointSource::kDetected;
  bool valid = true;
  std::optional<std::string> annotation;  // never an empty string

  friend bool operator==(const TrackPoint&, const TrackPoint&) = default;
};

struct Rgba {
  std::uint8_t r = 0, g = 0, b = 0, a = 255;
  friend bool operator==(const Rgba&, const Rgba&) = default;
};

// Fixed 12-color palette indexed by (id - 1) mod 12; track 1 is green.
Rgba default_track_color(TrackId id);

struct Trajectory {
  TrackId id = 0;
  std::map<std::int64_t, TrackPoint> points;
  Rgba color;
  bool visible = true;
  bool ended = false;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

class TrackStore {
 public:
  TrackStore() = default;
  explicit TrackStore(double fps, Unit unit = Unit::kPx) : unit_(unit) { set_fps(fps); }

  double fps() const { return fps_; }
  void set_fps(double fps);
  Unit unit() const { return unit_; }
  void set_unit(Unit unit) { unit_ = unit; }

  const std::map<TrackId, Trajectory>& tracks() const { return tracks_; }
  bool has_track(TrackId id) const { return tracks_.count(id) != 0; }
  const Trajectory& track(TrackId id) const;
  Trajectory& track(TrackId id);

  // Fresh id, never handed out before in this store's lifetime.
  TrackId allocate_id();
  // Existing track, or a new one with the default color.
  Trajectory& ensure_track(TrackId id);
  void insert_track(Trajectory track);
  void erase_track(TrackId id);

  std::size_t point_count() const;

  // Equality covers fps, unit and tracks; id allocation state is bookkeeping.
  friend bool operator==(const TrackStore& a, const TrackStore& b) {
    return a.fps_ == b.fps_ && a.unit_ == b.unit_ && a.tracks_ == b.tracks_;
  }

 private:
  double fps_ = 25.0;
  Unit unit_ = Unit::kPx;
  std::map<TrackId, Trajectory> tracks_;
  TrackId next_id_ = 1;
};

// User edit verbs, plus the two restore forms that only appear as inverses.
struct AddPoint { TrackId track; std::int64_t frame; PixelPoint pos; };
struct MovePoint { TrackId track; std::int64_t frame; PixelPoint pos; };
struct DeletePoint { TrackId track; std::int64_t frame; };
struct DeleteTrack { TrackId track; };
struct SwapIds { TrackId a; TrackId b; std::int64_t from_frame; };
struct Annotate { TrackId track; std::int64_t from_frame; std::int64_t to_frame; std::string text; };
struct InterpolateGap { TrackId track; std::int64_t from_frame; std::int64_t to_frame; };
// Sets (point present) or removes (absent) the listed frames of a track.
struct RestorePoints { TrackId track; std::vector<std::pair<std::int64_t, std::optional<TrackPoint>>> entries; };
struct RestoreTrack { Trajectory track; };

using EditCommand = std::variant<AddPoint, MovePoint, DeletePoint, DeleteTrack, SwapIds, Annotate,
                                 InterpolateGap, RestorePoints, RestoreTrack>;

// Applies `cmd` and returns the command that undoes it. On error the store is
// left unchanged.
EditCommand apply_edit(TrackStore& store, const EditCommand& cmd);

nlohmann::json edit_to_json(const EditCommand& cmd);
EditCommand edit_from_json(const nlohmann::json& j);

nlohmann::json point_to_json(const TrackPoint& point);
TrackPoint point_from_json(const nlohmann::json& j, Unit unit);
nlohmann::json trajectory_to_json(const Trajectory& track);
Trajectory trajectory_from_json(const nlohmann::json& j, Unit unit);

// Fills pos_world for every point; points mapping to infinity become invalid
// with no world position.
void apply_rectification(TrackStore& store, const Homography& h);

// Appends tracker output as detected points. Existing manual points win.
void record_detection(TrackStore& store, TrackId id, const Detection& detection);

}  // namespace biotrack
