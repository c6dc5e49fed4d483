#include "track_store.hpp"

#include <algorithm>

namespace biotrack {
namespace {

constexpr Rgba kPalette[12] = {
    {0, 200, 0, 255},   {230, 25, 75, 255},  {0, 130, 200, 255}, {255, 225, 25, 255},
    {245, 130, 48, 255}, {145, 30, 180, 255}, {70, 240, 240, 255}, {240, 50, 230, 255},
    {210, 245, 60, 255}, {0, 128, 128, 255},  {170, 110, 40, 255}, {128, 0, 0, 255},
};

TrackPoint& find_point(TrackStore& store, TrackId track, std::int64_t frame) {
  Trajectory& t = store.track(track);
  auto it = t.points.find(frame);
  if (it == t.points.end()) {
    throw Error(ErrorCode::kNotFound,
                "track " + std::to_string(track) + " has no point at frame " + std::to_string(frame));
  }
  return it->second;
}

void check_range(std::int64_t from, std::int64_t to) {
  if (from > to) {
    throw Error(ErrorCode::kValidation, "frame range " + std::to_string(from) + ".." +
                                            std::to_string(to) + " is inverted");
  }
}

struct EditApplier {
  TrackStore& store;

  EditCommand operator()(const AddPoint& c) {
    if (c.track == 0) throw Error(ErrorCode::kValidation, "track ids start at 1");
    if (c.frame < 0) throw Error(ErrorCode::kValidation, "frame must be nonnegative");
    const bool created = !store.has_track(c.track);
    if (!created && store.track(c.track).points.count(c.frame) != 0) {
      throw Error(ErrorCode::kValidation, "track " + std::to_string(c.track) + " already has a point at frame " +
                                              std::to_string(c.frame));
    }
    Trajectory& t = store.ensure_track(c.track);
    TrackPoint p;
    p.frame = c.frame;
    p.pos_px = c.pos;
    p.source = PointSource::kManual;
    t.points.emplace(c.frame, p);
    if (created) return DeleteTrack{c.track};
    return DeletePoint{c.track, c.frame};
  }

  EditCommand operator()(const MovePoint& c) {
    TrackPoint& p = find_point(store, c.track, c.frame);
    RestorePoints inverse{c.track, {{c.frame, p}}};
    p.pos_px = c.pos;
    p.source = PointSource::kManual;
    p.pos_world.reset();
    return inverse;
  }

  EditCommand operator()(const DeletePoint& c) {
    TrackPoint& p = find_point(store, c.track, c.frame);
    RestorePoints inverse{c.track, {{c.frame, p}}};
    store.track(c.track).points.erase(c.frame);
    return inverse;
  }

  EditCommand operator()(const DeleteTrack& c) {
    RestoreTrack inverse{store.track(c.track)};
    store.erase_track(c.track);
    return inverse;
  }

  EditCommand operator()(const SwapIds& c) {
    if (c.a == c.b) throw Error(ErrorCode::kValidation, "swap of a track with itself is a no-op");
    Trajectory& a = store.track(c.a);
    Trajectory& b = store.track(c.b);
    std::map<std::int64_t, TrackPoint> moved_a, moved_b;
    for (auto it = a.points.lower_bound(c.from_frame); it != a.points.end();) {
      moved_a.insert(a.points.extract(it++));
    }
    for (auto it = b.points.lower_bound(c.from_frame); it != b.points.end();) {
      moved_b.insert(b.points.extract(it++));
    }
    a.points.merge(moved_b);
    b.points.merge(moved_a);
    return c;
  }

  EditCommand operator()(const Annotate& c) {
    check_range(c.from_frame, c.to_frame);
    Trajectory& t = store.track(c.track);
    RestorePoints inverse{c.track, {}};
    for (auto it = t.points.lower_bound(c.from_frame); it != t.points.end() && it->first <= c.to_frame; ++it) {
      inverse.entries.emplace_back(it->first, it->second);
    }
    if (inverse.entries.empty()) {
      throw Error(ErrorCode::kNotFound, "track " + std::to_string(c.track) + " has no points in frames " +
                                            std::to_string(c.from_frame) + ".." + std::to_string(c.to_frame));
    }
    for (const auto& [frame, _] : inverse.entries) {
      auto& annotation = t.points.at(frame).annotation;
      if (c.text.empty()) annotation.reset(); else annotation = c.text;
    }
    return inverse;
  }

  EditCommand operator()(const InterpolateGap& c) {
    check_range(c.from_frame, c.to_frame);
    Trajectory& t = store.track(c.track);
    auto a = t.points.find(c.from_frame);
    auto b = t.points.find(c.to_frame);
    if (a == t.points.end() || b == t.points.end()) {
      throw Error(ErrorCode::kValidation, "interpolation needs points at both endpoints " +
                                              std::to_string(c.from_frame) + " and " + std::to_string(c.to_frame));
    }
    const PixelPoint p0 = a->second.pos_px, p1 = b->second.pos_px;
    const double span = static_cast<double>(c.to_frame - c.from_frame);
    RestorePoints inverse{c.track, {}};
    for (std::int64_t f = c.from_frame + 1; f < c.to_frame; ++f) {
      if (t.points.count(f) != 0) continue;
      const double s = static_cast<double>(f - c.from_frame) / span;
      TrackPoint p;
      p.frame = f;
      p.pos_px = {p0.x + s * (p1.x - p0.x), p0.y + s * (p1.y - p0.y)};
      p.source = PointSource::kInterpolated;
      t.points.emplace(f, p);
      inverse.entries.emplace_back(f, std::nullopt);
    }
    return inverse;
  }

  EditCommand operator()(const RestorePoints& c) {
    Trajectory& t = store.track(c.track);
    RestorePoints inverse{c.track, {}};
    for (const auto& [frame, point] : c.entries) {
      if (point && point->frame != frame) throw Error(ErrorCode::kValidation, "restore entry frame mismatch");
    }
    for (const auto& [frame, point] : c.entries) {
      auto it = t.points.find(frame);
      inverse.entries.emplace_back(frame, it == t.points.end() ? std::nullopt : std::optional<TrackPoint>(it->second));
      if (point) t.points.insert_or_assign(frame, *point); else t.points.erase(frame);
    }
    return inverse;
  }

  EditCommand operator()(const RestoreTrack& c) {
    if (c.track.id == 0) throw Error(ErrorCode::kValidation, "track ids start at 1");
    EditCommand inverse = store.has_track(c.track.id) ? EditCommand(RestoreTrack{store.track(c.track.id)})
                                                      : EditCommand(DeleteTrack{c.track.id});
    store.insert_track(c.track);
    return inverse;
  }
};

std::array<double, 2> json_pair(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::kParse, "expected a [x, y] pair");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

std::string_view source_name(PointSource source) {
  switch (source) {
    case PointSource::kDetected: return "detected";
    case PointSource::kManual: return "manual";
    case PointSource::kInterpolated: return "interpolated";
  }
  return "detected";
}

PointSource parse_source(std::string_view name) {
  if (name == "detected") return PointSource::kDetected;
  if (name == "manual") return PointSource::kManual;
  if (name == "interpolated") return PointSource::kInterpolated;
  throw Error(ErrorCode::kParse, "unknown point source '" + std::string(name) + "'");
}

Rgba default_track_color(TrackId id) { return kPalette[(id + 11) % 12]; }

void TrackStore::set_fps(double fps) {
  if (!(fps > 0.0)) throw Error(ErrorCode::kValidation, "fps must be positive");
  fps_ = fps;
}

const Trajectory& TrackStore::track(TrackId id) const {
  auto it = tracks_.find(id);
  if (it == tracks_.end()) throw Error(ErrorCode::kNotFound, "no track " + std::to_string(id));
  return it->second;
}

Trajectory& TrackStore::track(TrackId id) {
  auto it = tracks_.find(id);
  if (it == tracks_.end()) throw Error(ErrorCode::kNotFound, "no track " + std::to_string(id));
  return it->second;
}

TrackId TrackStore::allocate_id() {
  while (tracks_.count(next_id_) != 0) ++next_id_;
  return next_id_++;
}

Trajectory& TrackStore::ensure_track(TrackId id) {
  auto it = tracks_.find(id);
  if (it != tracks_.end()) return it->second;
  Trajectory t;
  t.id = id;
  t.color = default_track_color(id);
  next_id_ = std::max(next_id_, id + 1);
  return tracks_.emplace(id, std::move(t)).first->second;
}

void TrackStore::insert_track(Trajectory track) {
  next_id_ = std::max(next_id_, track.id + 1);
  tracks_.insert_or_assign(track.id, std::move(track));
}

void TrackStore::erase_track(TrackId id) {
  if (tracks_.erase(id) == 0) throw Error(ErrorCode::kNotFound, "no track " + std::to_string(id));
}

std::size_t TrackStore::point_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : tracks_) n += t.points.size();
  return n;
}

EditCommand apply_edit(TrackStore& store, const EditCommand& cmd) {
  // Each branch validates before it mutates.
  return std::visit(EditApplier{store}, cmd);
}

nlohmann::json point_to_json(const TrackPoint& p) {
  nlohmann::json j = {{"frame", p.frame}, {"x_px", p.pos_px.x}, {"y_px", p.pos_px.y},
                      {"source", source_name(p.source)}, {"valid", p.valid}};
  if (p.pos_world) {
    j["x_world"] = p.pos_world->x;
    j["y_world"] = p.pos_world->y;
  }
  if (p.orientation_rad) j["orientation_rad"] = *p.orientation_rad;
  if (p.annotation) j["annotation"] = *p.annotation;
  return j;
}

TrackPoint point_from_json(const nlohmann::json& j, Unit unit) {
  TrackPoint p;
  p.frame = j.at("frame").get<std::int64_t>();
  p.pos_px = {j.at("x_px").get<double>(), j.at("y_px").get<double>()};
  if (j.contains("x_world") != j.contains("y_world")) {
    throw Error(ErrorCode::kParse, "x_world and y_world must appear together");
  }
  if (j.contains("x_world")) p.pos_world = WorldPoint{j.at("x_world").get<double>(), j.at("y_world").get<double>(), unit};
  if (j.contains("orientation_rad")) p.orientation_rad = j.at("orientation_rad").get<double>();
  p.source = parse_source(j.value("source", std::string("detected")));
  p.valid = j.value("valid", true);
  if (j.contains("annotation")) {
    auto text = j.at("annotation").get<std::string>();
    if (!text.empty()) p.annotation = std::move(text);
  }
  return p;
}

nlohmann::json trajectory_to_json(const Trajectory& t) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& [_, p] : t.points) points.push_back(point_to_json(p));
  return {{"id", t.id},
          {"color", {t.color.r, t.color.g, t.color.b, t.color.a}},
          {"visible", t.visible},
          {"ended", t.ended},
          {"points", std::move(points)}};
}

Trajectory trajectory_from_json(const nlohmann::json& j, Unit unit) {
  Trajectory t;
  t.id = j.at("id").get<TrackId>();
  if (t.id == 0) throw Error(ErrorCode::kParse, "track ids start at 1");
  if (j.contains("color")) {
    const auto c = j.at("color").get<std::vector<int>>();
    if (c.size() != 4) throw Error(ErrorCode::kParse, "color must be [r, g, b, a]");
    for (int v : c) {
      if (v < 0 || v > 255) throw Error(ErrorCode::kParse, "color channel out of range");
    }
    t.color = {static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]),
               static_cast<std::uint8_t>(c[2]), static_cast<std::uint8_t>(c[3])};
  } else {
    t.color = default_track_color(t.id);
  }
  t.visible = j.value("visible", true);
  t.ended = j.value("ended", false);
  for (const auto& pj : j.at("points")) {
    TrackPoint p = point_from_json(pj, unit);
    if (!t.points.emplace(p.frame, p).second) {
      throw Error(ErrorCode::kParse, "track " + std::to_string(t.id) + " has two points at frame " +
                                         std::to_string(p.frame));
    }
  }
  return t;
}

nlohmann::json edit_to_json(const EditCommand& cmd) {
  struct Visitor {
    nlohmann::json operator()(const AddPoint& c) const {
      return {{"op", "add_point"}, {"track", c.track}, {"frame", c.frame}, {"pos", {c.pos.x, c.pos.y}}};
    }
    nlohmann::json operator()(const MovePoint& c) const {
      return {{"op", "move_point"}, {"track", c.track}, {"frame", c.frame}, {"pos", {c.pos.x, c.pos.y}}};
    }
    nlohmann::json operator()(const DeletePoint& c) const {
      return {{"op", "delete_point"}, {"track", c.track}, {"frame", c.frame}};
    }
    nlohmann::json operator()(const DeleteTrack& c) const { return {{"op", "delete_track"}, {"track", c.track}}; }
    nlohmann::json operator()(const SwapIds& c) const {
      return {{"op", "swap_ids"}, {"a", c.a}, {"b", c.b}, {"from_frame", c.from_frame}};
    }
    nlohmann::json operator()(const Annotate& c) const {
      return {{"op", "annotate"}, {"track", c.track}, {"from_frame", c.from_frame},
              {"to_frame", c.to_frame}, {"text", c.text}};
    }
    nlohmann::json operator()(const InterpolateGap& c) const {
      return {{"op", "interpolate_gap"}, {"track", c.track}, {"from_frame", c.from_frame}, {"to_frame", c.to_frame}};
    }
    nlohmann::json operator()(const RestorePoints& c) const {
      nlohmann::json entries = nlohmann::json::array();
      for (const auto& [frame, point] : c.entries) {
        entries.push_back({{"frame", frame}, {"point", point ? point_to_json(*point) : nlohmann::json(nullptr)}});
      }
      nlohmann::json j = {{"op", "restore_points"}, {"track", c.track}, {"entries", std::move(entries)}};
      for (const auto& [_, point] : c.entries) {
        if (point && point->pos_world) j["unit"] = unit_name(point->pos_world->unit);
      }
      return j;
    }
    nlohmann::json operator()(const RestoreTrack& c) const {
      nlohmann::json j = {{"op", "restore_track"}, {"track", trajectory_to_json(c.track)}};
      // world coordinates carry the store unit, which the point objects omit
      for (const auto& [_, p] : c.track.points) {
        if (p.pos_world) j["unit"] = unit_name(p.pos_world->unit);
      }
      return j;
    }
  };
  return std::visit(Visitor{}, cmd);
}

EditCommand edit_from_json(const nlohmann::json& j) {
  try {
    const std::string op = j.at("op").get<std::string>();
    auto pos = [&] {
      const auto xy = json_pair(j.at("pos"));
      return PixelPoint{xy[0], xy[1]};
    };
    if (op == "add_point") return AddPoint{j.at("track").get<TrackId>(), j.at("frame").get<std::int64_t>(), pos()};
    if (op == "move_point") return MovePoint{j.at("track").get<TrackId>(), j.at("frame").get<std::int64_t>(), pos()};
    if (op == "delete_point") return DeletePoint{j.at("track").get<TrackId>(), j.at("frame").get<std::int64_t>()};
    if (op == "delete_track") return DeleteTrack{j.at("track").get<TrackId>()};
    if (op == "swap_ids") {
      return SwapIds{j.at("a").get<TrackId>(), j.at("b").get<TrackId>(), j.value("from_frame", std::int64_t{0})};
    }
    if (op == "annotate") {
      return Annotate{j.at("track").get<TrackId>(), j.at("from_frame").get<std::int64_t>(),
                      j.at("to_frame").get<std::int64_t>(), j.at("text").get<std::string>()};
    }
    if (op == "interpolate_gap") {
      return InterpolateGap{j.at("track").get<TrackId>(), j.at("from_frame").get<std::int64_t>(),
                            j.at("to_frame").get<std::int64_t>()};
    }
    // World coordinates in restore payloads carry no unit of their own; the
    // caller's store unit is reattached on apply via the point's tag.
    if (op == "restore_points") {
      RestorePoints c{j.at("track").get<TrackId>(), {}};
      for (const auto& e : j.at("entries")) {
        const auto frame = e.at("frame").get<std::int64_t>();
        if (e.at("point").is_null()) {
          c.entries.emplace_back(frame, std::nullopt);
        } else {
          c.entries.emplace_back(frame, point_from_json(e.at("point"), parse_unit(j.value("unit", std::string("px")))));
        }
      }
      return c;
    }
    if (op == "restore_track") {
      return RestoreTrack{trajectory_from_json(j.at("track"), parse_unit(j.value("unit", std::string("px"))))};
    }
    throw Error(ErrorCode::kValidation, "unknown edit op '" + op + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed edit command: ") + e.what());
  }
}

void apply_rectification(TrackStore& store, const Homography& h) {
  store.set_unit(h.unit());
  for (const auto& [id, _] : store.tracks()) {
    for (auto& [frame, p] : store.track(id).points) {
      try {
        p.pos_world = apply(h, p.pos_px);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerate) throw;
        p.pos_world.reset();
        p.valid = false;
      }
    }
  }
}

void record_detection(TrackStore& store, TrackId id, const Detection& detection) {
  Trajectory& t = store.ensure_track(id);
  auto it = t.points.find(detection.frame);
  if (it != t.points.end() && it->second.source == PointSource::kManual) return;
  TrackPoint p;
  p.frame = detection.frame;
  p.pos_px = detection.centroid;
  p.orientation_rad = detection.orientation_rad;
  p.source = PointSource::kDetected;
  t.points.insert_or_assign(detection.frame, p);
}

}  // namespace biotrack
