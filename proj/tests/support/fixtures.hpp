// Test fixtures: scratch directories and random stores / edit commands.
#pragma once

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "track_store.hpp"

namespace fixture {

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "bt") {
    std::string tmpl = (std::filesystem::temp_directory_path() / (tag + "_XXXXXX")).string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// A value whose "%.9g" rendering parses back to itself.
inline double nine_digits(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

inline std::string random_text(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces = {"a", "b", "rest", ",", "\"", "\"\"", " ", "\n", "\r\n", "é", "ü",
                                                  "😀", "x,y", "'", ";", "\t", "0", "-1.5"};
  std::uniform_int_distribution<int> len(1, 6), pick(0, static_cast<int>(pieces.size()) - 1);
  std::string s;
  for (int i = len(rng); i > 0; --i) s += pieces[pick(rng)];
  return s;
}

// Stores whose every field survives all three formats. With csv_safe the
// display attributes keep their defaults and no track is empty, since the
// CSV schema carries neither.
inline biotrack::TrackStore random_store(std::mt19937_64& rng, int max_tracks, int max_points, bool csv_safe,
                                         std::int64_t max_frame = 20000) {
  using namespace biotrack;
  std::uniform_int_distribution<int> unit_pick(0, 2), ntracks(0, max_tracks), npoints(csv_safe ? 1 : 0, max_points);
  std::uniform_real_distribution<double> coord(-50.0, 700.0), angle(-3.14159, 3.14159), fps_d(1.0, 120.0);
  std::bernoulli_distribution coin(0.5), rare(0.15);
  std::uniform_int_distribution<std::int64_t> frame(0, max_frame);
  std::uniform_int_distribution<int> byte(0, 255), src(0, 2);

  const Unit unit = static_cast<Unit>(unit_pick(rng));
  TrackStore store(nine_digits(fps_d(rng)), unit);
  const int n = ntracks(rng);
  TrackId id = 0;
  std::uniform_int_distribution<TrackId> step(1, 5);
  for (int i = 0; i < n; ++i) {
    id += step(rng);
    Trajectory& t = store.ensure_track(id);
    if (!csv_safe) {
      t.color = {static_cast<std::uint8_t>(byte(rng)), static_cast<std::uint8_t>(byte(rng)),
                 static_cast<std::uint8_t>(byte(rng)), static_cast<std::uint8_t>(byte(rng))};
      t.visible = coin(rng);
      t.ended = coin(rng);
    }
    const int m = npoints(rng);
    for (int k = 0; k < m; ++k) {
      TrackPoint p;
      p.frame = frame(rng);
      p.pos_px = {nine_digits(coord(rng)), nine_digits(coord(rng))};
      if (coin(rng)) p.pos_world = WorldPoint{nine_digits(coord(rng) / 7), nine_digits(coord(rng) / 7), unit};
      if (coin(rng)) p.orientation_rad = nine_digits(angle(rng));
      p.source = static_cast<PointSource>(src(rng));
      p.valid = !rare(rng);
      if (rare(rng)) p.annotation = random_text(rng);
      t.points.emplace(p.frame, p);
    }
  }
  return store;
}

// What a CSV round trip can preserve: display attributes reset, empty
// tracks gone.
inline biotrack::TrackStore csv_normalized(const biotrack::TrackStore& store) {
  biotrack::TrackStore out(store.fps(), store.unit());
  for (const auto& [id, t] : store.tracks()) {
    if (t.points.empty()) continue;
    biotrack::Trajectory& u = out.ensure_track(id);
    u.points = t.points;
  }
  return out;
}

// A command that is valid for `store` as it stands.
inline biotrack::EditCommand random_edit(std::mt19937_64& rng, const biotrack::TrackStore& store) {
  using namespace biotrack;
  std::uniform_real_distribution<double> coord(0.0, 500.0);
  std::uniform_int_distribution<int> kind(0, 6);
  std::vector<TrackId> ids;
  for (const auto& [id, _] : store.tracks()) ids.push_back(id);
  auto pick_track = [&]() -> const Trajectory& {
    std::uniform_int_distribution<std::size_t> d(0, ids.size() - 1);
    return store.track(ids[d(rng)]);
  };
  auto pick_frame = [&](const Trajectory& t) {
    std::uniform_int_distribution<std::size_t> d(0, t.points.size() - 1);
    return std::next(t.points.begin(), static_cast<long>(d(rng)))->first;
  };
  for (;;) {
    const int k = ids.empty() ? 0 : kind(rng);
    if (k == 0) {
      std::uniform_int_distribution<TrackId> tid(1, ids.empty() ? 3 : ids.back() + 2);
      const TrackId id = tid(rng);
      std::uniform_int_distribution<std::int64_t> fr(0, 60);
      const std::int64_t f = fr(rng);
      if (store.has_track(id) && store.track(id).points.count(f)) continue;
      return AddPoint{id, f, {coord(rng), coord(rng)}};
    }
    const Trajectory& t = pick_track();
    switch (k) {
      case 1:
        if (t.points.empty()) continue;
        return MovePoint{t.id, pick_frame(t), {coord(rng), coord(rng)}};
      case 2:
        if (t.points.empty()) continue;
        return DeletePoint{t.id, pick_frame(t)};
      case 3:
        return DeleteTrack{t.id};
      case 4: {
        if (ids.size() < 2) continue;
        const Trajectory& u = pick_track();
        if (u.id == t.id) continue;
        std::uniform_int_distribution<std::int64_t> fr(0, 60);
        return SwapIds{t.id, u.id, fr(rng)};
      }
      case 5: {
        if (t.points.empty()) continue;
        const std::int64_t f = pick_frame(t);
        std::uniform_int_distribution<std::int64_t> span(0, 10);
        const std::string text = std::bernoulli_distribution(0.2)(rng) ? std::string() : random_text(rng);
        return Annotate{t.id, f - span(rng), f + span(rng), text};
      }
      case 6: {
        if (t.points.size() < 2) continue;
        std::int64_t a = pick_frame(t), b = pick_frame(t);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        return InterpolateGap{t.id, a, b};
      }
    }
  }
}

}  // namespace fixture
