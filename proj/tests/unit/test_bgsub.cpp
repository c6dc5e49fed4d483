#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "bgsub.hpp"
#include "support/expect.hpp"
#include "support/oracles.hpp"

using namespace biotrack;

namespace {

BinaryMask to_mask(const oracle::Grid& g) {
  BinaryMask m(static_cast<int>(g[0].size()), static_cast<int>(g.size()));
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) m.set(x, y, g[y][x] != 0);
  return m;
}

oracle::Grid to_grid(const BinaryMask& m) {
  oracle::Grid g(m.height(), std::vector<int>(m.width()));
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) g[y][x] = m.at(x, y);
  return g;
}

std::vector<std::pair<int, int>> rect_pixels(int x0, int y0, int w, int h) {
  std::vector<std::pair<int, int>> px;
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) px.emplace_back(x, y);
  return px;
}

BinaryMask mask_of(int w, int h, const std::vector<std::pair<int, int>>& px) {
  BinaryMask m(w, h);
  for (auto [x, y] : px) m.set(x, y, true);
  return m;
}

GrayFrame disks_frame(int w, int h, const std::vector<PixelPoint>& centers, double r) {
  GrayFrame f(w, h, 20.0 / 255);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (auto c : centers)
        if (std::hypot(x - c.x, y - c.y) <= r) f.at(x, y) = 230.0 / 255;
  return f;
}

std::unique_ptr<Tracker> bgsub(nlohmann::json params) {
  return TrackerRegistry::builtin().create("bgsub", params);
}

}  // namespace

TEST(Background, Examples) {
  const GrayFrame b(4, 3, 0.0), i(4, 3, 1.0);
  const GrayFrame u = update_background(b, i, 0.1);
  for (double v : u.data()) EXPECT_NEAR(v, 0.1, 1e-15);
  EXPECT_EQ(update_background(b, i, 1.0), i);
  EXPECT_CODE(update_background(b, GrayFrame(3, 3), 0.5), ErrorCode::kValidation);
}

TEST(Background, GeometricDecay) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  GrayFrame b(8, 8), target(8, 8);
  for (double& v : b.data()) v = u(rng);
  for (double& v : target.data()) v = u(rng);
  const GrayFrame b0 = b;
  const double alpha = 0.07;
  for (int n = 1; n <= 60; ++n) {
    b = update_background(b, target, alpha);
    for (std::size_t k = 0; k < b.data().size(); ++k) {
      EXPECT_NEAR(std::fabs(b.data()[k] - target.data()[k]),
                  std::pow(1 - alpha, n) * std::fabs(b0.data()[k] - target.data()[k]), 1e-12);
    }
  }
}

TEST(Segmentation, Examples) {
  BgSubParams p;
  const GrayFrame bg(20, 20, 0.1);
  EXPECT_EQ(segment_foreground(bg, bg, p).count(), 0u);
  GrayFrame one = bg;
  one.at(7, 7) = 0.9;
  EXPECT_EQ(segment_foreground(bg, one, p).count(), 0u);
  GrayFrame sq = bg;
  for (int y = 5; y < 10; ++y)
    for (int x = 8; x < 13; ++x) sq.at(x, y) = 0.9;
  const BinaryMask m = segment_foreground(bg, sq, p);
  EXPECT_EQ(m, mask_of(20, 20, rect_pixels(8, 5, 5, 5)));
  EXPECT_CODE(segment_foreground(bg, GrayFrame(5, 5), p), ErrorCode::kValidation);
}

TEST(Segmentation, ThresholdIsInclusiveAndPolarity) {
  BgSubParams p;
  p.erode_iters = p.dilate_iters = 0;
  p.threshold = 0.25;
  const GrayFrame bg(3, 1, 0.5);
  GrayFrame img(3, 1, std::vector<double>{0.75, 0.25, 0.6});
  BinaryMask both = segment_foreground(bg, img, p);
  EXPECT_TRUE(both.at(0, 0));
  EXPECT_TRUE(both.at(1, 0));
  EXPECT_FALSE(both.at(2, 0));
  p.polarity = Polarity::kBrighter;
  BinaryMask br = segment_foreground(bg, img, p);
  EXPECT_TRUE(br.at(0, 0));
  EXPECT_FALSE(br.at(1, 0));
  p.polarity = Polarity::kDarker;
  BinaryMask dk = segment_foreground(bg, img, p);
  EXPECT_FALSE(dk.at(0, 0));
  EXPECT_TRUE(dk.at(1, 0));
}

TEST(Morphology, MatchesOracleOnRandomMasks) {
  std::mt19937_64 rng(2);
  std::bernoulli_distribution fill(0.6);
  for (int i = 0; i < 50; ++i) {
    oracle::Grid g(17, std::vector<int>(23));
    for (auto& row : g)
      for (int& v : row) v = fill(rng);
    const BinaryMask m = to_mask(g);
    EXPECT_EQ(to_grid(erode(m)), oracle::erode(g));
    EXPECT_EQ(to_grid(dilate(m)), oracle::dilate(g));
    EXPECT_EQ(to_grid(dilate(erode(m))), oracle::dilate(oracle::erode(g)));
  }
}

TEST(Blobs, RectangleExample) {
  const auto px = rect_pixels(0, 0, 10, 4);
  const auto blobs = extract_blobs(mask_of(16, 8, px), 1, 1000);
  ASSERT_EQ(blobs.size(), 1u);
  const Blob& b = blobs[0];
  EXPECT_EQ(b.m00, 40);
  EXPECT_EQ(b.centroid.x, 4.5);
  EXPECT_EQ(b.centroid.y, 1.5);
  EXPECT_NEAR(b.mu20, (100.0 - 1) / 12, 1e-12);
  EXPECT_NEAR(b.orientation_rad, 0.0, 1e-12);
  EXPECT_NEAR(b.semi_major, 2 * std::sqrt(8.25), 1e-12);
  EXPECT_NEAR(b.semi_minor, 2 * std::sqrt(1.25), 1e-12);
  const auto m = oracle::moments(px);
  EXPECT_NEAR(b.semi_major, static_cast<double>(m.a), 1e-12);
}

TEST(Blobs, TransposedRectangleOnBoundary) {
  const auto blobs = extract_blobs(mask_of(8, 16, rect_pixels(2, 1, 4, 10)), 1, 1000);
  ASSERT_EQ(blobs.size(), 1u);
  EXPECT_NEAR(blobs[0].orientation_rad, std::numbers::pi / 2, 1e-12);
  EXPECT_GT(blobs[0].orientation_rad, -std::numbers::pi / 2);
  EXPECT_GE(blobs[0].semi_major, blobs[0].semi_minor);
  EXPECT_NEAR(blobs[0].semi_major, 2 * std::sqrt(8.25), 1e-12);
}

TEST(Blobs, SinglePixelAndEmpty) {
  const auto blobs = extract_blobs(mask_of(5, 5, {{2, 3}}), 1, 10);
  ASSERT_EQ(blobs.size(), 1u);
  EXPECT_EQ(blobs[0].m00, 1);
  EXPECT_EQ(blobs[0].semi_major, 0.0);
  EXPECT_EQ(blobs[0].semi_minor, 0.0);
  EXPECT_TRUE(extract_blobs(BinaryMask(5, 5), 1, 10).empty());
}

TEST(Blobs, EightConnectivityAreaFilterAndOrder) {
  // Diagonal pair joins; a separate 3-pixel bar; a 1-pixel speck.
  const BinaryMask m = mask_of(10, 10, {{1, 1}, {2, 2}, {6, 1}, {7, 1}, {8, 1}, {5, 8}});
  const auto all = extract_blobs(m, 1, 100);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0].m00, 2);  // first pixel (1,1) comes first in raster order
  EXPECT_EQ(all[1].m00, 3);
  EXPECT_EQ(all[2].m00, 1);
  const auto filtered = extract_blobs(m, 2, 2);
  ASSERT_EQ(filtered.size(), 1u);
  EXPECT_EQ(filtered[0].m00, 2);
}

TEST(Blobs, MomentsMatchOracleOnRandomShapes) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 60; ++i) {
    std::uniform_real_distribution<double> c(30, 70), ax(1.5, 20), ang(-3.2, 3.2);
    const double cx = c(rng), cy = c(rng), a = ax(rng), b = ax(rng), t = ang(rng);
    std::vector<std::pair<int, int>> px;
    for (int y = 0; y < 100; ++y)
      for (int x = 0; x < 100; ++x) {
        const double u = (x - cx) * std::cos(t) + (y - cy) * std::sin(t);
        const double v = -(x - cx) * std::sin(t) + (y - cy) * std::cos(t);
        if (u * u / (a * a) + v * v / (b * b) <= 1) px.emplace_back(x, y);
      }
    const auto blobs = extract_blobs(mask_of(100, 100, px), 1, 10000);
    ASSERT_EQ(blobs.size(), 1u);
    const auto m = oracle::moments(px);
    EXPECT_EQ(blobs[0].m00, m.m00);
    EXPECT_EQ(blobs[0].centroid.x, m.cx());
    EXPECT_EQ(blobs[0].centroid.y, m.cy());
    EXPECT_NEAR(blobs[0].mu11, static_cast<double>(m.mu11), 1e-9);
    EXPECT_NEAR(blobs[0].semi_major, static_cast<double>(m.a), 1e-9);
    EXPECT_NEAR(blobs[0].semi_minor, static_cast<double>(m.b), 1e-9);
    EXPECT_GT(blobs[0].orientation_rad, -std::numbers::pi / 2);
    EXPECT_LE(blobs[0].orientation_rad, std::numbers::pi / 2);
  }
}

TEST(Blobs, EllipseAreaConsistency) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    std::uniform_real_distribution<double> ax(10, 30), ang(-1.5, 1.5);
    const double a = ax(rng), b = ax(rng), t = ang(rng);
    std::vector<std::pair<int, int>> px;
    for (int y = 0; y < 100; ++y)
      for (int x = 0; x < 100; ++x) {
        const double u = (x - 50) * std::cos(t) + (y - 50) * std::sin(t);
        const double v = -(x - 50) * std::sin(t) + (y - 50) * std::cos(t);
        if (u * u / (a * a) + v * v / (b * b) <= 1) px.emplace_back(x, y);
      }
    const Blob blob = extract_blobs(mask_of(100, 100, px), 1, 10000).at(0);
    const double area = std::numbers::pi * blob.semi_major * blob.semi_minor;
    EXPECT_NEAR(area / static_cast<double>(blob.m00), 1.0, 0.15);
  }
}

TEST(Association, Examples) {
  auto r = associate({{1, {10, 10}, 0}}, {{12, 10}}, 5, 10, 0);
  ASSERT_EQ(r.matches.size(), 1u);
  EXPECT_EQ(r.matches[0].distance, 2.0);
  r = associate({{1, {10, 10}, 0}}, {{18, 10}}, 5, 10, 0);
  EXPECT_TRUE(r.matches.empty());
  EXPECT_EQ(r.births, (std::vector<std::size_t>{0}));
  EXPECT_EQ(r.tracks.at(0).misses, 1);
  r = associate({{1, {0, 0}, 0}, {2, {10, 0}, 0}}, {{1, 0}, {9, 0}}, 5, 10, 0);
  ASSERT_EQ(r.matches.size(), 2u);
  for (const auto& m : r.matches) EXPECT_EQ(m.detection, m.track == 1 ? 0u : 1u);
}

TEST(Association, TiesByTrackThenDetection) {
  const auto r = associate({{4, {0, 0}, 0}, {2, {2, 0}, 0}}, {{1, 0}}, 5, 10, 0);
  ASSERT_EQ(r.matches.size(), 1u);
  EXPECT_EQ(r.matches[0].track, 2u);
  const auto s = associate({{1, {0, 0}, 0}}, {{0, 1}, {1, 0}}, 5, 10, 0);
  EXPECT_EQ(s.matches.at(0).detection, 0u);
}

TEST(Association, RetiresAfterMaxMissed) {
  std::vector<ActiveTrack> tracks = {{1, {0, 0}, 0}};
  for (int i = 0; i < 3; ++i) {
    auto r = associate(tracks, {}, 5, 3, 0);
    ASSERT_TRUE(r.retired.empty());
    tracks = r.tracks;
  }
  EXPECT_EQ(tracks.at(0).misses, 3);
  EXPECT_EQ(associate(tracks, {}, 5, 3, 0).retired, (std::vector<TrackId>{1}));
}

TEST(Association, MaxEntitiesDiscardsFarthest) {
  const auto r = associate({{1, {0, 0}, 0}}, {{100, 0}, {20, 0}, {0, 1}, {50, 0}}, 5, 10, 3);
  EXPECT_EQ(r.matches.size(), 1u);
  EXPECT_EQ(r.births, (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(r.discarded, (std::vector<std::size_t>{0}));
}

TEST(Association, GateAndUniquenessInvariants) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 60);
  std::uniform_int_distribution<int> n(0, 8);
  for (int i = 0; i < 300; ++i) {
    std::vector<ActiveTrack> tracks;
    for (int k = n(rng); k > 0; --k) tracks.push_back({static_cast<TrackId>(tracks.size() + 1), {u(rng), u(rng)}, 0});
    std::vector<PixelPoint> dets;
    for (int k = n(rng); k > 0; --k) dets.push_back({u(rng), u(rng)});
    const auto r = associate(tracks, dets, 15, 2, 0);
    std::set<TrackId> ts;
    std::set<std::size_t> ds;
    for (const auto& m : r.matches) {
      EXPECT_LE(m.distance, 15.0);
      EXPECT_TRUE(ts.insert(m.track).second);
      EXPECT_TRUE(ds.insert(m.detection).second);
    }
    EXPECT_EQ(ds.size() + r.births.size(), dets.size());
  }
}

// Greedy equals the exhaustive optimum when animals are well separated
// relative to the gate.
TEST(Association, GreedyMatchesBruteForceWhenSeparated) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> pos(0, 400), jitter(-4, 4);
  std::uniform_int_distribution<int> nt(0, 4), extra(0, 2);
  std::bernoulli_distribution keep(0.8);
  const double gate = 10;
  for (int i = 0; i < 500; ++i) {
    std::vector<std::array<double, 2>> tp;
    const int want = nt(rng);
    while (static_cast<int>(tp.size()) < want) {
      std::array<double, 2> c{pos(rng), pos(rng)};
      bool ok = true;
      for (auto& o : tp) ok &= std::hypot(o[0] - c[0], o[1] - c[1]) > 4 * gate;
      if (ok) tp.push_back(c);
    }
    std::vector<ActiveTrack> tracks;
    std::vector<PixelPoint> dets;
    std::vector<std::array<double, 2>> dp;
    for (std::size_t k = 0; k < tp.size(); ++k) {
      tracks.push_back({static_cast<TrackId>(k + 1), {tp[k][0], tp[k][1]}, 0});
      if (keep(rng)) dp.push_back({tp[k][0] + jitter(rng), tp[k][1] + jitter(rng)});
    }
    for (int k = extra(rng); k > 0; --k) {
      std::array<double, 2> c{pos(rng), pos(rng)};
      bool far = true;
      for (auto& o : tp) far &= std::hypot(o[0] - c[0], o[1] - c[1]) > 2 * gate;
      if (far) dp.push_back(c);
    }
    for (auto& d : dp) dets.push_back({d[0], d[1]});
    const auto r = associate(tracks, dets, gate, 10, 0);
    double total = 0;
    for (const auto& m : r.matches) total += m.distance;
    const auto [best_n, best_d] = oracle::best_assignment(tp, dp, gate);
    EXPECT_EQ(static_cast<int>(r.matches.size()), best_n);
    EXPECT_NEAR(total, best_d, 1e-9);
  }
}

// Greedy is not optimal in general: a shared nearest detection starves a
// second track.
TEST(Association, GreedyCanMissTheOptimum) {
  const auto r = associate({{1, {0, 0}, 0}, {2, {3, 0}, 0}}, {{2, 0}, {5.5, 0}}, 3, 10, 0);
  EXPECT_EQ(r.matches.size(), 1u);
  EXPECT_EQ(oracle::best_assignment({{0, 0}, {3, 0}}, {{2, 0}, {5.5, 0}}, 3).first, 2);
}

TEST(Tracking, FirstFrameInitializesAndStaticSceneIsEmpty) {
  auto t = bgsub({});
  const GrayFrame f = disks_frame(64, 64, {{20, 20}}, 6);
  for (int i = 0; i < 5; ++i) EXPECT_TRUE(t->process_frame(f, FrameIndex(i, 25)).detections.empty());
  auto z = bgsub({});
  z->process_frame(GrayFrame(32, 32), FrameIndex(0, 25));
  EXPECT_TRUE(z->process_frame(GrayFrame(32, 32), FrameIndex(1, 25)).detections.empty());
}

TEST(Tracking, SingleMovingDisk) {
  auto t = bgsub({{"polarity", "brighter"}, {"erode_iters", 0}, {"dilate_iters", 0}});
  std::set<TrackId> ids;
  int points = 0;
  for (int i = 0; i < 50; ++i) {
    const PixelPoint c{20.0 + 2 * i, 40};
    const auto r = t->process_frame(disks_frame(160, 80, {c}, 8), FrameIndex(i, 25));
    for (const auto& d : r.detections) {
      ids.insert(d.id);
      ++points;
      EXPECT_EQ(d.detection.frame, i);
      if (i >= 10) EXPECT_LT(std::hypot(d.detection.centroid.x - c.x, d.detection.centroid.y - c.y), 0.5);
    }
  }
  EXPECT_EQ(ids.size(), 1u);
  EXPECT_EQ(points, 49);
}

TEST(Tracking, CrossingDisksKeepIdentity) {
  auto t = bgsub({{"polarity", "brighter"}, {"gate_px", 10}});
  std::map<TrackId, std::set<int>> lanes;
  for (int i = 0; i < 60; ++i) {
    const std::vector<PixelPoint> c = {{20.0 + 2 * i, 40}, {140.0 - 2 * i, 64}};
    for (const auto& d : t->process_frame(disks_frame(160, 100, c, 7), FrameIndex(i, 25)).detections)
      lanes[d.id].insert(d.detection.centroid.y < 52 ? 0 : 1);
  }
  ASSERT_EQ(lanes.size(), 2u);
  for (const auto& [id, l] : lanes) EXPECT_EQ(l.size(), 1u) << "track " << id << " changed lanes";
}

TEST(Tracking, Deterministic) {
  auto run = [] {
    auto t = bgsub({{"polarity", "brighter"}});
    std::vector<std::tuple<TrackId, double, double>> out;
    for (int i = 0; i < 30; ++i) {
      const std::vector<PixelPoint> c = {{20.0 + 1.5 * i, 30 + 0.3 * i}, {90.0 - i, 70}};
      for (const auto& d : t->process_frame(disks_frame(128, 100, c, 6), FrameIndex(i, 25)).detections)
        out.emplace_back(d.id, d.detection.centroid.x, d.detection.centroid.y);
    }
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(Tracking, ReportsEndedTracks) {
  auto t = bgsub({{"polarity", "brighter"}, {"max_missed", 2}});
  std::vector<TrackId> ended;
  for (int i = 0; i < 20; ++i) {
    std::vector<PixelPoint> c;
    if (i < 10) c.push_back({20.0 + 2 * i, 30});
    const auto r = t->process_frame(disks_frame(80, 60, c, 6), FrameIndex(i, 25));
    ended.insert(ended.end(), r.ended.begin(), r.ended.end());
  }
  EXPECT_EQ(ended.size(), 1u);
}

TEST(Params, MinAreaAboveMaxAreaRejected) {
  EXPECT_CODE(bgsub({{"min_area_px", 50}, {"max_area_px", 10}}), ErrorCode::kValidation);
}
