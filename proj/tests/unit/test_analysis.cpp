#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "analysis.hpp"
#include "pipeline.hpp"
#include "support/expect.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace biotrack;

namespace {

Trajectory track_of(TrackId id, const std::vector<std::tuple<std::int64_t, double, double>>& pts) {
  Trajectory t;
  t.id = id;
  for (auto [f, x, y] : pts) {
    TrackPoint p;
    p.frame = f;
    p.pos_px = {x, y};
    t.points.emplace(f, p);
  }
  return t;
}

MetricSeries series_of(const std::vector<double>& v, std::int64_t first = 0) {
  MetricSeries s;
  for (std::size_t i = 0; i < v.size(); ++i) s.samples.push_back({first + static_cast<std::int64_t>(i), v[i]});
  return s;
}

SymbolSeries symbols_of(std::vector<int> v, int q, std::vector<std::int64_t> frames = {}) {
  SymbolSeries s;
  s.symbols = std::move(v);
  s.q = q;
  s.frames = std::move(frames);
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Plug-in TE from an explicit list of (y_next, y_prev, x) triples, k = 1.
double te_from_triples(const std::vector<std::array<int, 3>>& triples) {
  std::map<std::array<int, 3>, double> c3;
  std::map<std::pair<int, int>, double> c_yh, c_hx;
  std::map<int, double> c_h;
  for (const auto& t : triples) {
    c3[t] += 1;
    c_yh[{t[0], t[1]}] += 1;
    c_hx[{t[1], t[2]}] += 1;
    c_h[t[1]] += 1;
  }
  const double n = static_cast<double>(triples.size());
  double te = 0;
  for (const auto& [t, c] : c3) {
    te += c / n * std::log2((c / c_hx[{t[1], t[2]}]) / (c_yh[{t[0], t[1]}] / c_h[t[1]]));
  }
  return te;
}

}  // namespace

// --- speed / distance ---

TEST(Speed, PythagoreanStepAtFps25) {
  const auto s = speed_series(track_of(1, {{0, 0, 0}, {1, 3, 4}}), 25.0);
  ASSERT_EQ(s.samples.size(), 1u);
  EXPECT_EQ(s.samples[0].frame, 0);
  EXPECT_DOUBLE_EQ(*s.samples[0].value, 125.0);
}

TEST(Speed, StationaryTrackIsZero) {
  const auto s = speed_series(track_of(1, {{0, 5, 5}, {1, 5, 5}, {2, 5, 5}}), 30.0);
  ASSERT_EQ(s.samples.size(), 2u);
  for (const auto& m : s.samples) EXPECT_EQ(*m.value, 0.0);
}

TEST(Speed, GapLeavesAbsentValues) {
  std::vector<std::tuple<std::int64_t, double, double>> pts;
  for (int f = 0; f <= 4; ++f) pts.emplace_back(f, f, 0);
  for (int f = 9; f <= 12; ++f) pts.emplace_back(f, f, 0);
  const auto s = speed_series(track_of(1, pts), 1.0);
  ASSERT_EQ(s.samples.size(), 12u);
  for (const auto& m : s.samples) {
    if (m.frame >= 4 && m.frame <= 8) {
      EXPECT_FALSE(m.value) << m.frame;
    } else {
      ASSERT_TRUE(m.value) << m.frame;
      EXPECT_DOUBLE_EQ(*m.value, 1.0);
    }
  }
}

TEST(Speed, InvalidPointsCountAsMissing) {
  auto t = track_of(1, {{0, 0, 0}, {1, 1, 0}, {2, 2, 0}});
  t.points[1].valid = false;
  const auto s = speed_series(t, 1.0);
  ASSERT_EQ(s.samples.size(), 2u);
  EXPECT_FALSE(s.samples[0].value);
  EXPECT_FALSE(s.samples[1].value);
}

TEST(Speed, UsesWorldWhenBothEndsHaveIt) {
  auto t = track_of(1, {{0, 0, 0}, {1, 100, 0}});
  t.points[0].pos_world = WorldPoint{0, 0, Unit::kMm};
  t.points[1].pos_world = WorldPoint{0, 2, Unit::kMm};
  EXPECT_DOUBLE_EQ(*speed_series(t, 10.0).samples[0].value, 20.0);
}

TEST(Speed, TooFewPointsIsDataError) {
  EXPECT_CODE(speed_series(track_of(1, {{0, 0, 0}}), 25.0), ErrorCode::kData);
  EXPECT_CODE(speed_series(track_of(1, {}), 25.0), ErrorCode::kData);
}

TEST(Distance, ParallelTracksAtOffsetThree) {
  std::vector<std::tuple<std::int64_t, double, double>> a, b;
  for (int f = 0; f < 10; ++f) {
    a.emplace_back(f, f * 2.0, 1.0);
    b.emplace_back(f, f * 2.0, 4.0);
  }
  const auto r = distance_series(track_of(1, a), track_of(2, b));
  EXPECT_EQ(r.series.samples.size(), 10u);
  for (const auto& m : r.series.samples) EXPECT_DOUBLE_EQ(*m.value, 3.0);
  EXPECT_DOUBLE_EQ(r.mean, 3.0);
}

TEST(Distance, IdenticalTracksAreZero) {
  const auto t = track_of(1, {{0, 1, 2}, {1, 3, 4}, {2, 7, 1}});
  EXPECT_EQ(distance_series(t, t).mean, 0.0);
}

TEST(Distance, SingleFrameOverlap) {
  const auto r = distance_series(track_of(1, {{0, 0, 0}, {1, 0, 0}}), track_of(2, {{1, 6, 8}, {2, 0, 0}}));
  ASSERT_EQ(r.series.samples.size(), 1u);
  EXPECT_EQ(r.series.samples[0].frame, 1);
  EXPECT_DOUBLE_EQ(r.mean, 10.0);
}

TEST(Distance, NoOverlapIsDataError) {
  EXPECT_CODE(distance_series(track_of(1, {{0, 0, 0}}), track_of(2, {{1, 0, 0}})), ErrorCode::kData);
}

// --- cross-correlation ---

TEST(CrossCorrelation, IdentityAndNegation) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> x(200), nx(200);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = g(rng);
    nx[i] = -x[i];
  }
  const auto same = cross_correlation(series_of(x), series_of(x), 5);
  EXPECT_EQ(*same.peak_lag, 0);
  EXPECT_NEAR(*same.peak_rho, 1.0, 1e-12);
  const auto neg = cross_correlation(series_of(x), series_of(nx), 5);
  EXPECT_EQ(*neg.peak_lag, 0);
  EXPECT_NEAR(*neg.peak_rho, -1.0, 1e-12);
}

TEST(CrossCorrelation, PositiveLagMeansYFollowsX) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<double> x(500), y(500);
  for (auto& v : x) v = g(rng);
  for (std::size_t t = 0; t < y.size(); ++t) y[t] = t >= 3 ? x[t - 3] : g(rng);
  const auto r = cross_correlation(series_of(x), series_of(y), 10);
  EXPECT_EQ(*r.peak_lag, 3);
  EXPECT_NEAR(*r.peak_rho, 1.0, 0.05);
}

TEST(CrossCorrelation, TableMatchesOracle) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 30 + trial * 7;
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = g(rng);
      y[i] = 0.5 * g(rng) + (i > 0 ? 0.7 * x[i - 1] : 0);
    }
    const auto r = cross_correlation(series_of(x), series_of(y), 8);
    ASSERT_EQ(r.table.size(), 17u);
    for (const auto& row : r.table) {
      const auto want = oracle::lagged_pearson(x, y, row.lag);
      ASSERT_EQ(row.rho.has_value(), want.has_value());
      EXPECT_NEAR(*row.rho, *want, 1e-12) << "lag " << row.lag;
      EXPECT_LE(std::abs(*row.rho), 1.0 + 1e-12);
    }
  }
}

TEST(CrossCorrelation, OnlyCommonFramesAreUsed) {
  MetricSeries x = series_of({1, 2, 3, 4, 5, 6}, 0);
  MetricSeries y = series_of({2, 4, 6, 8, 10, 12}, 0);
  x.samples[2].value.reset();
  y.samples.push_back({40, 1e9});
  const auto r = cross_correlation(x, y, 0);
  EXPECT_NEAR(*r.peak_rho, 1.0, 1e-12);
}

TEST(CrossCorrelation, ConstantSegmentHasNoRho) {
  const auto r = cross_correlation(series_of({1, 1, 1, 1}), series_of({1, 2, 3, 4}), 1);
  for (const auto& row : r.table) EXPECT_FALSE(row.rho);
  EXPECT_FALSE(r.peak_lag);
}

TEST(CrossCorrelation, Errors) {
  EXPECT_CODE(cross_correlation(series_of({1, 2, 3}), series_of({1, 2, 3}), -1), ErrorCode::kValidation);
  EXPECT_CODE(cross_correlation(series_of({1, 2}), series_of({1, 2}), 0), ErrorCode::kData);
}

// --- discretization ---

TEST(Discretize, QuantileSplitsInHalf) {
  const auto s = discretize(series_of({1, 2, 3, 4, 5, 6, 7, 8}), 2, BinStrategy::kQuantile);
  EXPECT_EQ(s.symbols, (std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1}));
  EXPECT_EQ(s.q, 2);
}

TEST(Discretize, UniformExtremes) {
  const auto s = discretize(series_of({0, 10}), 2, BinStrategy::kUniform);
  EXPECT_EQ(s.symbols, (std::vector<int>{0, 1}));
}

TEST(Discretize, QuantileCountsBalanced) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 40 + trial;
    const int q = 2 + trial % 7;
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    const auto s = discretize(series_of(v), q, BinStrategy::kQuantile);
    std::vector<int> counts(q, 0);
    for (int sym : s.symbols) {
      ASSERT_GE(sym, 0);
      ASSERT_LT(sym, q);
      ++counts[sym];
    }
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    EXPECT_LE(*hi - *lo, 1) << "n=" << n << " q=" << q;
    // order preserving
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (v[i] < v[j]) ASSERT_LE(s.symbols[i], s.symbols[j]);
  }
}

TEST(Discretize, Errors) {
  EXPECT_CODE(discretize(series_of({3, 3, 3}), 2, BinStrategy::kQuantile), ErrorCode::kDegenerate);
  EXPECT_CODE(discretize(series_of({1, 2, 3}), 1, BinStrategy::kQuantile), ErrorCode::kValidation);
  EXPECT_CODE(discretize(series_of({1, 2, 1, 2}), 3, BinStrategy::kQuantile), ErrorCode::kValidation);
  EXPECT_CODE(discretize(MetricSeries{}, 2, BinStrategy::kUniform), ErrorCode::kData);
}

TEST(Discretize, AbsentValuesDroppedFramesKept) {
  MetricSeries s = series_of({1, 2, 3, 4, 5}, 10);
  s.samples[1].value.reset();
  const auto d = discretize(s, 2, BinStrategy::kQuantile);
  EXPECT_EQ(d.frames, (std::vector<std::int64_t>{10, 12, 13, 14}));
  EXPECT_EQ(d.symbols.size(), 4u);
}

TEST(Discretize, StrategyNames) {
  EXPECT_EQ(parse_bin_strategy("quantile"), BinStrategy::kQuantile);
  EXPECT_EQ(parse_bin_strategy("uniform"), BinStrategy::kUniform);
  EXPECT_CODE(parse_bin_strategy("kmeans"), ErrorCode::kUsage);
}

// --- transfer entropy ---

TEST(TransferEntropy, ToyExample) {
  const auto x = symbols_of({0, 1, 2, 0, 1, 2}, 3);
  const auto y = symbols_of({0, 0, 1, 2, 0, 1}, 3);
  EXPECT_NEAR(transfer_entropy(x, y, 1), 0.6 * std::log2(3.0) - 0.4, 1e-12);
}

TEST(TransferEntropy, ConstantTargetIsZero) {
  const auto x = symbols_of({0, 1, 1, 0, 1, 0, 0, 1}, 2);
  const auto y = symbols_of({1, 1, 1, 1, 1, 1, 1, 1}, 2);
  EXPECT_EQ(transfer_entropy(x, y, 1), 0.0);
}

TEST(TransferEntropy, DirectionalCoupling) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> sym(0, 3);
  std::vector<int> x(4000), y(4000);
  for (auto& v : x) v = sym(rng);
  y[0] = 0;
  for (std::size_t t = 1; t < y.size(); ++t) y[t] = x[t - 1];
  const double fwd = transfer_entropy(symbols_of(x, 4), symbols_of(y, 4), 1);
  const double back = transfer_entropy(symbols_of(y, 4), symbols_of(x, 4), 1);
  EXPECT_GT(fwd - back, 1.0);
}

TEST(TransferEntropy, MatchesBruteForce) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int q = 2 + trial % 3;
    const int k = 1 + trial % 2;
    std::uniform_int_distribution<int> sym(0, q - 1);
    std::vector<int> x(60 + trial), y(60 + trial);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = sym(rng);
      y[i] = i > 0 && trial % 2 ? x[i - 1] ^ (sym(rng) == 0) : sym(rng);
      y[i] = std::min(y[i], q - 1);
    }
    const double got = transfer_entropy(symbols_of(x, q), symbols_of(y, q), k);
    EXPECT_NEAR(got, static_cast<double>(oracle::transfer_entropy(x, y, k, q, q)), 1e-12);
  }
}

TEST(TransferEntropy, TriplesAcrossGapsAreSkipped) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> sym(0, 2);
  std::vector<int> x, y;
  std::vector<std::int64_t> frames;
  std::int64_t f = 0;
  for (int i = 0; i < 80; ++i) {
    frames.push_back(f);
    f += (i % 13 == 12) ? 4 : 1;
    x.push_back(sym(rng));
    y.push_back(sym(rng));
  }
  std::vector<std::array<int, 3>> triples;
  for (std::size_t t = 0; t + 1 < y.size(); ++t) {
    if (frames[t + 1] - frames[t] != 1) continue;
    triples.push_back({y[t + 1], y[t], x[t]});
  }
  const double got = transfer_entropy(symbols_of(x, 3, frames), symbols_of(y, 3, frames), 1);
  EXPECT_NEAR(got, te_from_triples(triples), 1e-12);
  // and differs from the gap-blind value
  EXPECT_NE(got, transfer_entropy(symbols_of(x, 3), symbols_of(y, 3), 1));
}

TEST(TransferEntropy, Errors) {
  const auto a = symbols_of({0, 1, 0, 1}, 2);
  EXPECT_CODE(transfer_entropy(a, symbols_of({0, 1, 0}, 2), 1), ErrorCode::kValidation);
  EXPECT_CODE(transfer_entropy(symbols_of({0, 1, 0, 1}, 2, {0, 1, 2, 3}), symbols_of({0, 1, 0, 1}, 2, {0, 1, 2, 4}), 1),
              ErrorCode::kValidation);
  EXPECT_CODE(transfer_entropy(a, a, 0), ErrorCode::kValidation);
  EXPECT_CODE(transfer_entropy(a, a, 4), ErrorCode::kValidation);
  EXPECT_CODE(transfer_entropy(symbols_of({0, 2, 0, 1}, 2), a, 1), ErrorCode::kValidation);
  EXPECT_CODE(transfer_entropy(symbols_of({0, 1, 0}, 2, {0, 5, 10}), symbols_of({0, 1, 1}, 2, {0, 5, 10}), 1),
              ErrorCode::kData);
}

TEST(TransferEntropy, AlignmentMessage) {
  try {
    transfer_entropy(symbols_of({0, 1, 0, 1}, 2), symbols_of({0, 1}, 2), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("alignment"), std::string::npos);
  }
}

// --- slicing ---

class Slice : public ::testing::Test {
 protected:
  void SetUp() override {
    DiskSceneConfig c;
    c.frames = 60;
    c.seed = 11;
    store = truth_store(DiskScene::generate(c));
  }
  TrackStore store;
};

TEST_F(Slice, EmptyFilterKeepsEverything) { EXPECT_EQ(apply_slice(store, {}), store); }

TEST_F(Slice, ExcludingEverythingLeavesNoTracks) {
  SliceFilter f;
  f.frame_from = 1000;
  EXPECT_TRUE(apply_slice(store, f).tracks().empty());
}

TEST_F(Slice, RectKeepsOnlyInsidePoints) {
  SliceFilter f;
  f.rect = SliceRect{0, 0, 256, 512};
  const auto out = apply_slice(store, f);
  std::size_t inside = 0;
  for (const auto& [id, t] : store.tracks())
    for (const auto& [fr, p] : t.points) inside += p.pos_px.x <= 256;
  EXPECT_EQ(out.point_count(), inside);
  for (const auto& [id, t] : out.tracks())
    for (const auto& [fr, p] : t.points) {
      EXPECT_LE(p.pos_px.x, 256.0);
      EXPECT_EQ(p, store.track(id).points.at(fr));
    }
}

TEST_F(Slice, WorldRectNeedsWorldCoordinates) {
  SliceFilter f;
  f.rect = SliceRect{-1e9, -1e9, 1e9, 1e9, true};
  EXPECT_TRUE(apply_slice(store, f).tracks().empty());
}

TEST_F(Slice, InvalidFilters) {
  SliceFilter f;
  f.frame_from = 10;
  f.frame_to = 5;
  EXPECT_CODE(apply_slice(store, f), ErrorCode::kValidation);
  SliceFilter g;
  g.rect = SliceRect{5, 0, 5, 10};
  EXPECT_CODE(apply_slice(store, g), ErrorCode::kValidation);
}

TEST_F(Slice, MetricsOnSliceEqualRestrictedMetrics) {
  SliceFilter f;
  f.frame_from = 10;
  f.frame_to = 40;
  const auto sliced = apply_slice(store, f);
  const auto full_speed = speed_series(store.track(1), store.fps());
  const auto part_speed = speed_series(sliced.track(1), sliced.fps());
  std::vector<MetricSample> want;
  for (const auto& m : full_speed.samples)
    if (m.frame >= 10 && m.frame < 40) want.push_back(m);
  EXPECT_EQ(part_speed.samples, want);

  const auto full_d = distance_series(store.track(1), store.track(2)).series.samples;
  const auto part_d = distance_series(sliced.track(1), sliced.track(2)).series.samples;
  std::vector<MetricSample> want_d;
  for (const auto& m : full_d)
    if (m.frame >= 10 && m.frame <= 40) want_d.push_back(m);
  EXPECT_EQ(part_d, want_d);
}

// --- export ---

TEST(Export, FilesForThreeTracks) {
  DiskSceneConfig c;
  c.frames = 80;
  c.seed = 2;
  const auto store = truth_store(DiskScene::generate(c));
  fixture::TempDir dir;
  const auto rows = export_metrics(store, {}, dir.path());
  ASSERT_EQ(rows.size(), 3u);
  for (const char* name : {"speed_1.csv", "speed_2.csv", "speed_3.csv", "pair_1_2.csv", "pair_1_3.csv",
                           "pair_2_3.csv", "xcorr_1_2.csv", "xcorr_1_3.csv", "xcorr_2_3.csv", "summary.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
  }
  const auto speed = lines_of(slurp(dir / "speed_1.csv"));
  EXPECT_EQ(speed[0], "frame,time_s,speed");
  EXPECT_EQ(speed.size(), 80u);
  const auto xc = lines_of(slurp(dir / "xcorr_1_2.csv"));
  EXPECT_EQ(xc[0], "lag,rho");
  EXPECT_EQ(xc.size(), 22u);
  EXPECT_EQ(xc[1].rfind("-10,", 0), 0u);

  const auto summary = lines_of(slurp(dir / "summary.csv"));
  ASSERT_EQ(summary.size(), 4u);
  EXPECT_EQ(summary[0], "id_a,id_b,mean_distance,peak_rho,peak_lag,te_ab_bits,te_ba_bits");
  for (const auto& r : rows) {
    const auto direct = distance_series(store.track(r.a), store.track(r.b)).mean;
    EXPECT_DOUBLE_EQ(*r.mean_distance, direct);
    const auto xcr = cross_correlation(speed_series(store.track(r.a), store.fps()),
                                       speed_series(store.track(r.b), store.fps()), 10);
    EXPECT_EQ(r.peak_lag, xcr.peak_lag);
    EXPECT_EQ(r.peak_rho, xcr.peak_rho);
  }
}

TEST(Export, SingleTrackGivesHeaderOnlySummary) {
  TrackStore store(25.0);
  store.insert_track(track_of(1, {{0, 0, 0}, {1, 1, 1}, {2, 2, 3}}));
  fixture::TempDir dir;
  EXPECT_TRUE(export_metrics(store, {}, dir.path()).empty());
  EXPECT_EQ(lines_of(slurp(dir / "summary.csv")).size(), 1u);
  EXPECT_TRUE(std::filesystem::exists(dir / "speed_1.csv"));
}

TEST(Export, EmptyStoreIsDataError) {
  fixture::TempDir dir;
  EXPECT_CODE(export_metrics(TrackStore(25.0), {}, dir.path()), ErrorCode::kData);
}

TEST(Export, ShortTracksLeaveFieldsAbsent) {
  TrackStore store(25.0);
  store.insert_track(track_of(1, {{0, 0, 0}}));
  store.insert_track(track_of(2, {{5, 0, 0}}));
  const auto s = summarize_pair(store, 1, 2, {});
  EXPECT_FALSE(s.mean_distance);
  EXPECT_FALSE(s.peak_rho);
  EXPECT_FALSE(s.te_ab_bits);
}

// --- foreign CSV ---

TEST(MappedCsv, StringIdsNumberedByFirstAppearance) {
  const std::string text = "t,name,px,py\n0,bee,1,2\n0,ant,3,4\n1,bee,5,6\n";
  ColumnMapping m = column_mapping_from_json({{"frame", "t"}, {"id", "name"}, {"x", "px"}, {"y", "py"}});
  const auto store = load_mapped_csv(text, m, 10.0);
  ASSERT_EQ(store.tracks().size(), 2u);
  EXPECT_EQ(store.track(1).points.size(), 2u);
  EXPECT_EQ(store.track(1).points.at(1).pos_px.x, 5.0);
  EXPECT_EQ(store.track(2).points.at(0).pos_px.y, 4.0);
  EXPECT_EQ(store.fps(), 10.0);
}

TEST(MappedCsv, NumericIdsKept) {
  const auto store = load_mapped_csv("frame,id,x,y\n0,7,1,1\n1,7,2,2\n", {}, 25.0);
  EXPECT_TRUE(store.has_track(7));
}

TEST(MappedCsv, Errors) {
  EXPECT_CODE(column_mapping_from_json({{"z", "q"}}), ErrorCode::kValidation);
  EXPECT_CODE(load_mapped_csv("frame,id,x\n0,1,2\n", {}, 25.0), ErrorCode::kValidation);
  EXPECT_CODE(load_mapped_csv("frame,id,x,y\n0,1,2,3\n0,1,4,5\n", {}, 25.0), ErrorCode::kParse);
  EXPECT_CODE(load_mapped_csv("frame,id,x,y\nzero,1,2,3\n", {}, 25.0), ErrorCode::kParse);
}
