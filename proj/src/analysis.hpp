#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "track_store.hpp"

namespace biotrack {

struct MetricSample {
  std::int64_t frame = 0;
  std::optional<double> value;
  friend bool operator==(const MetricSample&, const MetricSample&) = default;
};

struct MetricSeries {
  std::string label;
  std::vector<MetricSample> samples;  // frames strictly increasing
};

// Symbols in [0, q). frames[i] is the frame of symbols[i]; an empty frames
// vector means the symbols are consecutive.
struct SymbolSeries {
  std::vector<int> symbols;
  std::vector<std::int64_t> frames;
  int q = 2;
};

struct SliceRect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool world = false;  // test pos_world instead of pos_px
};

struct SliceFilter {
  std::optional<std::int64_t> frame_from;
  std::optional<std::int64_t> frame_to;
  std::optional<SliceRect> rect;

  void validate() const;
  bool contains(const TrackPoint& p) const;
};

enum class BinStrategy { kQuantile, kUniform };
BinStrategy parse_bin_strategy(std::string_view name);

// |p(t+1) - p(t)| * fps for each frame t in [first, last - 1]. World
// coordinates are used when both endpoints have them. Invalid points count as
// missing.
MetricSeries speed_series(const Trajectory& track, double fps);

struct DistanceResult {
  MetricSeries series;
  double mean = 0.0;
};
DistanceResult distance_series(const Trajectory& a, const Trajectory& b);

struct LagRho {
  int lag = 0;
  std::optional<double> rho;  // absent when a segment has zero variance
};
struct CrossCorrelation {
  std::vector<LagRho> table;  // lags -max_lag..max_lag
  std::optional<int> peak_lag;
  std::optional<double> peak_rho;
};
// Positive lag: y follows x, i.e. rho(lag) correlates x[t] with y[t + lag].
CrossCorrelation cross_correlation(const MetricSeries& x, const MetricSeries& y, int max_lag);

SymbolSeries discretize(const MetricSeries& series, int q, BinStrategy strategy);

// Plug-in transfer entropy X -> Y in bits with history length k for Y.
// Triples spanning a frame gap are skipped.
double transfer_entropy(const SymbolSeries& x, const SymbolSeries& y, int k = 1);

TrackStore apply_slice(const TrackStore& store, const SliceFilter& filter);

struct AnalysisConfig {
  int q = 8;
  int k = 1;
  int max_lag = 10;
  BinStrategy strategy = BinStrategy::kQuantile;
};

struct PairSummary {
  TrackId a = 0, b = 0;
  std::optional<double> mean_distance;
  std::optional<double> peak_rho;
  std::optional<int> peak_lag;
  std::optional<double> te_ab_bits;
  std::optional<double> te_ba_bits;
};

// Pairwise metrics on the speed series of two tracks; fields stay absent when
// the data do not support the metric.
PairSummary summarize_pair(const TrackStore& store, TrackId a, TrackId b, const AnalysisConfig& config);

// Writes speed_<id>.csv, pair_<a>_<b>.csv, xcorr_<a>_<b>.csv and summary.csv.
std::vector<PairSummary> export_metrics(const TrackStore& store, const AnalysisConfig& config,
                                        const std::filesystem::path& out_dir);

// Foreign CSV with columns named by the mapping: {"frame","id","x","y"}.
// Positions go to pos_px. Non-numeric ids are numbered by first appearance.
struct ColumnMapping {
  std::string frame = "frame";
  std::string id = "id";
  std::string x = "x";
  std::string y = "y";
};
ColumnMapping column_mapping_from_json(const nlohmann::json& j);
TrackStore load_mapped_csv(std::string_view text, const ColumnMapping& mapping, double fps);

}  // namespace biotrack
