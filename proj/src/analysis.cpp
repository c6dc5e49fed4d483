#include "analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "csv.hpp"

namespace fs = std::filesystem;

namespace biotrack {
namespace {

std::vector<const TrackPoint*> valid_points(const Trajectory& t) {
  std::vector<const TrackPoint*> out;
  for (const auto& [_, p] : t.points) {
    if (p.valid) out.push_back(&p);
  }
  return out;
}

const TrackPoint* valid_at(const Trajectory& t, std::int64_t frame) {
  auto it = t.points.find(frame);
  if (it == t.points.end() || !it->second.valid) return nullptr;
  return &it->second;
}

double separation(const TrackPoint& a, const TrackPoint& b) {
  if (a.pos_world && b.pos_world) return std::hypot(a.pos_world->x - b.pos_world->x, a.pos_world->y - b.pos_world->y);
  return std::hypot(a.pos_px.x - b.pos_px.x, a.pos_px.y - b.pos_px.y);
}

// Values present in both series, on their common frames.
void common_values(const MetricSeries& x, const MetricSeries& y, std::vector<double>& xs, std::vector<double>& ys,
                   std::vector<std::int64_t>* frames = nullptr) {
  std::map<std::int64_t, double> yv;
  for (const auto& s : y.samples) {
    if (s.value) yv.emplace(s.frame, *s.value);
  }
  for (const auto& s : x.samples) {
    if (!s.value) continue;
    auto it = yv.find(s.frame);
    if (it == yv.end()) continue;
    xs.push_back(*s.value);
    ys.push_back(it->second);
    if (frames) frames->push_back(s.frame);
  }
}

std::optional<double> pearson_at_lag(const std::vector<double>& x, const std::vector<double>& y, int lag) {
  const long n = static_cast<long>(x.size());
  const long t0 = lag >= 0 ? 0 : -lag;
  const long t1 = lag >= 0 ? n - lag : n;  // exclusive
  const long m = t1 - t0;
  if (m < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (long t = t0; t < t1; ++t) {
    mx += x[t];
    my += y[t + lag];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxy = 0, sxx = 0, syy = 0;
  for (long t = t0; t < t1; ++t) {
    const double dx = x[t] - mx;
    const double dy = y[t + lag] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

void spill(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

std::string opt_real(const std::optional<double>& v) { return v ? csv::format_real(*v) : std::string(); }

}  // namespace

void SliceFilter::validate() const {
  if (frame_from && frame_to && *frame_from > *frame_to) {
    throw Error(ErrorCode::kValidation, "slice range is inverted: " + std::to_string(*frame_from) + " > " +
                                            std::to_string(*frame_to));
  }
  if (rect && !(rect->x1 > rect->x0 && rect->y1 > rect->y0)) {
    throw Error(ErrorCode::kValidation, "slice rectangle must have positive area (x0 < x1, y0 < y1)");
  }
}

bool SliceFilter::contains(const TrackPoint& p) const {
  if (frame_from && p.frame < *frame_from) return false;
  if (frame_to && p.frame > *frame_to) return false;
  if (!rect) return true;
  double x = p.pos_px.x, y = p.pos_px.y;
  if (rect->world) {
    if (!p.pos_world) return false;
    x = p.pos_world->x;
    y = p.pos_world->y;
  }
  return x >= rect->x0 && x <= rect->x1 && y >= rect->y0 && y <= rect->y1;
}

BinStrategy parse_bin_strategy(std::string_view name) {
  if (name == "quantile") return BinStrategy::kQuantile;
  if (name == "uniform") return BinStrategy::kUniform;
  throw Error(ErrorCode::kUsage, "unknown binning strategy '" + std::string(name) + "' (quantile, uniform)");
}

MetricSeries speed_series(const Trajectory& track, double fps) {
  const auto pts = valid_points(track);
  if (pts.size() < 2) {
    throw Error(ErrorCode::kData, "track " + std::to_string(track.id) + " needs at least 2 points for speed");
  }
  MetricSeries s;
  s.label = "speed_" + std::to_string(track.id);
  const std::int64_t first = pts.front()->frame;
  const std::int64_t last = pts.back()->frame;
  s.samples.reserve(static_cast<std::size_t>(last - first));
  for (std::int64_t t = first; t < last; ++t) {
    MetricSample m{t, std::nullopt};
    const TrackPoint* p0 = valid_at(track, t);
    const TrackPoint* p1 = p0 ? valid_at(track, t + 1) : nullptr;
    if (p1) m.value = separation(*p0, *p1) * fps;
    s.samples.push_back(m);
  }
  return s;
}

DistanceResult distance_series(const Trajectory& a, const Trajectory& b) {
  DistanceResult r;
  r.series.label = "distance_" + std::to_string(a.id) + "_" + std::to_string(b.id);
  double sum = 0.0;
  for (const auto& [frame, pa] : a.points) {
    if (!pa.valid) continue;
    const TrackPoint* pb = valid_at(b, frame);
    if (!pb) continue;
    const double d = separation(pa, *pb);
    r.series.samples.push_back({frame, d});
    sum += d;
  }
  if (r.series.samples.empty()) {
    throw Error(ErrorCode::kData, "tracks " + std::to_string(a.id) + " and " + std::to_string(b.id) +
                                      " share no frames");
  }
  r.mean = sum / static_cast<double>(r.series.samples.size());
  return r;
}

CrossCorrelation cross_correlation(const MetricSeries& x, const MetricSeries& y, int max_lag) {
  if (max_lag < 0) throw Error(ErrorCode::kValidation, "max_lag must be >= 0");
  std::vector<double> xs, ys;
  common_values(x, y, xs, ys);
  if (xs.size() < 3) {
    throw Error(ErrorCode::kData, "cross-correlation needs at least 3 common frames, got " + std::to_string(xs.size()));
  }
  CrossCorrelation out;
  for (int lag = -max_lag; lag <= max_lag; ++lag) out.table.push_back({lag, pearson_at_lag(xs, ys, lag)});
  // Scan 0, -1, +1, -2, ... so ties favour the smallest |lag|.
  for (int i = 0; i <= 2 * max_lag; ++i) {
    const int lag = (i % 2 == 1) ? -(i + 1) / 2 : i / 2;
    const auto& rho = out.table[static_cast<std::size_t>(lag + max_lag)].rho;
    if (rho && (!out.peak_rho || std::abs(*rho) > std::abs(*out.peak_rho))) {
      out.peak_rho = rho;
      out.peak_lag = lag;
    }
  }
  return out;
}

SymbolSeries discretize(const MetricSeries& series, int q, BinStrategy strategy) {
  if (q < 2) throw Error(ErrorCode::kValidation, "q must be >= 2");
  SymbolSeries out;
  out.q = q;
  std::vector<double> values;
  for (const auto& s : series.samples) {
    if (!s.value) continue;
    values.push_back(*s.value);
    out.frames.push_back(s.frame);
  }
  if (values.empty()) throw Error(ErrorCode::kData, "series '" + series.label + "' has no values");

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;  // q - 1 upper edges; a value equal to an edge goes below it
  if (strategy == BinStrategy::kQuantile) {
    if (sorted.front() == sorted.back()) {
      throw Error(ErrorCode::kDegenerate, "series '" + series.label + "' is constant; quantile bins are undefined");
    }
    const auto distinct = std::unique(sorted.begin(), sorted.end()) - sorted.begin();
    if (distinct < q) {
      throw Error(ErrorCode::kValidation, "series '" + series.label + "' has " + std::to_string(distinct) +
                                              " distinct values, fewer than q=" + std::to_string(q));
    }
    sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    for (int k = 1; k < q; ++k) {
      // smallest rank whose cumulative fraction reaches k/q
      const std::size_t rank = (static_cast<std::size_t>(k) * n + static_cast<std::size_t>(q) - 1) / static_cast<std::size_t>(q);
      edges.push_back(sorted[rank - 1]);
    }
  } else {
    const double lo = sorted.front();
    const double hi = sorted.back();
    for (int k = 1; k < q; ++k) edges.push_back(lo + (hi - lo) * k / q);
  }
  out.symbols.reserve(values.size());
  for (double v : values) {
    // number of edges strictly below v
    out.symbols.push_back(static_cast<int>(std::lower_bound(edges.begin(), edges.end(), v) - edges.begin()));
  }
  return out;
}

double transfer_entropy(const SymbolSeries& x, const SymbolSeries& y, int k) {
  if (k < 1) throw Error(ErrorCode::kValidation, "history length k must be >= 1");
  const std::size_t n = y.symbols.size();
  if (x.symbols.size() != n) {
    throw Error(ErrorCode::kValidation, "transfer entropy alignment error: lengths " +
                                            std::to_string(x.symbols.size()) + " and " + std::to_string(n));
  }
  if (!x.frames.empty() && !y.frames.empty() && x.frames != y.frames) {
    throw Error(ErrorCode::kValidation, "transfer entropy alignment error: series cover different frames");
  }
  const std::vector<std::int64_t>& frames = x.frames.empty() ? y.frames : x.frames;
  if (!frames.empty() && frames.size() != n) {
    throw Error(ErrorCode::kValidation, "frame list does not match symbol count");
  }
  if (n < static_cast<std::size_t>(k) + 1) {
    throw Error(ErrorCode::kValidation, "transfer entropy needs at least k+1=" + std::to_string(k + 1) + " samples");
  }
  for (const auto* s : {&x, &y}) {
    for (int v : s->symbols) {
      if (v < 0 || v >= s->q) throw Error(ErrorCode::kValidation, "symbol " + std::to_string(v) + " outside [0, q)");
    }
  }

  using Key = std::vector<int>;
  std::map<Key, long> c_yhx, c_yh, c_hx, c_h;
  long total = 0;
  const auto ku = static_cast<std::size_t>(k);
  for (std::size_t t = ku - 1; t + 1 < n; ++t) {
    if (!frames.empty() && frames[t + 1] - frames[t + 1 - ku] != k) continue;
    Key h(y.symbols.begin() + static_cast<long>(t + 1 - ku), y.symbols.begin() + static_cast<long>(t + 1));
    const int next = y.symbols[t + 1];
    const int xt = x.symbols[t];
    ++c_h[h];
    Key hx = h;
    hx.push_back(xt);
    ++c_hx[hx];
    Key yh = h;
    yh.push_back(next);
    ++c_yh[yh];
    Key yhx = std::move(yh);
    yhx.push_back(xt);
    ++c_yhx[yhx];
    ++total;
  }
  if (total == 0) throw Error(ErrorCode::kData, "no gap-free windows for transfer entropy");

  double te = 0.0;
  for (const auto& [key, count] : c_yhx) {
    Key h(key.begin(), key.begin() + k);
    Key hx = h;
    hx.push_back(key[ku + 1]);
    Key yh = h;
    yh.push_back(key[ku]);
    const double ratio = (static_cast<double>(count) * static_cast<double>(c_h[h])) /
                         (static_cast<double>(c_hx[hx]) * static_cast<double>(c_yh[yh]));
    te += static_cast<double>(count) / static_cast<double>(total) * std::log2(ratio);
  }
  return te;
}

TrackStore apply_slice(const TrackStore& store, const SliceFilter& filter) {
  filter.validate();
  TrackStore out(store.fps(), store.unit());
  for (const auto& [id, t] : store.tracks()) {
    Trajectory kept = t;
    kept.points.clear();
    for (const auto& [frame, p] : t.points) {
      if (filter.contains(p)) kept.points.emplace(frame, p);
    }
    if (!kept.points.empty()) out.insert_track(std::move(kept));
  }
  return out;
}

PairSummary summarize_pair(const TrackStore& store, TrackId a, TrackId b, const AnalysisConfig& config) {
  PairSummary s;
  s.a = a;
  s.b = b;
  const Trajectory& ta = store.track(a);
  const Trajectory& tb = store.track(b);
  try {
    s.mean_distance = distance_series(ta, tb).mean;
  } catch (const Error&) {
  }
  std::optional<MetricSeries> va, vb;
  try {
    va = speed_series(ta, store.fps());
    vb = speed_series(tb, store.fps());
  } catch (const Error&) {
    return s;
  }
  try {
    const auto xc = cross_correlation(*va, *vb, config.max_lag);
    s.peak_rho = xc.peak_rho;
    s.peak_lag = xc.peak_lag;
  } catch (const Error&) {
  }
  try {
    MetricSeries ca{va->label, {}}, cb{vb->label, {}};
    std::vector<double> xs, ys;
    std::vector<std::int64_t> frames;
    common_values(*va, *vb, xs, ys, &frames);
    for (std::size_t i = 0; i < frames.size(); ++i) {
      ca.samples.push_back({frames[i], xs[i]});
      cb.samples.push_back({frames[i], ys[i]});
    }
    const SymbolSeries sa = discretize(ca, config.q, config.strategy);
    const SymbolSeries sb = discretize(cb, config.q, config.strategy);
    s.te_ab_bits = transfer_entropy(sa, sb, config.k);
    s.te_ba_bits = transfer_entropy(sb, sa, config.k);
  } catch (const Error&) {
  }
  return s;
}

std::vector<PairSummary> export_metrics(const TrackStore& store, const AnalysisConfig& config,
                                        const fs::path& out_dir) {
  if (store.tracks().empty()) throw Error(ErrorCode::kData, "no tracks to analyze");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<TrackId> ids;
  for (const auto& [id, _] : store.tracks()) ids.push_back(id);

  for (TrackId id : ids) {
    std::string text = "frame,time_s,speed\n";
    try {
      for (const auto& m : speed_series(store.track(id), store.fps()).samples) {
        text += std::to_string(m.frame) + "," + csv::format_real(static_cast<double>(m.frame) / store.fps()) + "," +
                opt_real(m.value) + "\n";
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kData) throw;
    }
    spill(out_dir / ("speed_" + std::to_string(id) + ".csv"), text);
  }

  std::vector<PairSummary> rows;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const TrackId a = ids[i], b = ids[j];
      const std::string tag = std::to_string(a) + "_" + std::to_string(b);

      std::string dist = "frame,distance\n";
      try {
        for (const auto& m : distance_series(store.track(a), store.track(b)).series.samples) {
          dist += std::to_string(m.frame) + "," + opt_real(m.value) + "\n";
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kData) throw;
      }
      spill(out_dir / ("pair_" + tag + ".csv"), dist);

      std::string xc = "lag,rho\n";
      try {
        const auto table = cross_correlation(speed_series(store.track(a), store.fps()),
                                             speed_series(store.track(b), store.fps()), config.max_lag);
        for (const auto& r : table.table) xc += std::to_string(r.lag) + "," + opt_real(r.rho) + "\n";
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kData) throw;
      }
      spill(out_dir / ("xcorr_" + tag + ".csv"), xc);

      rows.push_back(summarize_pair(store, a, b, config));
    }
  }

  std::string summary = "id_a,id_b,mean_distance,peak_rho,peak_lag,te_ab_bits,te_ba_bits\n";
  for (const auto& r : rows) {
    summary += std::to_string(r.a) + "," + std::to_string(r.b) + "," + opt_real(r.mean_distance) + "," +
               opt_real(r.peak_rho) + "," + (r.peak_lag ? std::to_string(*r.peak_lag) : std::string()) + "," +
               opt_real(r.te_ab_bits) + "," + opt_real(r.te_ba_bits) + "\n";
  }
  spill(out_dir / "summary.csv", summary);
  return rows;
}

ColumnMapping column_mapping_from_json(const nlohmann::json& j) {
  ColumnMapping m;
  try {
    for (const auto& [key, _] : j.items()) {
      if (key != "frame" && key != "id" && key != "x" && key != "y") {
        throw Error(ErrorCode::kValidation, "unknown column mapping key '" + key + "'");
      }
    }
    m.frame = j.value("frame", m.frame);
    m.id = j.value("id", m.id);
    m.x = j.value("x", m.x);
    m.y = j.value("y", m.y);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed column mapping: ") + e.what());
  }
  return m;
}

TrackStore load_mapped_csv(std::string_view text, const ColumnMapping& mapping, double fps) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw Error(ErrorCode::kParse, "line 1: missing CSV header");
  auto column = [&](const std::string& name) {
    const auto& h = rows[0].fields;
    auto it = std::find(h.begin(), h.end(), name);
    if (it == h.end()) throw Error(ErrorCode::kValidation, "column '" + name + "' not found in CSV header");
    return static_cast<std::size_t>(it - h.begin());
  };
  const std::size_t cf = column(mapping.frame), ci = column(mapping.id), cx = column(mapping.x), cy = column(mapping.y);
  const std::size_t need = std::max({cf, ci, cx, cy}) + 1;

  bool numeric_ids = true;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].fields.size() < need) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(rows[r].line) + ": too few fields");
    }
    const std::string& id = rows[r].fields[ci];
    if (id.empty() || id.find_first_not_of("0123456789") != std::string::npos || id.size() > 9 || std::stol(id) == 0) {
      numeric_ids = false;
    }
  }

  TrackStore store(fps, Unit::kPx);
  std::map<std::string, TrackId> names;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    const std::size_t line = rows[r].line;
    if (f[cx].empty() || f[cy].empty()) continue;
    TrackId id;
    if (numeric_ids) {
      id = static_cast<TrackId>(std::stol(f[ci]));
    } else {
      auto [it, fresh] = names.emplace(f[ci], static_cast<TrackId>(names.size() + 1));
      id = it->second;
    }
    TrackPoint p;
    p.frame = csv::parse_integer(f[cf], line, mapping.frame);
    if (p.frame < 0) throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": negative frame");
    p.pos_px = {csv::parse_real(f[cx], line, mapping.x), csv::parse_real(f[cy], line, mapping.y)};
    if (!store.ensure_track(id).points.emplace(p.frame, p).second) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": duplicate frame " + std::to_string(p.frame) +
                                         " for id '" + f[ci] + "'");
    }
  }
  return store;
}

}  // namespace biotrack
