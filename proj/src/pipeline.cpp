#include "pipeline.hpp"

#include <fstream>
#include <sstream>

#include "overlay.hpp"
#include "rectification.hpp"

namespace fs = std::filesystem;

namespace biotrack {

TrackerConfig tracker_config(const std::string& name, nlohmann::json params) {
  TrackerConfig c;
  c.name = name;
  if (params.is_null()) params = nlohmann::json::object();
  if (!params.is_object()) throw Error(ErrorCode::kValidation, "tracker params must be a JSON object");
  if (auto it = params.find("points"); it != params.end()) {
    try {
      for (const auto& p : *it) c.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::kValidation, "points must be a list of [x, y] pairs");
    }
    params.erase(it);
  }
  c.params = std::move(params);
  return c;
}

TrackingRun::TrackingRun(const TrackerConfig& config, TrackStore& store)
    : tracker_(TrackerRegistry::builtin().create(config.name, config.params)) {
  for (const auto& p : config.points) add_point(p, store);
}

TrackId TrackingRun::store_id(TrackId tracker_id, TrackStore& store) {
  auto it = ids_.find(tracker_id);
  if (it != ids_.end()) return it->second;
  const TrackId id = store.allocate_id();
  ids_.emplace(tracker_id, id);
  return id;
}

TrackId TrackingRun::add_point(PixelPoint p, TrackStore& store) {
  return store_id(tracker_->add_point(p), store);
}

std::size_t TrackingRun::step(const FrameProvider& source, std::int64_t index, TrackStore& store) {
  const Frame frame = source.read_frame(index);
  const FrameResult result = tracker_->process_frame(frame.gray, FrameIndex(index, source.fps()));
  for (const auto& d : result.detections) record_detection(store, store_id(d.id, store), d.detection);
  for (TrackId ended : result.ended) {
    auto it = ids_.find(ended);
    if (it != ids_.end() && store.has_track(it->second)) store.track(it->second).ended = true;
  }
  return result.detections.size();
}

TrackStore track_sequence(const FrameProvider& source, const TrackerConfig& config, const ProgressFn& progress) {
  TrackStore store(source.fps());
  TrackingRun run(config, store);
  for (std::int64_t i = 0; i < source.frame_count(); ++i) {
    const std::size_t n = run.step(source, i, store);
    if (progress) progress(i, n);
  }
  return store;
}

std::size_t render_sequence(const FrameProvider& source, const TrackStore& store, const fs::path& out_dir,
                            const std::string& pattern) {
  const FramePattern names(pattern);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory " + out_dir.string());
  for (std::int64_t i = 0; i < source.frame_count(); ++i) {
    const Frame f = source.read_frame(i);
    write_file(out_dir / names.filename(i), encode_png(render_overlay(decode_image(f.encoded), store, i)));
  }
  return static_cast<std::size_t>(source.frame_count());
}

TrackStore truth_store(const DiskScene& scene) {
  TrackStore store(scene.fps());
  for (std::size_t d = 0; d < scene.truth().size(); ++d) {
    Trajectory& t = store.ensure_track(static_cast<TrackId>(d + 1));
    for (std::size_t f = 0; f < scene.truth()[d].size(); ++f) {
      TrackPoint p;
      p.frame = static_cast<std::int64_t>(f);
      p.pos_px = scene.truth()[d][f];
      t.points.emplace(p.frame, p);
    }
  }
  return store;
}

DiskScene write_disk_scene(const DiskSceneConfig& config, const fs::path& out_dir) {
  DiskScene scene = DiskScene::generate(config);
  std::vector<Image8> frames;
  frames.reserve(static_cast<std::size_t>(scene.frame_count()));
  for (std::int64_t i = 0; i < scene.frame_count(); ++i) frames.push_back(scene.render(i));
  write_sequence(frames, out_dir, kOverlayPattern);
  save_store(truth_store(scene), StoreFormat::kCsv, out_dir / "truth.csv");
  return scene;
}

std::vector<PairSummary> analyze_file(const fs::path& in, const AnalyzeOptions& options, const fs::path& out_dir) {
  TrackStore store;
  if (options.mapping) {
    std::ifstream f(in, std::ios::binary);
    if (!f) throw Error(ErrorCode::kIo, "cannot open " + in.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    try {
      store = load_mapped_csv(ss.str(), *options.mapping, options.fps.value_or(25.0));
    } catch (const Error& e) {
      throw Error(e.code(), in.string() + ": " + e.what());
    }
  } else {
    LoadOptions lo;
    lo.fps = options.fps;
    store = load_store(in, format_from_path(in), lo);
  }
  SliceFilter slice = options.slice;
  if (slice.rect) slice.rect->world = store.unit() != Unit::kPx;
  return export_metrics(apply_slice(store, slice), options.config, out_dir);
}

void rectify_file(const fs::path& tracks, const fs::path& calibration, const fs::path& out) {
  TrackStore store = load_store(tracks, format_from_path(tracks));
  const Calibration c = load_calibration(calibration);
  apply_rectification(store, c.h);
  save_store(store, format_from_path(out), out);
}

}  // namespace biotrack
