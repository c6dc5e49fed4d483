#include "session.hpp"

#include <cstdio>
#include <random>

#include "overlay.hpp"
#include "serialization.hpp"

namespace fs = std::filesystem;

namespace biotrack {

std::string_view run_state_name(RunState state) {
  switch (state) {
    case RunState::kIdle: return "idle";
    case RunState::kTracking: return "tracking";
    case RunState::kPaused: return "paused";
  }
  return "idle";
}

nlohmann::json Event::to_json() const {
  nlohmann::json j = {{"type", type},
                      {"frame", frame ? nlohmann::json(*frame) : nlohmann::json()},
                      {"detections", detections},
                      {"run_state", run_state_name(run_state)}};
  if (extra.is_object()) {
    for (const auto& [k, v] : extra.items()) j[k] = v;
  }
  return j;
}

std::optional<Event> Subscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lk(m_);
  cv_.wait_for(lk, timeout, [&] { return !queue_.empty() || closed_; });
  if (queue_.empty()) return std::nullopt;
  Event e = std::move(queue_.front());
  queue_.pop_front();
  return e;
}

void Subscription::close() {
  {
    std::lock_guard lk(m_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool Subscription::closed() const {
  std::lock_guard lk(m_);
  return closed_;
}

void Subscription::push(const Event& e) {
  {
    std::lock_guard lk(m_);
    if (closed_) return;
    queue_.push_back(e);
  }
  cv_.notify_all();
}

std::shared_ptr<Subscription> EventBus::subscribe() {
  auto s = std::make_shared<Subscription>();
  std::lock_guard lk(m_);
  subs_.push_back(s);
  return s;
}

void EventBus::publish(const Event& e) {
  std::lock_guard lk(m_);
  std::erase_if(subs_, [](const auto& w) { return w.expired(); });
  for (const auto& w : subs_) {
    if (auto s = w.lock()) s->push(e);
  }
}

void EventBus::close_all() {
  std::lock_guard lk(m_);
  for (const auto& w : subs_) {
    if (auto s = w.lock()) s->close();
  }
  subs_.clear();
}

SaveKind parse_save_kind(std::string_view name) {
  if (name == "tracks_csv") return SaveKind::kTracksCsv;
  if (name == "tracks_json") return SaveKind::kTracksJson;
  if (name == "tracks_binary") return SaveKind::kTracksBinary;
  if (name == "overlay_video") return SaveKind::kOverlayVideo;
  throw Error(ErrorCode::kValidation, "unknown save target '" + std::string(name) +
                                          "' (tracks_csv, tracks_json, tracks_binary, overlay_video)");
}

Session::Session(std::string id, SequenceSource source)
    : id_(std::move(id)), source_(std::move(source)), store_(source_.fps()) {}

Session::~Session() {
  {
    std::lock_guard lk(m_);
    stop_requested_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
  bus_.close_all();
}

nlohmann::json Session::info() const {
  std::lock_guard lk(m_);
  nlohmann::json tracker;
  if (tracker_) {
    nlohmann::json params = tracker_->params;
    tracker = {{"name", tracker_->name}, {"params", params}};
  }
  return {{"id", id_},
          {"source_dir", source_.directory().string()},
          {"pattern", source_.pattern().text()},
          {"frame_count", source_.frame_count()},
          {"width", source_.width()},
          {"height", source_.height()},
          {"fps", source_.fps()},
          {"run_state", run_state_name(state_)},
          {"tracker", tracker},
          {"last_frame", last_frame_ ? nlohmann::json(*last_frame_) : nlohmann::json()},
          {"last_error", last_error_ ? nlohmann::json(*last_error_) : nlohmann::json()},
          {"calibrated", calibration_.has_value()},
          {"track_count", store_.tracks().size()}};
}

RunState Session::state() const {
  std::lock_guard lk(m_);
  return state_;
}

Bytes Session::get_frame(std::int64_t index, bool overlay) const {
  Bytes raw = read_file(source_.path_of(index));
  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  const bool is_png = raw.size() >= 8 && std::equal(kPngSig, kPngSig + 8, raw.begin());
  if (!overlay && is_png) return raw;
  Image8 image = decode_image(raw);
  if (!overlay) return encode_png(image);
  const TrackStore store = snapshot();
  return encode_png(render_overlay(image, store, index));
}

void Session::require_not_tracking(const char* what) const {
  if (state_ == RunState::kTracking) {
    throw Error(ErrorCode::kBusy, std::string(what) + " is not allowed while tracking; pause first");
  }
}

void Session::publish_locked(Event e) {
  if (!e.extra.is_object()) e.extra = nlohmann::json::object();
  e.extra["session"] = id_;
  bus_.publish(e);
}

void Session::configure_tracker(const std::string& name, const nlohmann::json& params) {
  TrackerConfig config = tracker_config(name, params);
  TrackerRegistry::builtin().create(config.name, config.params);  // validates name and params
  std::lock_guard lk(m_);
  if (state_ != RunState::kIdle) throw Error(ErrorCode::kBusy, "cannot reconfigure the tracker during a run");
  pending_points_ = config.points;
  config.points.clear();
  tracker_ = std::move(config);
}

std::optional<TrackId> Session::add_point(PixelPoint p) {
  std::lock_guard lk(m_);
  require_not_tracking("adding points");
  if (state_ == RunState::kPaused && run_) {
    const TrackId id = run_->add_point(p, store_);
    if (last_frame_) {
      TrackPoint tp;
      tp.frame = *last_frame_;
      tp.pos_px = p;
      tp.source = PointSource::kManual;
      store_.ensure_track(id).points.insert_or_assign(tp.frame, tp);
    }
    publish_locked({"edit", last_frame_, 0, state_, {{"edit", {{"op", "designate_point"}, {"track", id}}}}});
    return id;
  }
  if (!tracker_) throw Error(ErrorCode::kValidation, "configure a tracker before designating points");
  TrackerRegistry::builtin().create(tracker_->name, tracker_->params)->add_point(p);  // supported?
  pending_points_.push_back(p);
  return std::nullopt;
}

void Session::run(std::optional<std::int64_t> from, std::optional<std::int64_t> to,
                  std::optional<std::int64_t> pause_at) {
  std::unique_lock lk(m_);
  if (state_ != RunState::kIdle || thread_active_) throw Error(ErrorCode::kBusy, "a run is already in progress");
  if (!tracker_) throw Error(ErrorCode::kValidation, "no tracker configured");
  const std::int64_t n = source_.frame_count();
  const std::int64_t a = from.value_or(0);
  const std::int64_t b = to.value_or(n - 1);
  if (a < 0 || b >= n || a > b) {
    throw Error(ErrorCode::kRange, "run range [" + std::to_string(a) + ", " + std::to_string(b) +
                                       "] invalid for " + std::to_string(n) + " frames");
  }
  if (pause_at && (*pause_at < a || *pause_at > b)) {
    throw Error(ErrorCode::kValidation, "pause_at must lie within the run range");
  }
  if (worker_.joinable()) worker_.join();  // previous run has already left its loop

  TrackerConfig config = *tracker_;
  config.points = pending_points_;
  run_ = std::make_unique<TrackingRun>(config, store_);
  pending_points_.clear();
  state_ = RunState::kTracking;
  stop_requested_ = false;
  thread_active_ = true;
  last_error_.reset();
  publish_locked({"state", std::nullopt, 0, state_, {{"from", a}, {"to", b}}});
  worker_ = std::thread([this, a, b, pause_at] { run_loop(a, b, pause_at); });
}

void Session::run_loop(std::int64_t from, std::int64_t to, std::optional<std::int64_t> pause_at) {
  std::string reason = "finished";
  for (std::int64_t i = from; i <= to; ++i) {
    std::unique_lock lk(m_);
    cv_.wait(lk, [&] { return state_ != RunState::kPaused || stop_requested_; });
    if (stop_requested_) {
      reason = "stopped";
      break;
    }
    std::size_t n = 0;
    try {
      n = run_->step(source_, i, store_);
    } catch (const std::exception& e) {
      last_error_ = e.what();
      reason = "error";
      publish_locked({"error", i, 0, state_, {{"message", e.what()}}});
      break;
    }
    last_frame_ = i;
    publish_locked({"progress", i, n, state_, nullptr});
    if (pause_at && i == *pause_at && i != to) {
      state_ = RunState::kPaused;
      publish_locked({"state", i, 0, state_, nullptr});
    }
  }
  std::lock_guard lk(m_);
  run_.reset();
  state_ = RunState::kIdle;
  stop_requested_ = false;
  thread_active_ = false;
  publish_locked({"state", last_frame_, 0, state_, {{"reason", reason}}});
  cv_.notify_all();
}

void Session::pause() {
  std::lock_guard lk(m_);
  if (state_ != RunState::kTracking) throw Error(ErrorCode::kSequence, "pause requires a running session");
  state_ = RunState::kPaused;
  publish_locked({"state", last_frame_, 0, state_, nullptr});
}

void Session::resume() {
  {
    std::lock_guard lk(m_);
    if (state_ != RunState::kPaused) throw Error(ErrorCode::kSequence, "resume requires a paused session");
    state_ = RunState::kTracking;
    publish_locked({"state", last_frame_, 0, state_, nullptr});
  }
  cv_.notify_all();
}

void Session::stop() {
  {
    std::lock_guard lk(m_);
    if (!thread_active_) return;
    stop_requested_ = true;
  }
  cv_.notify_all();
  wait_idle(std::chrono::hours(1));
}

bool Session::wait_idle(std::chrono::milliseconds timeout) {
  std::unique_lock lk(m_);
  return cv_.wait_for(lk, timeout, [&] { return !thread_active_; });
}

nlohmann::json Session::tracks_json() const {
  std::lock_guard lk(m_);
  return to_json(store_);
}

TrackStore Session::snapshot() const {
  std::lock_guard lk(m_);
  return store_;
}

EditCommand Session::edit(const EditCommand& cmd) {
  std::lock_guard lk(m_);
  require_not_tracking("editing");
  EditCommand inverse = apply_edit(store_, cmd);
  publish_locked({"edit", last_frame_, 0, state_, {{"edit", edit_to_json(cmd)}}});
  return inverse;
}

HomographyFit Session::set_calibration(const nlohmann::json& body) {
  Calibration c = calibration_from_json(body);
  const double rms = c.correspondences.empty() ? 0.0 : reprojection_rms(c.h, c.correspondences);
  std::lock_guard lk(m_);
  calibration_ = c;
  publish_locked({"calibration", last_frame_, 0, state_, {{"rms", rms}}});
  return {c.h, rms};
}

TrackStore Session::export_store_locked() const {
  TrackStore out = store_;
  if (calibration_) apply_rectification(out, calibration_->h);
  return out;
}

void Session::save(SaveKind what, const fs::path& path) {
  std::lock_guard lk(m_);
  require_not_tracking("saving");
  switch (what) {
    case SaveKind::kTracksCsv: save_store(export_store_locked(), StoreFormat::kCsv, path); break;
    case SaveKind::kTracksJson: save_store(export_store_locked(), StoreFormat::kJson, path); break;
    case SaveKind::kTracksBinary: save_store(export_store_locked(), StoreFormat::kBinary, path); break;
    case SaveKind::kOverlayVideo: render_sequence(source_, store_, path); break;
  }
  publish_locked({"saved", last_frame_, 0, state_, {{"path", path.string()}}});
}

std::string new_session_token() {
  static std::mutex m;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lk(m);
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buf;
}

std::shared_ptr<Session> SessionManager::create(const fs::path& source_dir, const std::string& pattern, double fps) {
  const std::string p = pattern.empty() ? FramePattern::detect(source_dir).text() : pattern;
  auto session = std::make_shared<Session>(new_session_token(), SequenceSource::open(source_dir, p, fps));
  std::lock_guard lk(m_);
  sessions_.emplace(session->id(), session);
  return session;
}

std::shared_ptr<Session> SessionManager::get(const std::string& id) const {
  std::lock_guard lk(m_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "unknown session '" + id + "'");
  return it->second;
}

bool SessionManager::remove(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lk(m_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return false;
    s = std::move(it->second);
    sessions_.erase(it);
  }
  s->stop();
  return true;
}

std::vector<std::string> SessionManager::ids() const {
  std::lock_guard lk(m_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

void SessionManager::shutdown() {
  std::map<std::string, std::shared_ptr<Session>> all;
  {
    std::lock_guard lk(m_);
    all.swap(sessions_);
  }
  for (auto& [_, s] : all) {
    s->stop();
    s->events().close_all();
  }
}

}  // namespace biotrack
