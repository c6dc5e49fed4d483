#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "frame_source.hpp"
#include "pipeline.hpp"
#include "rectification.hpp"
#include "track_store.hpp"

namespace biotrack {

enum class RunState { kIdle, kTracking, kPaused };
std::string_view run_state_name(RunState state);

struct Event {
  std::string type;  // progress, state, edit, calibration, saved
  std::optional<std::int64_t> frame;
  std::size_t detections = 0;
  RunState run_state = RunState::kIdle;
  nlohmann::json extra;  // merged into the JSON form when an object

  nlohmann::json to_json() const;
};

// Unbounded FIFO for one subscriber.
class Subscription {
 public:
  // Next event, or nullopt on timeout or once closed and drained.
  std::optional<Event> next(std::chrono::milliseconds timeout);
  void close();
  bool closed() const;

 private:
  friend class EventBus;
  void push(const Event& e);

  mutable std::mutex m_;
  std::condition_variable cv_;
  std::deque<Event> queue_;
  bool closed_ = false;
};

class EventBus {
 public:
  // Receives events published after this call.
  std::shared_ptr<Subscription> subscribe();
  void publish(const Event& e);
  void close_all();

 private:
  std::mutex m_;
  std::vector<std::weak_ptr<Subscription>> subs_;
};

enum class SaveKind { kTracksCsv, kTracksJson, kTracksBinary, kOverlayVideo };
SaveKind parse_save_kind(std::string_view name);

// One source, one store, at most one tracking run. All mutators (run steps,
// edits, saves) serialize on the session lock; frame reads do not take it.
class Session {
 public:
  Session(std::string id, SequenceSource source);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const { return id_; }
  nlohmann::json info() const;
  RunState state() const;

  // overlay=false returns the source file bytes when it is a PNG.
  Bytes get_frame(std::int64_t index, bool overlay) const;

  void configure_tracker(const std::string& name, const nlohmann::json& params);
  // Live id when a run is paused, otherwise queued for the next run.
  std::optional<TrackId> add_point(PixelPoint p);

  // Frames from..to inclusive on a background thread. With pause_at the run
  // pauses after processing that frame.
  void run(std::optional<std::int64_t> from, std::optional<std::int64_t> to, std::optional<std::int64_t> pause_at);
  void pause();
  void resume();
  void stop();
  // Blocks until the run thread has finished; false on timeout.
  bool wait_idle(std::chrono::milliseconds timeout);

  nlohmann::json tracks_json() const;
  TrackStore snapshot() const;
  EditCommand edit(const EditCommand& cmd);
  HomographyFit set_calibration(const nlohmann::json& body);
  void save(SaveKind what, const std::filesystem::path& path);

  EventBus& events() { return bus_; }

 private:
  void run_loop(std::int64_t from, std::int64_t to, std::optional<std::int64_t> pause_at);
  void require_not_tracking(const char* what) const;  // caller holds m_
  void publish_locked(Event e);
  TrackStore export_store_locked() const;

  const std::string id_;
  const SequenceSource source_;

  mutable std::mutex m_;
  std::condition_variable cv_;
  TrackStore store_;
  std::optional<TrackerConfig> tracker_;
  std::vector<PixelPoint> pending_points_;
  std::unique_ptr<TrackingRun> run_;
  std::optional<Calibration> calibration_;
  RunState state_ = RunState::kIdle;
  bool stop_requested_ = false;
  bool thread_active_ = false;
  std::optional<std::int64_t> last_frame_;
  std::optional<std::string> last_error_;
  std::thread worker_;

  EventBus bus_;
};

class SessionManager {
 public:
  std::shared_ptr<Session> create(const std::filesystem::path& source_dir, const std::string& pattern, double fps);
  std::shared_ptr<Session> get(const std::string& id) const;
  bool remove(const std::string& id);
  std::vector<std::string> ids() const;
  void shutdown();

 private:
  mutable std::mutex m_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

// 16 random bytes as 32 lowercase hex digits.
std::string new_session_token();

}  // namespace biotrack
