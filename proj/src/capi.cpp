#include "biotrack/biotrack.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "pipeline.hpp"
#include "server.hpp"

using namespace biotrack;

struct bt_store {
  TrackStore store;
};

struct bt_server {
  std::unique_ptr<Server> server;
};

namespace {

thread_local std::string g_last_error;

bt_status fail(bt_status s, const std::string& message) {
  g_last_error = message;
  return s;
}

template <typename F>
bt_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return BT_OK;
  } catch (const Error& e) {
    return fail(static_cast<bt_status>(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(BT_E_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(BT_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(BT_E_INTERNAL, e.what());
  } catch (...) {
    return fail(BT_E_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void require(const void* p, const char* name) {
  if (!p) throw Error(ErrorCode::kUsage, std::string(name) + " must not be NULL");
}

nlohmann::json parse_options(const char* text) {
  if (!text || !*text) return nlohmann::json::object();
  try {
    auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::kParse, "options must be a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("options are not valid JSON: ") + e.what());
  }
}

template <typename T>
T opt(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kUsage, std::string("option '") + key + "' has the wrong type");
  }
}

std::string resolve_pattern(const char* in_dir, const char* pattern) {
  if (pattern && *pattern) return pattern;
  return FramePattern::detect(in_dir).text();
}

}  // namespace

extern "C" {

const char* bt_version(void) { return "1.0.0"; }

const char* bt_status_name(bt_status status) {
  if (status == BT_OK) return "ok";
  return error_code_name(static_cast<ErrorCode>(status));
}

const char* bt_last_error(void) { return g_last_error.c_str(); }

void bt_free(void* p) { std::free(p); }

bt_status bt_list_trackers(char** json_out) {
  return guarded([&] {
    require(json_out, "json_out");
    nlohmann::json list = nlohmann::json::array();
    for (const auto& d : TrackerRegistry::builtin().list()) list.push_back(descriptor_to_json(d));
    *json_out = dup_string(list.dump());
  });
}

bt_status bt_generate_disks(const char* options_json, const char* out_dir) {
  return guarded([&] {
    require(out_dir, "out_dir");
    const auto o = parse_options(options_json);
    DiskSceneConfig c;
    c.disks = opt(o, "n", c.disks);
    c.frames = opt(o, "frames", c.frames);
    c.width = opt(o, "width", c.width);
    c.height = opt(o, "height", c.height);
    c.radius = opt(o, "radius", c.radius);
    c.min_speed = opt(o, "min_speed", c.min_speed);
    c.max_speed = opt(o, "max_speed", c.max_speed);
    c.noise_sigma = opt(o, "noise", c.noise_sigma);
    c.fps = opt(o, "fps", c.fps);
    c.seed = opt(o, "seed", c.seed);
    write_disk_scene(c, out_dir);
  });
}

bt_status bt_track_sequence(const char* in_dir, const char* pattern, double fps, const char* tracker,
                            const char* params_json, const char* out_path, bt_progress_fn progress, void* user) {
  return guarded([&] {
    require(in_dir, "in_dir");
    require(tracker, "tracker");
    require(out_path, "out_path");
    const StoreFormat format = format_from_path(out_path);
    const TrackerConfig config = tracker_config(tracker, parse_options(params_json));
    TrackerRegistry::builtin().create(config.name, config.params);  // fail on bad name or params before I/O
    const SequenceSource source = SequenceSource::open(in_dir, resolve_pattern(in_dir, pattern), fps);
    ProgressFn cb;
    if (progress) cb = [&](std::int64_t f, std::size_t n) { progress(f, n, user); };
    save_store(track_sequence(source, config, cb), format, out_path);
  });
}

bt_status bt_analyze(const char* in_path, const char* options_json, const char* out_dir) {
  return guarded([&] {
    require(in_path, "in_path");
    require(out_dir, "out_dir");
    const auto o = parse_options(options_json);
    AnalyzeOptions a;
    a.config.q = opt(o, "q", a.config.q);
    a.config.k = opt(o, "k", a.config.k);
    a.config.max_lag = opt(o, "max_lag", a.config.max_lag);
    a.config.strategy = parse_bin_strategy(opt<std::string>(o, "strategy", "quantile"));
    if (a.config.q < 2) throw Error(ErrorCode::kUsage, "q must be >= 2");
    if (a.config.k < 1) throw Error(ErrorCode::kUsage, "k must be >= 1");
    if (a.config.max_lag < 0) throw Error(ErrorCode::kUsage, "max_lag must be >= 0");
    if (o.contains("fps") && !o["fps"].is_null()) a.fps = opt(o, "fps", 25.0);
    if (o.contains("map") && !o["map"].is_null()) a.mapping = column_mapping_from_json(o["map"]);
    if (o.contains("slice") && !o["slice"].is_null()) {
      const auto s = opt<std::vector<std::int64_t>>(o, "slice", {});
      if (s.size() != 2) throw Error(ErrorCode::kUsage, "slice needs two frame numbers");
      a.slice.frame_from = s[0];
      a.slice.frame_to = s[1];
    }
    if (o.contains("rect") && !o["rect"].is_null()) {
      const auto r = opt<std::vector<double>>(o, "rect", {});
      if (r.size() != 4) throw Error(ErrorCode::kUsage, "rect needs x0,y0,x1,y1");
      a.slice.rect = SliceRect{r[0], r[1], r[2], r[3], false};
    }
    a.slice.validate();
    analyze_file(in_path, a, out_dir);
  });
}

bt_status bt_rectify(const char* tracks_path, const char* calibration_path, const char* out_path) {
  return guarded([&] {
    require(tracks_path, "tracks_path");
    require(calibration_path, "calibration_path");
    require(out_path, "out_path");
    rectify_file(tracks_path, calibration_path, out_path);
  });
}

bt_status bt_render(const char* in_dir, const char* pattern, const char* tracks_path, const char* out_dir,
                    size_t* frames_out) {
  return guarded([&] {
    require(in_dir, "in_dir");
    require(tracks_path, "tracks_path");
    require(out_dir, "out_dir");
    const TrackStore store = load_store(tracks_path, format_from_path(tracks_path));
    const SequenceSource source = SequenceSource::open(in_dir, resolve_pattern(in_dir, pattern), store.fps());
    const std::size_t n = render_sequence(source, store, out_dir);
    if (frames_out) *frames_out = n;
  });
}

bt_status bt_store_load(const char* path, const char* options_json, bt_store** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    const auto o = parse_options(options_json);
    LoadOptions lo;
    if (o.contains("fps")) lo.fps = opt(o, "fps", 25.0);
    if (o.contains("unit")) lo.unit = parse_unit(opt<std::string>(o, "unit", "px"));
    auto h = std::make_unique<bt_store>();
    h->store = load_store(path, format_from_path(path), lo);
    *out = h.release();
  });
}

bt_status bt_store_save(const bt_store* store, const char* path) {
  return guarded([&] {
    require(store, "store");
    require(path, "path");
    save_store(store->store, format_from_path(path), path);
  });
}

bt_status bt_store_to_json(const bt_store* store, char** json_out) {
  return guarded([&] {
    require(store, "store");
    require(json_out, "json_out");
    *json_out = dup_string(to_json(store->store).dump());
  });
}

bt_status bt_store_apply_edit(bt_store* store, const char* edit_json, char** inverse_out) {
  return guarded([&] {
    require(store, "store");
    require(edit_json, "edit_json");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(edit_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kParse, std::string("edit is not valid JSON: ") + e.what());
    }
    const EditCommand inverse = apply_edit(store->store, edit_from_json(j));
    if (inverse_out) *inverse_out = dup_string(edit_to_json(inverse).dump());
  });
}

size_t bt_store_track_count(const bt_store* store) { return store ? store->store.tracks().size() : 0; }

void bt_store_free(bt_store* store) { delete store; }

bt_status bt_server_start(const char* options_json, bt_server** out) {
  return guarded([&] {
    require(out, "out");
    const auto o = parse_options(options_json);
    ServerOptions so;
    so.bind = opt<std::string>(o, "bind", so.bind);
    const int port = opt(o, "port", static_cast<int>(so.port));
    if (port < 0 || port > 65535) throw Error(ErrorCode::kUsage, "port must be in [0, 65535]");
    so.port = static_cast<unsigned short>(port);
    const std::string static_dir = opt<std::string>(o, "static_dir", "");
    if (!static_dir.empty()) so.static_dir = static_dir;
    auto h = std::make_unique<bt_server>();
    h->server = std::make_unique<Server>(so);
    h->server->start();
    *out = h.release();
  });
}

int bt_server_port(const bt_server* server) { return server ? server->server->port() : -1; }

void bt_server_stop(bt_server* server) {
  if (!server) return;
  server->server->stop();
  delete server;
}

}  // extern "C"
