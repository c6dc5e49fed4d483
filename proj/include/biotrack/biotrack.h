/* biotrack C API. All strings are UTF-8, NUL-terminated. Functions return a
 * bt_status; on failure bt_last_error() describes the problem for the calling
 * thread. Strings and buffers handed out must be released with bt_free. */
#ifndef BIOTRACK_BIOTRACK_H
#define BIOTRACK_BIOTRACK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(BIOTRACK_BUILD)
#    define BT_API __declspec(dllexport)
#  else
#    define BT_API __declspec(dllimport)
#  endif
#else
#  define BT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bt_status {
  BT_OK = 0,
  BT_E_USAGE = 1,
  BT_E_NOT_FOUND = 2,
  BT_E_VALIDATION = 3,
  BT_E_DATA = 4,
  BT_E_IO = 5,
  BT_E_RANGE = 6,
  BT_E_SEQUENCE = 7,
  BT_E_BUSY = 8,
  BT_E_DEGENERATE = 9,
  BT_E_PARSE = 10,
  BT_E_VERSION = 11,
  BT_E_INTERNAL = 12
} bt_status;

typedef struct bt_store bt_store;
typedef struct bt_server bt_server;

/* Called once per processed frame. */
typedef void (*bt_progress_fn)(int64_t frame, size_t detections, void* user);

BT_API const char* bt_version(void);
BT_API const char* bt_status_name(bt_status status);
BT_API const char* bt_last_error(void);
BT_API void bt_free(void* p);

/* JSON array of tracker descriptors. */
BT_API bt_status bt_list_trackers(char** json_out);

/* options: {"n":3,"frames":200,"width":512,"height":512,"radius":8,
 *           "min_speed":1,"max_speed":3,"noise":0,"fps":25,"seed":1} (all optional).
 * Writes frame_NNNNN.png and truth.csv into out_dir. */
BT_API bt_status bt_generate_disks(const char* options_json, const char* out_dir);

/* pattern may be NULL or "" to auto-detect. params_json may be NULL.
 * The output format follows the extension of out_path. */
BT_API bt_status bt_track_sequence(const char* in_dir, const char* pattern, double fps, const char* tracker,
                                   const char* params_json, const char* out_path, bt_progress_fn progress,
                                   void* user);

/* options: {"q":8,"k":1,"max_lag":10,"strategy":"quantile","fps":25,
 *           "map":{"frame":..,"id":..,"x":..,"y":..},
 *           "slice":[t0,t1],"rect":[x0,y0,x1,y1]} (all optional). */
BT_API bt_status bt_analyze(const char* in_path, const char* options_json, const char* out_dir);

BT_API bt_status bt_rectify(const char* tracks_path, const char* calibration_path, const char* out_path);

/* Writes one overlay PNG per frame; returns the count in *frames_out (may be NULL). */
BT_API bt_status bt_render(const char* in_dir, const char* pattern, const char* tracks_path, const char* out_dir,
                           size_t* frames_out);

/* Track store handle. options_json for load: {"fps":25,"unit":"cm"} or NULL. */
BT_API bt_status bt_store_load(const char* path, const char* options_json, bt_store** out);
BT_API bt_status bt_store_save(const bt_store* store, const char* path);
BT_API bt_status bt_store_to_json(const bt_store* store, char** json_out);
/* Applies an edit command (JSON) and returns its inverse (JSON). */
BT_API bt_status bt_store_apply_edit(bt_store* store, const char* edit_json, char** inverse_out);
BT_API size_t bt_store_track_count(const bt_store* store);
BT_API void bt_store_free(bt_store* store);

/* options: {"bind":"127.0.0.1","port":8080,"static_dir":null}. Port 0 picks a free port. */
BT_API bt_status bt_server_start(const char* options_json, bt_server** out);
BT_API int bt_server_port(const bt_server* server);
BT_API void bt_server_stop(bt_server* server);

#ifdef __cplusplus
}
#endif

#endif /* BIOTRACK_BIOTRACK_H */
