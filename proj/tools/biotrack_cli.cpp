// biotrack command line front end. Links only the C API.
#include <csignal>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "biotrack/biotrack.h"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitIo = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code(bt_status s) {
  switch (s) {
    case BT_OK: return kExitOk;
    case BT_E_USAGE:
    case BT_E_NOT_FOUND:
    case BT_E_VALIDATION: return kExitUsage;
    case BT_E_IO: return kExitIo;
    default: return kExitData;
  }
}

int report(const std::string& cmd, bt_status s) {
  if (s != BT_OK) std::cerr << "biotrack " << cmd << ": error: " << bt_last_error() << "\n";
  return exit_code(s);
}

// Flags given on the command line, keyed like the config file.
class FlagSet {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *value, help);
    binders_.push_back([opt, value, key](json& out) {
      if (opt->count() > 0) out[key] = *value;
    });
    keys_.insert(key);
    return opt;
  }
  void allow(const std::string& key) { keys_.insert(key); }

  // Config file values, overridden by explicit flags.
  json merge(const std::string& config_path) const {
    json merged = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw IoFailure("--config: cannot open " + config_path);
      try {
        in >> merged;
      } catch (const json::exception& e) {
        throw UsageError("--config: " + config_path + " is not valid JSON: " + e.what());
      }
      if (!merged.is_object()) throw UsageError("--config: " + config_path + " must hold a JSON object");
      for (const auto& [k, _] : merged.items()) {
        if (!keys_.count(k)) throw UsageError("--config: unknown key '" + k + "' in " + config_path);
      }
    }
    for (const auto& b : binders_) b(merged);
    return merged;
  }

 private:
  std::vector<std::function<void(json&)>> binders_;
  std::set<std::string> keys_;
};

const json& need(const json& j, const std::string& key) {
  if (!j.contains(key) || j.at(key).is_null()) throw UsageError("--" + key + " is required");
  return j.at(key);
}

template <typename T>
T get(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError("--" + key + " has the wrong type");
  }
}

std::string get_str(const json& j, const std::string& key) {
  try {
    return need(j, key).get<std::string>();
  } catch (const json::exception&) {
    throw UsageError("--" + key + " must be a string");
  }
}

// "k=v": v is taken as JSON when it parses, else as a string.
json parse_params(const std::vector<std::string>& items, json base) {
  if (base.is_null()) base = json::object();
  if (!base.is_object()) throw UsageError("--config: params must be an object");
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param expects key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    json v = json::parse(text, nullptr, false);
    base[key] = v.is_discarded() ? json(text) : v;
  }
  return base;
}

std::vector<long long> split_numbers(const std::string& text, char sep, const std::string& flag) {
  std::vector<long long> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, sep)) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoll(part, &pos));
      if (pos != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + part + "' is not an integer");
    }
  }
  return out;
}

std::vector<double> split_reals(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(part, &pos));
      if (pos != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + part + "' is not a number");
    }
  }
  return out;
}

std::string read_text(const std::string& path, const std::string& flag) {
  std::ifstream in(path);
  if (!in) throw IoFailure(flag + ": cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_track(const json& m, const std::vector<std::string>& params) {
  const std::string in = get_str(m, "in");
  const std::string out = get_str(m, "out");
  const std::string tracker = get_str(m, "tracker");
  const std::string pattern = get<std::string>(m, "pattern", "");
  const double fps = get(m, "fps", 25.0);
  const json p = parse_params(params, m.value("params", json::object()));
  const bt_status s = bt_track_sequence(in.c_str(), pattern.c_str(), fps, tracker.c_str(), p.dump().c_str(),
                                        out.c_str(), nullptr, nullptr);
  if (s == BT_OK) std::cout << "wrote " << out << "\n";
  return report("track", s);
}

int run_analyze(const json& m) {
  const std::string in = get_str(m, "in");
  const std::string out = get_str(m, "out");
  json o = json::object();
  for (const char* k : {"q", "k", "max_lag", "strategy", "fps"}) {
    if (m.contains(k)) o[k] = m[k];
  }
  if (m.contains("map")) o["map"] = json::parse(read_text(get_str(m, "map"), "--map"), nullptr, false);
  if (o.contains("map") && o["map"].is_discarded()) throw UsageError("--map: not valid JSON");
  if (m.contains("slice")) {
    const auto v = split_numbers(get_str(m, "slice"), ':', "--slice");
    if (v.size() != 2) throw UsageError("--slice expects t0:t1");
    o["slice"] = v;
  }
  if (m.contains("rect")) {
    const auto v = split_reals(get_str(m, "rect"), "--rect");
    if (v.size() != 4) throw UsageError("--rect expects x0,y0,x1,y1");
    o["rect"] = v;
  }
  const bt_status s = bt_analyze(in.c_str(), o.dump().c_str(), out.c_str());
  if (s == BT_OK) std::cout << "wrote " << out << "\n";
  return report("analyze", s);
}

int run_rectify(const json& m) {
  const std::string tracks = get_str(m, "tracks");
  const std::string calib = get_str(m, "calib");
  const std::string out = get_str(m, "out");
  const bt_status s = bt_rectify(tracks.c_str(), calib.c_str(), out.c_str());
  if (s == BT_OK) std::cout << "wrote " << out << "\n";
  return report("rectify", s);
}

int run_render(const json& m) {
  const std::string in = get_str(m, "in");
  const std::string tracks = get_str(m, "tracks");
  const std::string out = get_str(m, "out");
  const std::string pattern = get<std::string>(m, "pattern", "");
  size_t n = 0;
  const bt_status s = bt_render(in.c_str(), pattern.c_str(), tracks.c_str(), out.c_str(), &n);
  if (s == BT_OK) std::cout << "wrote " << n << " frames to " << out << "\n";
  return report("render", s);
}

int run_gen(const json& m) {
  const std::string scene = get<std::string>(m, "scene", "disks");
  if (scene != "disks") throw UsageError("--scene: unknown scene '" + scene + "' (available: disks)");
  const std::string out = get_str(m, "out");
  json o = json::object();
  for (const char* k : {"n", "frames", "width", "height", "radius", "min_speed", "max_speed", "noise", "fps", "seed"}) {
    if (m.contains(k)) o[k] = m[k];
  }
  const bt_status s = bt_generate_disks(o.dump().c_str(), out.c_str());
  if (s == BT_OK) std::cout << "wrote " << out << "\n";
  return report("gen", s);
}

int run_serve(const json& m) {
  json o = {{"port", get(m, "port", 8080)}, {"bind", get<std::string>(m, "bind", "127.0.0.1")}};
  if (m.contains("static")) o["static_dir"] = get_str(m, "static");

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);  // server threads inherit the mask

  bt_server* server = nullptr;
  const bt_status s = bt_server_start(o.dump().c_str(), &server);
  if (s != BT_OK) return report("serve", s);
  std::cout << "listening on http://" << o["bind"].get<std::string>() << ":" << bt_server_port(server) << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  bt_server_stop(server);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"biotrack: multi-animal tracking, rectification and trajectory analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bt_version()));

  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON file with defaults for any flag (explicit flags win)");
  };

  FlagSet track_flags;
  std::vector<std::string> params;
  auto* track = app.add_subcommand("track", "run a tracker over a frame sequence");
  track_flags.add<std::string>(track, "--in", "in", "frame directory");
  track_flags.add<std::string>(track, "--pattern", "pattern", "filename pattern, e.g. frame_{NNNNN}.png (auto-detected)");
  track_flags.add<double>(track, "--fps", "fps", "frame rate (default 25)");
  track_flags.add<std::string>(track, "--tracker", "tracker", "tracker name (bgsub, lucas_kanade, demo)");
  track->add_option("--param", params, "tracker parameter key=value (repeatable)");
  track_flags.allow("params");
  track_flags.add<std::string>(track, "--out", "out", "output track file (.csv, .json or .btrk)");
  add_config(track);

  FlagSet analyze_flags;
  auto* analyze = app.add_subcommand("analyze", "compute speed, distance, cross-correlation and transfer entropy");
  analyze_flags.add<std::string>(analyze, "--in", "in", "track CSV");
  analyze_flags.add<std::string>(analyze, "--map", "map", "column mapping JSON for foreign CSV files");
  analyze_flags.add<int>(analyze, "--q", "q", "symbols for transfer entropy (default 8)");
  analyze_flags.add<int>(analyze, "--k", "k", "history length for transfer entropy (default 1)");
  analyze_flags.add<int>(analyze, "--max-lag", "max_lag", "largest cross-correlation lag (default 10)");
  analyze_flags.add<std::string>(analyze, "--strategy", "strategy", "binning: quantile or uniform");
  analyze_flags.add<double>(analyze, "--fps", "fps", "frame rate (default: inferred from time_s)");
  analyze_flags.add<std::string>(analyze, "--slice", "slice", "frame range t0:t1");
  analyze_flags.add<std::string>(analyze, "--rect", "rect", "region x0,y0,x1,y1");
  analyze_flags.add<std::string>(analyze, "--out", "out", "output directory");
  add_config(analyze);

  FlagSet rectify_flags;
  auto* rectify = app.add_subcommand("rectify", "fill world coordinates from a calibration");
  rectify_flags.add<std::string>(rectify, "--tracks", "tracks", "input track file");
  rectify_flags.add<std::string>(rectify, "--calib", "calib", "calibration JSON");
  rectify_flags.add<std::string>(rectify, "--out", "out", "output track file");
  add_config(rectify);

  FlagSet render_flags;
  auto* render = app.add_subcommand("render", "write the overlay PNG sequence");
  render_flags.add<std::string>(render, "--in", "in", "frame directory");
  render_flags.add<std::string>(render, "--pattern", "pattern", "filename pattern (auto-detected)");
  render_flags.add<std::string>(render, "--tracks", "tracks", "track file");
  render_flags.add<std::string>(render, "--out", "out", "output directory");
  add_config(render);

  FlagSet serve_flags;
  auto* serve = app.add_subcommand("serve", "start the HTTP/WebSocket service");
  serve_flags.add<int>(serve, "--port", "port", "TCP port (default 8080, 0 = any)");
  serve_flags.add<std::string>(serve, "--bind", "bind", "listen address (default 127.0.0.1)");
  serve_flags.add<std::string>(serve, "--static", "static", "directory of UI assets");
  add_config(serve);

  FlagSet gen_flags;
  auto* gen = app.add_subcommand("gen", "write a synthetic scene with ground truth");
  gen_flags.add<std::string>(gen, "--scene", "scene", "scene type (disks)");
  gen_flags.add<int>(gen, "--n", "n", "number of disks (default 3)");
  gen_flags.add<long long>(gen, "--frames", "frames", "number of frames (default 200)");
  gen_flags.add<int>(gen, "--width", "width", "frame width (default 512)");
  gen_flags.add<int>(gen, "--height", "height", "frame height (default 512)");
  gen_flags.add<double>(gen, "--radius", "radius", "disk radius in px (default 8)");
  gen_flags.add<double>(gen, "--min-speed", "min_speed", "px/frame (default 1)");
  gen_flags.add<double>(gen, "--max-speed", "max_speed", "px/frame (default 3)");
  gen_flags.add<double>(gen, "--noise", "noise", "Gaussian noise sigma (default 0)");
  gen_flags.add<double>(gen, "--fps", "fps", "frame rate (default 25)");
  gen_flags.add<unsigned long long>(gen, "--seed", "seed", "random seed (default 1)");
  gen_flags.add<std::string>(gen, "--out", "out", "output directory");
  add_config(gen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*track) return run_track(track_flags.merge(config_path), params);
    if (*analyze) return run_analyze(analyze_flags.merge(config_path));
    if (*rectify) return run_rectify(rectify_flags.merge(config_path));
    if (*render) return run_render(render_flags.merge(config_path));
    if (*serve) return run_serve(serve_flags.merge(config_path));
    if (*gen) return run_gen(gen_flags.merge(config_path));
  } catch (const UsageError& e) {
    std::cerr << "biotrack: error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoFailure& e) {
    std::cerr << "biotrack: error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
