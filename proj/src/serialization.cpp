#include "serialization.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <tuple>

#include "csv.hpp"

namespace fs = std::filesystem;

namespace biotrack {
namespace {

constexpr int kCsvColumns = 11;

// Binary point flags.
constexpr std::uint8_t kHasWorld = 1u << 0;
constexpr std::uint8_t kHasOrientation = 1u << 1;
constexpr std::uint8_t kValid = 1u << 2;
constexpr int kSourceShift = 3;
constexpr std::uint8_t kSourceMask = 0x3u << kSourceShift;
// Binary track state byte.
constexpr std::uint8_t kTrackEnded = 1u << 0;
constexpr std::uint8_t kTrackHidden = 1u << 1;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put_le(v); }
  void u32(std::uint32_t v) { put_le(v); }
  void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }
  void raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  Bytes take() { return std::move(out_); }

 private:
  template <typename T>
  void put_le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  Bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get_le<1>()); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get_le<2>()); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get_le<4>()); }
  double f64() { return std::bit_cast<double>(get_le<8>()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::kParse, "binary track file truncated at offset " + std::to_string(pos_));
    }
  }
  template <std::size_t N>
  std::uint64_t get_le() {
    need(N);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < N; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += N;
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

double infer_fps(const std::vector<csv::Row>& rows) {
  // Largest frame number gives the best-conditioned estimate.
  long long best_frame = 0;
  double best_time = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    if (f[1].empty()) continue;
    const long long frame = csv::parse_integer(f[0], rows[i].line, "frame");
    const double time = csv::parse_real(f[1], rows[i].line, "time_s");
    if (frame > best_frame && time > 0.0) {
      best_frame = frame;
      best_time = time;
    }
  }
  if (best_frame == 0) return 25.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", static_cast<double>(best_frame) / best_time);
  return std::strtod(buf, nullptr);
}

}  // namespace

StoreFormat format_from_path(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".csv") return StoreFormat::kCsv;
  if (ext == ".json") return StoreFormat::kJson;
  if (ext == ".btrk" || ext == ".bin") return StoreFormat::kBinary;
  throw Error(ErrorCode::kUsage, "cannot infer track format from '" + path.string() +
                                     "' (use .csv, .json or .btrk)");
}

StoreFormat parse_format(std::string_view name) {
  if (name == "csv") return StoreFormat::kCsv;
  if (name == "json") return StoreFormat::kJson;
  if (name == "binary" || name == "btrk") return StoreFormat::kBinary;
  throw Error(ErrorCode::kUsage, "unknown track format '" + std::string(name) + "'");
}

std::string to_csv(const TrackStore& store) {
  std::vector<std::tuple<std::int64_t, TrackId, const TrackPoint*>> rows;
  rows.reserve(store.point_count());
  for (const auto& [id, t] : store.tracks()) {
    for (const auto& [frame, p] : t.points) rows.emplace_back(frame, id, &p);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });

  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& [frame, id, p] : rows) {
    out += std::to_string(frame);
    out += ',';
    out += csv::format_real(static_cast<double>(frame) / store.fps());
    out += ',';
    out += std::to_string(id);
    out += ',';
    out += csv::format_real(p->pos_px.x);
    out += ',';
    out += csv::format_real(p->pos_px.y);
    out += ',';
    if (p->pos_world) out += csv::format_real(p->pos_world->x);
    out += ',';
    if (p->pos_world) out += csv::format_real(p->pos_world->y);
    out += ',';
    if (p->orientation_rad) out += csv::format_real(*p->orientation_rad);
    out += ',';
    out += source_name(p->source);
    out += ',';
    out += p->valid ? '1' : '0';
    out += ',';
    if (p->annotation) out += csv::escape(*p->annotation);
    out += '\n';
  }
  return out;
}

TrackStore from_csv(std::string_view text, const LoadOptions& options) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw Error(ErrorCode::kParse, "line 1: missing CSV header");
  std::string header;
  for (const auto& f : rows[0].fields) header += (header.empty() ? "" : ",") + f;
  if (header != kCsvHeader) {
    throw Error(ErrorCode::kParse, "line 1: unexpected CSV header '" + header + "'");
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].fields.size() != kCsvColumns) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(rows[i].line) + ": expected " +
                                         std::to_string(kCsvColumns) + " fields, got " +
                                         std::to_string(rows[i].fields.size()));
    }
  }

  TrackStore store(options.fps ? *options.fps : infer_fps(rows), options.unit.value_or(Unit::kPx));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    const std::size_t line = rows[i].line;
    TrackPoint p;
    p.frame = csv::parse_integer(f[0], line, "frame");
    if (p.frame < 0) throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": negative frame");
    const long long id = csv::parse_integer(f[2], line, "id");
    if (id < 1 || id > 0xffffffffLL) throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": bad id");
    p.pos_px = {csv::parse_real(f[3], line, "x_px"), csv::parse_real(f[4], line, "y_px")};
    if (f[5].empty() != f[6].empty()) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": x_world and y_world must both be set or empty");
    }
    if (!f[5].empty()) {
      p.pos_world = WorldPoint{csv::parse_real(f[5], line, "x_world"), csv::parse_real(f[6], line, "y_world"), store.unit()};
    }
    if (!f[7].empty()) p.orientation_rad = csv::parse_real(f[7], line, "orientation_rad");
    try {
      p.source = parse_source(f[8]);
    } catch (const Error&) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": unknown source '" + f[8] + "'");
    }
    if (f[9] != "0" && f[9] != "1") {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": valid must be 0 or 1");
    }
    p.valid = f[9] == "1";
    if (!f[10].empty()) p.annotation = f[10];
    Trajectory& t = store.ensure_track(static_cast<TrackId>(id));
    if (!t.points.emplace(p.frame, p).second) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": duplicate point for track " +
                                         std::to_string(id) + " at frame " + std::to_string(p.frame));
    }
  }
  return store;
}

nlohmann::json to_json(const TrackStore& store) {
  nlohmann::json tracks = nlohmann::json::array();
  for (const auto& [_, t] : store.tracks()) tracks.push_back(trajectory_to_json(t));
  return {{"version", 1}, {"fps", store.fps()}, {"unit", unit_name(store.unit())}, {"tracks", std::move(tracks)}};
}

TrackStore from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1) {
      throw Error(ErrorCode::kVersion, "unsupported track JSON version " + j.at("version").dump());
    }
    TrackStore store(j.at("fps").get<double>(), parse_unit(j.value("unit", std::string("px"))));
    for (const auto& tj : j.at("tracks")) {
      Trajectory t = trajectory_from_json(tj, store.unit());
      if (store.has_track(t.id)) throw Error(ErrorCode::kParse, "duplicate track id " + std::to_string(t.id));
      store.insert_track(std::move(t));
    }
    return store;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed track JSON: ") + e.what());
  }
}

Bytes to_binary(const TrackStore& store) {
  ByteWriter w;
  w.raw(kBinaryMagic, 4);
  w.u16(kBinaryVersion);
  w.u32(static_cast<std::uint32_t>(store.tracks().size()));
  for (const auto& [id, t] : store.tracks()) {
    w.u32(id);
    w.u32(static_cast<std::uint32_t>(t.points.size()));
    w.u8(t.color.r);
    w.u8(t.color.g);
    w.u8(t.color.b);
    w.u8(t.color.a);
    w.u8(static_cast<std::uint8_t>((t.ended ? kTrackEnded : 0) | (t.visible ? 0 : kTrackHidden)));
    for (const auto& [frame, p] : t.points) {
      if (frame > 0xffffffffLL) throw Error(ErrorCode::kValidation, "frame number exceeds binary format range");
      if (p.annotation && p.annotation->size() > 0xffff) {
        throw Error(ErrorCode::kValidation, "annotation longer than 65535 bytes");
      }
      w.u32(static_cast<std::uint32_t>(frame));
      w.f64(p.pos_px.x);
      w.f64(p.pos_px.y);
      std::uint8_t flags = static_cast<std::uint8_t>(static_cast<std::uint8_t>(p.source) << kSourceShift);
      if (p.pos_world) flags |= kHasWorld;
      if (p.orientation_rad) flags |= kHasOrientation;
      if (p.valid) flags |= kValid;
      w.u8(flags);
      if (p.pos_world) {
        w.f64(p.pos_world->x);
        w.f64(p.pos_world->y);
      }
      if (p.orientation_rad) w.f64(*p.orientation_rad);
      const std::string& text = p.annotation ? *p.annotation : std::string();
      w.u16(static_cast<std::uint16_t>(text.size()));
      w.raw(text.data(), text.size());
    }
  }
  return w.take();
}

TrackStore from_binary(std::span<const std::uint8_t> bytes, const LoadOptions& options) {
  ByteReader r(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kBinaryMagic, 4) != 0) {
    throw Error(ErrorCode::kParse, "not a binary track file (missing BTRK magic)");
  }
  r.str(4);
  const std::uint16_t version = r.u16();
  if (version != kBinaryVersion) {
    throw Error(ErrorCode::kVersion, "binary track file version " + std::to_string(version) +
                                         " is not supported (expected " + std::to_string(kBinaryVersion) + ")");
  }
  TrackStore store(options.fps.value_or(25.0), options.unit.value_or(Unit::kPx));
  const std::uint32_t track_count = r.u32();
  for (std::uint32_t i = 0; i < track_count; ++i) {
    const std::size_t track_offset = r.offset();
    Trajectory t;
    t.id = r.u32();
    if (t.id == 0 || store.has_track(t.id)) {
      throw Error(ErrorCode::kParse, "invalid or duplicate track id at offset " + std::to_string(track_offset));
    }
    const std::uint32_t point_count = r.u32();
    t.color = {r.u8(), r.u8(), r.u8(), r.u8()};
    const std::uint8_t state = r.u8();
    t.ended = (state & kTrackEnded) != 0;
    t.visible = (state & kTrackHidden) == 0;
    for (std::uint32_t k = 0; k < point_count; ++k) {
      const std::size_t point_offset = r.offset();
      TrackPoint p;
      p.frame = r.u32();
      p.pos_px = {r.f64(), r.f64()};
      const std::uint8_t flags = r.u8();
      const int source = (flags & kSourceMask) >> kSourceShift;
      if (source > 2 || (flags & 0xe0) != 0) {
        throw Error(ErrorCode::kParse, "bad point flags at offset " + std::to_string(point_offset));
      }
      p.source = static_cast<PointSource>(source);
      p.valid = (flags & kValid) != 0;
      if (flags & kHasWorld) {
        const double x = r.f64();
        const double y = r.f64();
        p.pos_world = WorldPoint{x, y, store.unit()};
      }
      if (flags & kHasOrientation) p.orientation_rad = r.f64();
      const std::uint16_t len = r.u16();
      std::string text = r.str(len);
      if (!text.empty()) p.annotation = std::move(text);
      if (!t.points.emplace(p.frame, p).second) {
        throw Error(ErrorCode::kParse, "duplicate frame at offset " + std::to_string(point_offset));
      }
    }
    store.insert_track(std::move(t));
  }
  if (!r.at_end()) {
    throw Error(ErrorCode::kParse, "trailing bytes after offset " + std::to_string(r.offset()));
  }
  return store;
}

void save_store(const TrackStore& store, StoreFormat format, const fs::path& path) {
  switch (format) {
    case StoreFormat::kCsv: spill(path, to_csv(store)); return;
    case StoreFormat::kJson: spill(path, to_json(store).dump(1) + "\n"); return;
    case StoreFormat::kBinary: write_file(path, to_binary(store)); return;
  }
}

TrackStore load_store(const fs::path& path, StoreFormat format, const LoadOptions& options) {
  const std::string text = slurp(path);
  try {
    switch (format) {
      case StoreFormat::kCsv: return from_csv(text, options);
      case StoreFormat::kJson: {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
          throw Error(ErrorCode::kParse, std::string("byte ") + std::to_string(e.byte) + ": " + e.what());
        }
        return from_json(j);
      }
      case StoreFormat::kBinary:
        return from_binary(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), options);
    }
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
  throw Error(ErrorCode::kInternal, "unreachable");
}

}  // namespace biotrack
