#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "image_io.hpp"
#include "track_store.hpp"

namespace biotrack {

enum class StoreFormat { kCsv, kJson, kBinary };

inline constexpr std::string_view kCsvHeader =
    "frame,time_s,id,x_px,y_px,x_world,y_world,orientation_rad,source,valid,annotation";
inline constexpr char kBinaryMagic[4] = {'B', 'T', 'R', 'K'};
inline constexpr std::uint16_t kBinaryVersion = 1;

// .csv, .json, .btrk (or .bin)
StoreFormat format_from_path(const std::filesystem::path& path);
StoreFormat parse_format(std::string_view name);

// CSV and binary files carry no fps or unit; these fill them in on load. When
// fps is unset, CSV loading infers it from the time_s column (default 25).
struct LoadOptions {
  std::optional<double> fps;
  std::optional<Unit> unit;
};

// One row per (track, frame) sorted by (frame, id). Track color, visibility
// and the ended flag are not part of the CSV schema.
std::string to_csv(const TrackStore& store);
TrackStore from_csv(std::string_view text, const LoadOptions& options = {});

nlohmann::json to_json(const TrackStore& store);
TrackStore from_json(const nlohmann::json& j);

Bytes to_binary(const TrackStore& store);
TrackStore from_binary(std::span<const std::uint8_t> bytes, const LoadOptions& options = {});

void save_store(const TrackStore& store, StoreFormat format, const std::filesystem::path& path);
TrackStore load_store(const std::filesystem::path& path, StoreFormat format, const LoadOptions& options = {});

}  // namespace biotrack
