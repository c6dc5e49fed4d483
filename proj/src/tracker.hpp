#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "core.hpp"

namespace biotrack {

using TrackId = std::uint32_t;

enum class ParamKind { kInt, kReal, kBool, kEnum };

using ParamValue = std::variant<std::int64_t, double, bool, std::string>;

struct ParamSpec {
  std::string key;
  ParamKind kind = ParamKind::kReal;
  ParamValue default_value;
  std::optional<double> min;
  std::optional<double> max;
  bool min_exclusive = false;
  std::vector<std::string> variants;  // kEnum only
  std::string description;

  // Throws kValidation naming the key and its bounds.
  ParamValue validate(const nlohmann::json& value) const;
};

nlohmann::json param_value_to_json(const ParamValue& value);

struct TrackerDescriptor {
  std::string name;
  std::string display_name;
  std::vector<ParamSpec> params;
};

nlohmann::json descriptor_to_json(const TrackerDescriptor& descriptor);

// Defaults merged with validated overrides.
class ParamSet {
 public:
  ParamSet() = default;
  ParamSet(const TrackerDescriptor& descriptor, const nlohmann::json& overrides);

  double real(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  const std::string& choice(const std::string& key) const;
  const std::map<std::string, ParamValue>& values() const { return values_; }

 private:
  const ParamValue& get(const std::string& key) const;
  std::map<std::string, ParamValue> values_;
};

struct Detection {
  std::int64_t frame = 0;
  PixelPoint centroid;
  std::optional<double> orientation_rad;  // (-pi/2, pi/2] for ellipses
  std::optional<double> semi_major_px;
  std::optional<double> semi_minor_px;
  std::optional<double> area_px;
};

struct TrackedDetection {
  TrackId id = 0;
  Detection detection;
};

struct FrameResult {
  std::vector<TrackedDetection> detections;
  std::vector<TrackId> ended;  // tracks retired while processing this frame
};

// The contract every tracking module implements. Instances are stateful and
// must see frames in strictly increasing index order.
class Tracker {
 public:
  virtual ~Tracker() = default;

  FrameResult process_frame(const GrayFrame& frame, const FrameIndex& index);

  // Designates a point to follow, for trackers that support it.
  virtual TrackId add_point(PixelPoint p);

  const std::string& name() const { return name_; }
  const ParamSet& params() const { return params_; }

 protected:
  Tracker(std::string name, ParamSet params) : name_(std::move(name)), params_(std::move(params)) {}
  virtual FrameResult process(const GrayFrame& frame, const FrameIndex& index) = 0;

 private:
  std::string name_;
  ParamSet params_;
  std::optional<std::int64_t> last_index_;
};

class TrackerRegistry {
 public:
  using Factory = std::function<std::unique_ptr<Tracker>(ParamSet)>;

  // bgsub, lucas_kanade and demo, in that order.
  static const TrackerRegistry& builtin();

  void add(TrackerDescriptor descriptor, Factory factory);
  const std::vector<TrackerDescriptor>& list() const { return descriptors_; }
  const TrackerDescriptor& descriptor(const std::string& name) const;
  std::unique_ptr<Tracker> create(const std::string& name,
                                  const nlohmann::json& overrides = nlohmann::json::object()) const;
  std::string names() const;  // comma-separated, for messages

 private:
  std::vector<TrackerDescriptor> descriptors_;
  std::vector<Factory> factories_;
};

// Demo tracker: targets on a circle, independent of image content.
struct DemoParams {
  int n_targets = 3;
  double radius_px = 50.0;
  double angular_speed = 0.05;  // rad/frame
  PixelPoint center{128.0, 128.0};
};

std::vector<Detection> demo_step(const DemoParams& params, std::int64_t index);

TrackerDescriptor demo_descriptor();
std::unique_ptr<Tracker> make_demo_tracker(ParamSet params);

}  // namespace biotrack
