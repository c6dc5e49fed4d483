#include "tracker.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bgsub.hpp"
#include "lucas_kanade.hpp"

namespace biotrack {
namespace {

std::string bounds_text(const ParamSpec& spec) {
  std::ostringstream os;
  os << (spec.min_exclusive ? "(" : "[");
  if (spec.min) os << *spec.min; else os << "-inf";
  os << ", ";
  if (spec.max) os << *spec.max; else os << "inf";
  os << "]";
  return os.str();
}

[[noreturn]] void reject(const ParamSpec& spec, const std::string& why) {
  throw Error(ErrorCode::kValidation, "parameter '" + spec.key + "': " + why);
}

void check_range(const ParamSpec& spec, double v) {
  const bool below = spec.min && (spec.min_exclusive ? v <= *spec.min : v < *spec.min);
  const bool above = spec.max && v > *spec.max;
  if (below || above || !std::isfinite(v)) {
    std::ostringstream os;
    os << "value " << v << " outside " << bounds_text(spec);
    reject(spec, os.str());
  }
}

}  // namespace

ParamValue ParamSpec::validate(const nlohmann::json& value) const {
  switch (kind) {
    case ParamKind::kInt: {
      if (!value.is_number()) reject(*this, "expected an integer");
      const double d = value.get<double>();
      if (value.is_number_float() && d != std::floor(d)) reject(*this, "expected an integer");
      check_range(*this, d);
      return static_cast<std::int64_t>(d);
    }
    case ParamKind::kReal: {
      if (!value.is_number()) reject(*this, "expected a number");
      const double d = value.get<double>();
      check_range(*this, d);
      return d;
    }
    case ParamKind::kBool:
      if (!value.is_boolean()) reject(*this, "expected true or false");
      return value.get<bool>();
    case ParamKind::kEnum: {
      if (!value.is_string()) reject(*this, "expected a string");
      const auto s = value.get<std::string>();
      for (const auto& v : variants) {
        if (v == s) return s;
      }
      std::string options;
      for (const auto& v : variants) options += (options.empty() ? "" : ", ") + v;
      reject(*this, "'" + s + "' not one of {" + options + "}");
    }
  }
  reject(*this, "unknown kind");
}

nlohmann::json param_value_to_json(const ParamValue& value) {
  return std::visit([](const auto& v) { return nlohmann::json(v); }, value);
}

nlohmann::json descriptor_to_json(const TrackerDescriptor& descriptor) {
  static constexpr const char* kKinds[] = {"int", "real", "bool", "enum"};
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : descriptor.params) {
    nlohmann::json j = {{"key", p.key},
                        {"kind", kKinds[static_cast<int>(p.kind)]},
                        {"default", param_value_to_json(p.default_value)},
                        {"description", p.description}};
    if (p.min) j["min"] = *p.min;
    if (p.max) j["max"] = *p.max;
    if (p.min_exclusive) j["min_exclusive"] = true;
    if (p.kind == ParamKind::kEnum) j["variants"] = p.variants;
    params.push_back(std::move(j));
  }
  return {{"name", descriptor.name}, {"display_name", descriptor.display_name}, {"params", params}};
}

ParamSet::ParamSet(const TrackerDescriptor& descriptor, const nlohmann::json& overrides) {
  for (const auto& spec : descriptor.params) values_[spec.key] = spec.default_value;
  if (overrides.is_null()) return;
  if (!overrides.is_object()) {
    throw Error(ErrorCode::kValidation, "tracker parameters must be a JSON object");
  }
  for (const auto& [key, value] : overrides.items()) {
    const ParamSpec* spec = nullptr;
    for (const auto& p : descriptor.params) {
      if (p.key == key) spec = &p;
    }
    if (spec == nullptr) {
      throw Error(ErrorCode::kValidation,
                  "unknown parameter '" + key + "' for tracker '" + descriptor.name + "'");
    }
    values_[key] = spec->validate(value);
  }
}

const ParamValue& ParamSet::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::kNotFound, "no parameter '" + key + "'");
  return it->second;
}

double ParamSet::real(const std::string& key) const {
  const ParamValue& v = get(key);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::get<double>(v);
}

std::int64_t ParamSet::integer(const std::string& key) const { return std::get<std::int64_t>(get(key)); }
bool ParamSet::flag(const std::string& key) const { return std::get<bool>(get(key)); }
const std::string& ParamSet::choice(const std::string& key) const { return std::get<std::string>(get(key)); }

FrameResult Tracker::process_frame(const GrayFrame& frame, const FrameIndex& index) {
  if (last_index_ && index.index() <= *last_index_) {
    throw Error(ErrorCode::kSequence, "frame " + std::to_string(index.index()) +
                                          " presented after frame " + std::to_string(*last_index_));
  }
  FrameResult result = process(frame, index);
  last_index_ = index.index();
  return result;
}

TrackId Tracker::add_point(PixelPoint) {
  throw Error(ErrorCode::kUsage, "tracker '" + name_ + "' does not accept designated points");
}

const TrackerRegistry& TrackerRegistry::builtin() {
  static const TrackerRegistry registry = [] {
    TrackerRegistry r;
    r.add(bgsub_descriptor(), make_bgsub_tracker);
    r.add(lk_descriptor(), make_lk_tracker);
    r.add(demo_descriptor(), make_demo_tracker);
    return r;
  }();
  return registry;
}

void TrackerRegistry::add(TrackerDescriptor descriptor, Factory factory) {
  for (const auto& d : descriptors_) {
    if (d.name == descriptor.name) {
      throw Error(ErrorCode::kValidation, "tracker '" + d.name + "' already registered");
    }
  }
  for (const auto& p : descriptor.params) {
    p.validate(param_value_to_json(p.default_value));  // defaults must satisfy their own bounds
  }
  descriptors_.push_back(std::move(descriptor));
  factories_.push_back(std::move(factory));
}

const TrackerDescriptor& TrackerRegistry::descriptor(const std::string& name) const {
  for (const auto& d : descriptors_) {
    if (d.name == name) return d;
  }
  throw Error(ErrorCode::kNotFound, "unknown tracker '" + name + "' (available: " + names() + ")");
}

std::unique_ptr<Tracker> TrackerRegistry::create(const std::string& name,
                                                 const nlohmann::json& overrides) const {
  for (size_t i = 0; i < descriptors_.size(); ++i) {
    if (descriptors_[i].name == name) return factories_[i](ParamSet(descriptors_[i], overrides));
  }
  throw Error(ErrorCode::kNotFound, "unknown tracker '" + name + "' (available: " + names() + ")");
}

std::string TrackerRegistry::names() const {
  std::string out;
  for (const auto& d : descriptors_) out += (out.empty() ? "" : ", ") + d.name;
  return out;
}

// ---------------------------------------------------------------------------
// Demo tracker

std::vector<Detection> demo_step(const DemoParams& params, std::int64_t index) {
  std::vector<Detection> out;
  out.reserve(params.n_targets);
  for (int k = 0; k < params.n_targets; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / params.n_targets +
                         static_cast<double>(index) * params.angular_speed;
    Detection d;
    d.frame = index;
    d.centroid = {params.center.x + params.radius_px * std::cos(theta),
                  params.center.y + params.radius_px * std::sin(theta)};
    out.push_back(d);
  }
  return out;
}

TrackerDescriptor demo_descriptor() {
  TrackerDescriptor d{"demo", "Demo Tracker", {}};
  d.params = {
      {"n_targets", ParamKind::kInt, std::int64_t{3}, 1.0, 1000.0, false, {}, "number of synthetic targets"},
      {"radius_px", ParamKind::kReal, 50.0, 0.0, std::nullopt, false, {}, "circle radius"},
      {"angular_speed", ParamKind::kReal, 0.05, std::nullopt, std::nullopt, false, {}, "radians per frame"},
      {"center_x", ParamKind::kReal, 128.0, std::nullopt, std::nullopt, false, {}, "circle center x"},
      {"center_y", ParamKind::kReal, 128.0, std::nullopt, std::nullopt, false, {}, "circle center y"},
  };
  return d;
}

namespace {

class DemoTracker final : public Tracker {
 public:
  explicit DemoTracker(ParamSet params) : Tracker("demo", std::move(params)) {
    config_.n_targets = static_cast<int>(this->params().integer("n_targets"));
    config_.radius_px = this->params().real("radius_px");
    config_.angular_speed = this->params().real("angular_speed");
    config_.center = {this->params().real("center_x"), this->params().real("center_y")};
  }

 protected:
  FrameResult process(const GrayFrame&, const FrameIndex& index) override {
    FrameResult result;
    TrackId id = 1;
    for (auto& d : demo_step(config_, index.index())) result.detections.push_back({id++, d});
    return result;
  }

 private:
  DemoParams config_;
};

}  // namespace

std::unique_ptr<Tracker> make_demo_tracker(ParamSet params) {
  return std::make_unique<DemoTracker>(std::move(params));
}

}  // namespace biotrack
