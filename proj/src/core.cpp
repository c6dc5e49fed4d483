#include "core.hpp"

#include <algorithm>
#include <cmath>

namespace biotrack {

GrayFrame::GrayFrame(int width, int height, double fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kValidation, "frame dimensions must be positive");
  }
  data_.assign(static_cast<size_t>(width) * height, fill);
}

GrayFrame::GrayFrame(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kValidation, "frame dimensions must be positive");
  }
  if (data_.size() != static_cast<size_t>(width) * height) {
    throw Error(ErrorCode::kValidation, "frame data length does not match width*height");
  }
}

double GrayFrame::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return at(x, y);
}

GrayFrame to_unit_gray(const Image8& raw) {
  if (raw.width < 1 || raw.height < 1) {
    throw Error(ErrorCode::kValidation, "image has zero size");
  }
  if (raw.channels != 1 && raw.channels != 3) {
    throw Error(ErrorCode::kValidation, "image must have 1 or 3 channels");
  }
  std::vector<double> data(static_cast<size_t>(raw.width) * raw.height);
  if (raw.channels == 1) {
    for (size_t i = 0; i < data.size(); ++i) data[i] = raw.pixels[i] / 255.0;
  } else {
    for (size_t i = 0; i < data.size(); ++i) {
      const std::uint8_t* p = raw.pixels.data() + 3 * i;
      data[i] = (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0;
    }
  }
  return GrayFrame(raw.width, raw.height, std::move(data));
}

Image8 to_rgb(const Image8& raw) {
  if (raw.channels == 3) return raw;
  Image8 out(raw.width, raw.height, 3);
  for (size_t i = 0; i < raw.pixels.size(); ++i) {
    out.pixels[3 * i] = out.pixels[3 * i + 1] = out.pixels[3 * i + 2] = raw.pixels[i];
  }
  return out;
}

Image8 to_image8(const GrayFrame& frame) {
  Image8 out(frame.width(), frame.height(), 1);
  auto src = frame.data();
  for (size_t i = 0; i < src.size(); ++i) {
    out.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(src[i], 0.0, 1.0) * 255.0));
  }
  return out;
}

FrameIndex::FrameIndex(std::int64_t index, double fps) : index_(index), fps_(fps) {
  if (index < 0) throw Error(ErrorCode::kValidation, "frame index must be nonnegative");
  if (!(fps > 0.0)) throw Error(ErrorCode::kValidation, "fps must be positive");
}

std::string_view unit_name(Unit unit) {
  switch (unit) {
    case Unit::kPx: return "px";
    case Unit::kCm: return "cm";
    case Unit::kMm: return "mm";
  }
  return "px";
}

Unit parse_unit(std::string_view name) {
  if (name == "px") return Unit::kPx;
  if (name == "cm") return Unit::kCm;
  if (name == "mm") return Unit::kMm;
  throw Error(ErrorCode::kValidation, "unknown unit '" + std::string(name) + "' (expected cm, mm or px)");
}

}  // namespace biotrack
