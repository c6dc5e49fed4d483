#include "frame_source.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <regex>

namespace fs = std::filesystem;

namespace biotrack {

FramePattern::FramePattern(const std::string& pattern) : text_(pattern) {
  static const std::regex placeholder(R"(\{(N+)\})");
  auto begin = std::sregex_iterator(pattern.begin(), pattern.end(), placeholder);
  const auto count = std::distance(begin, std::sregex_iterator());
  if (count != 1 || pattern.find('{') != pattern.rfind('{')) {
    throw Error(ErrorCode::kUsage,
                "pattern '" + pattern + "' must contain exactly one {N...} placeholder");
  }
  const std::smatch& m = *begin;
  prefix_ = pattern.substr(0, m.position(0));
  suffix_ = pattern.substr(m.position(0) + m.length(0));
  digits_ = static_cast<int>(m[1].length());
  if (prefix_.find('/') != std::string::npos || suffix_.find('/') != std::string::npos) {
    throw Error(ErrorCode::kUsage, "pattern must be a bare filename");
  }
}

std::string FramePattern::filename(std::int64_t index) const {
  char number[32];
  std::snprintf(number, sizeof number, "%0*lld", digits_, static_cast<long long>(index));
  return prefix_ + number + suffix_;
}

std::optional<std::int64_t> FramePattern::match(const std::string& name) const {
  if (name.size() < prefix_.size() + suffix_.size() + static_cast<size_t>(digits_)) return std::nullopt;
  if (name.compare(0, prefix_.size(), prefix_) != 0) return std::nullopt;
  if (name.compare(name.size() - suffix_.size(), suffix_.size(), suffix_) != 0) return std::nullopt;
  const std::string number = name.substr(prefix_.size(), name.size() - prefix_.size() - suffix_.size());
  if (number.empty() || number.size() > 18 ||
      !std::all_of(number.begin(), number.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return std::nullopt;
  }
  if (filename(std::stoll(number)) != name) return std::nullopt;
  return std::stoll(number);
}

FramePattern FramePattern::detect(const fs::path& dir) {
  static const std::regex family(R"(^(.*?)(\d+)(\.(png|PNG|pgm|PGM))$)");
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, "not a directory: " + dir.string());
  std::map<std::string, int> candidates;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    std::smatch m;
    if (!std::regex_match(name, m, family)) continue;
    const std::string digits = m[2].str();
    if (std::all_of(digits.begin(), digits.end(), [](char c) { return c == '0'; })) {
      candidates[m[1].str() + "{" + std::string(digits.size(), 'N') + "}" + m[3].str()]++;
    }
  }
  if (candidates.empty()) throw Error(ErrorCode::kData, "no frame sequence found in " + dir.string());
  if (candidates.size() > 1) {
    throw Error(ErrorCode::kUsage, "several frame sequences in " + dir.string() + "; pass a pattern");
  }
  return FramePattern(candidates.begin()->first);
}

SequenceSource SequenceSource::open(const fs::path& dir, const std::string& pattern, double fps) {
  if (!(fps > 0.0)) throw Error(ErrorCode::kValidation, "fps must be positive");
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, "not a directory: " + dir.string());
  SequenceSource source(dir, FramePattern(pattern), fps);
  for (std::int64_t i = 0;; ++i) {
    fs::path path = dir / source.pattern_.filename(i);
    if (!fs::is_regular_file(path)) break;
    const Bytes bytes = read_file(path);
    ImageInfo info;
    try {
      info = peek_image_info(bytes);
    } catch (const Error& e) {
      throw Error(ErrorCode::kData, path.string() + ": " + e.what());
    }
    if (i == 0) {
      source.width_ = info.width;
      source.height_ = info.height;
    } else if (info.width != source.width_ || info.height != source.height_) {
      throw Error(ErrorCode::kData, "inconsistent sequence: frame " + std::to_string(i) + " is " +
                                        std::to_string(info.width) + "x" + std::to_string(info.height) +
                                        ", expected " + std::to_string(source.width_) + "x" +
                                        std::to_string(source.height_));
    }
    source.paths_.push_back(std::move(path));
  }
  if (source.paths_.empty()) {
    throw Error(ErrorCode::kData, "no frames matching '" + pattern + "' in " + dir.string());
  }
  return source;
}

const fs::path& SequenceSource::path_of(std::int64_t index) const {
  if (index < 0 || index >= frame_count()) {
    throw Error(ErrorCode::kRange, "frame " + std::to_string(index) + " out of range [0, " +
                                       std::to_string(frame_count()) + ")");
  }
  return paths_[static_cast<size_t>(index)];
}

Frame SequenceSource::read_frame(std::int64_t index) const {
  const fs::path& path = path_of(index);
  Frame frame;
  frame.encoded = read_file(path);
  try {
    Image8 image = decode_image(frame.encoded);
    if (image.width != width_ || image.height != height_) {
      throw Error(ErrorCode::kData, "frame size changed since open");
    }
    frame.gray = to_unit_gray(image);
  } catch (const Error& e) {
    throw Error(ErrorCode::kData, path.string() + ": " + e.what());
  }
  return frame;
}

std::size_t write_sequence(const std::vector<Image8>& frames, const fs::path& out_dir,
                           const std::string& pattern) {
  const FramePattern names(pattern);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw Error(ErrorCode::kIo, "cannot create output directory " + out_dir.string());
  }
  for (size_t i = 0; i < frames.size(); ++i) {
    write_file(out_dir / names.filename(static_cast<std::int64_t>(i)), encode_png(frames[i]));
  }
  return frames.size();
}

}  // namespace biotrack
