#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "image_io.hpp"

namespace biotrack {

// Filename pattern with a single `{NNN}` placeholder; the number of N's is the
// zero-padded width of the frame number.
class FramePattern {
 public:
  explicit FramePattern(const std::string& pattern);

  std::string filename(std::int64_t index) const;
  // Frame number encoded in `name`, if it matches the pattern.
  std::optional<std::int64_t> match(const std::string& name) const;
  const std::string& text() const { return text_; }

  // Finds the pattern of the `<prefix><digits><suffix>` image family in `dir`
  // whose index 0 exists. Fails when none or several families qualify.
  static FramePattern detect(const std::filesystem::path& dir);

 private:
  std::string text_;
  std::string prefix_;
  std::string suffix_;
  int digits_ = 0;
};

struct Frame {
  GrayFrame gray;
  Bytes encoded;  // original file bytes, used for display
};

// Anything that yields an indexed, fixed-size frame supply.
class FrameProvider {
 public:
  virtual ~FrameProvider() = default;
  virtual std::int64_t frame_count() const = 0;
  virtual int width() const = 0;
  virtual int height() const = 0;
  virtual double fps() const = 0;
  virtual Frame read_frame(std::int64_t index) const = 0;
};

class SequenceSource final : public FrameProvider {
 public:
  // Opens frames 0..n-1 of `pattern` in `dir`, stopping at the first gap.
  static SequenceSource open(const std::filesystem::path& dir, const std::string& pattern,
                             double fps = 25.0);

  std::int64_t frame_count() const override { return static_cast<std::int64_t>(paths_.size()); }
  int width() const override { return width_; }
  int height() const override { return height_; }
  double fps() const override { return fps_; }
  Frame read_frame(std::int64_t index) const override;

  const std::filesystem::path& directory() const { return dir_; }
  const FramePattern& pattern() const { return pattern_; }
  const std::filesystem::path& path_of(std::int64_t index) const;

 private:
  SequenceSource(std::filesystem::path dir, FramePattern pattern, double fps)
      : dir_(std::move(dir)), pattern_(std::move(pattern)), fps_(fps) {}

  std::filesystem::path dir_;
  FramePattern pattern_;
  double fps_;
  int width_ = 0;
  int height_ = 0;
  std::vector<std::filesystem::path> paths_;
};

// Writes frames as PNG, numbered from 0. Creates `out_dir` when missing.
std::size_t write_sequence(const std::vector<Image8>& frames, const std::filesystem::path& out_dir,
                           const std::string& pattern);

}  // namespace biotrack
