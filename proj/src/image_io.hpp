#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "core.hpp"

namespace biotrack {

using Bytes = std::vector<std::uint8_t>;

struct ImageInfo {
  int width = 0;
  int height = 0;
};

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// PNG (any bit depth / color type, reduced to 8-bit gray or RGB) or binary PGM (P5).
Image8 decode_image(std::span<const std::uint8_t> bytes);
ImageInfo peek_image_info(std::span<const std::uint8_t> bytes);

Bytes encode_png(const Image8& image);

}  // namespace biotrack
