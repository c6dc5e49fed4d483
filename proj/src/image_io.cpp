#include "image_io.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace biotrack {
namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

bool is_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0;
}

bool is_pgm(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5';
}

struct PngReadCursor {
  std::span<const std::uint8_t> bytes;
  size_t offset = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes.size()) {
    png_error(png, "truncated PNG stream");
  }
  std::memcpy(out, cursor->bytes.data() + cursor->offset, length);
  cursor->offset += length;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

[[noreturn]] void png_error_throw(png_structp, png_const_charp message) {
  throw Error(ErrorCode::kData, std::string("PNG decode failed: ") + message);
}

void png_warning_ignore(png_structp, png_const_charp) {}

// RAII holder for the libpng read structs.
class PngReader {
 public:
  explicit PngReader(std::span<const std::uint8_t> bytes) : cursor_{bytes, 0} {
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_throw,
                                  png_warning_ignore);
    if (png_ == nullptr) throw Error(ErrorCode::kInternal, "png_create_read_struct failed");
    info_ = png_create_info_struct(png_);
    if (info_ == nullptr) {
      png_destroy_read_struct(&png_, nullptr, nullptr);
      throw Error(ErrorCode::kInternal, "png_create_info_struct failed");
    }
    png_set_read_fn(png_, &cursor_, png_read_from_span);
  }
  ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  png_structp png() { return png_; }
  png_infop info() { return info_; }

 private:
  PngReadCursor cursor_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

Image8 decode_png(std::span<const std::uint8_t> bytes) {
  PngReader reader(bytes);
  png_structp png = reader.png();
  png_infop info = reader.info();
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    throw Error(ErrorCode::kData, "unsupported PNG channel layout");
  }
  Image8 image(width, height, channels);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = image.pixel(0, y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  return image;
}

// Parses the PGM header; returns offset of the pixel payload.
size_t parse_pgm_header(std::span<const std::uint8_t> bytes, int& width, int& height, int& maxval) {
  size_t pos = 2;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&] {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw Error(ErrorCode::kData, "malformed PGM header");
    }
    long value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 1 << 24) throw Error(ErrorCode::kData, "PGM header value too large");
      ++pos;
    }
    return static_cast<int>(value);
  };
  width = read_int();
  height = read_int();
  maxval = read_int();
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw Error(ErrorCode::kData, "malformed PGM header");
  }
  ++pos;
  if (width < 1 || height < 1) throw Error(ErrorCode::kData, "PGM has zero size");
  if (maxval < 1 || maxval > 255) throw Error(ErrorCode::kData, "only 8-bit PGM is supported");
  return pos;
}

Image8 decode_pgm(std::span<const std::uint8_t> bytes) {
  int width = 0, height = 0, maxval = 0;
  const size_t offset = parse_pgm_header(bytes, width, height, maxval);
  const size_t count = static_cast<size_t>(width) * height;
  if (bytes.size() - offset < count) throw Error(ErrorCode::kData, "truncated PGM payload");
  Image8 image(width, height, 1);
  for (size_t i = 0; i < count; ++i) {
    const unsigned v = bytes[offset + i];
    image.pixels[i] = static_cast<std::uint8_t>(maxval == 255 ? v : (v * 255 + maxval / 2) / maxval);
  }
  return image;
}

}  // namespace

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIo, "failed reading " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

Image8 decode_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) return decode_png(bytes);
  if (is_pgm(bytes)) return decode_pgm(bytes);
  throw Error(ErrorCode::kData, "unrecognized image format (expected PNG or binary PGM)");
}

ImageInfo peek_image_info(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) {
    PngReader reader(bytes);
    png_read_info(reader.png(), reader.info());
    return {static_cast<int>(png_get_image_width(reader.png(), reader.info())),
            static_cast<int>(png_get_image_height(reader.png(), reader.info()))};
  }
  if (is_pgm(bytes)) {
    ImageInfo info;
    int maxval = 0;
    parse_pgm_header(bytes, info.width, info.height, maxval);
    return info;
  }
  throw Error(ErrorCode::kData, "unrecognized image format (expected PNG or binary PGM)");
}

Bytes encode_png(const Image8& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw Error(ErrorCode::kValidation, "PNG encoding needs 1 or 3 channels");
  }
  Bytes out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_throw,
                                            png_warning_ignore);
  if (png == nullptr) throw Error(ErrorCode::kInternal, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::kInternal, "png_create_info_struct failed");
  }
  try {
    png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
    png_set_IHDR(png, info, image.width, image.height, 8,
                 image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 3);
    png_write_info(png, info);
    for (int y = 0; y < image.height; ++y) {
      png_write_row(png, const_cast<png_bytep>(image.pixel(0, y)));
    }
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace biotrack
