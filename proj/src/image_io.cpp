#include "mpilab/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstdint>
#include <memory>
#include <vector>

#include "mpilab/error.hpp"

namespace mpilab {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return f;
}

// Returns false on a libpng error. Only trivially destructible locals live
// between setjmp and the end of the function.
bool encode(std::FILE* fp, int width, int height, int color_type, int bit_depth,
            std::vector<png_bytep>& rows) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_compression_level(png, 6);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

int color_type_for(int channels) {
  switch (channels) {
    case 1: return PNG_COLOR_TYPE_GRAY;
    case 3: return PNG_COLOR_TYPE_RGB;
    case 4: return PNG_COLOR_TYPE_RGB_ALPHA;
  }
  throw Error(ErrorCode::InvalidArgument, "png: unsupported channel count");
}

void write_png(const std::filesystem::path& path, const Image& img, int bit_depth) {
  require_supported_channels(img.channels(), "write_png");
  const int bytes = bit_depth / 8;
  const double scale = bit_depth == 16 ? 65535.0 : 255.0;
  const std::size_t row_bytes =
      static_cast<std::size_t>(img.width()) * img.channels() * bytes;
  std::vector<std::uint8_t> buffer(row_bytes * img.height());
  auto src = img.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double v = std::clamp(std::isfinite(src[i]) ? src[i] : 0.0, 0.0, 1.0);
    const auto q = static_cast<std::uint32_t>(std::lround(v * scale));
    if (bytes == 2) {
      buffer[2 * i] = static_cast<std::uint8_t>(q >> 8);
      buffer[2 * i + 1] = static_cast<std::uint8_t>(q & 0xff);
    } else {
      buffer[i] = static_cast<std::uint8_t>(q);
    }
  }
  std::vector<png_bytep> rows(img.height());
  for (int y = 0; y < img.height(); ++y) rows[y] = buffer.data() + y * row_bytes;
  auto fp = open_file(path, "wb");
  if (!encode(fp.get(), img.width(), img.height(), color_type_for(img.channels()),
              bit_depth, rows)) {
    throw Error(ErrorCode::Io, "png encode failed for " + path.string());
  }
}

struct RawPng {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> pixels;
};

bool decode(std::FILE* fp, RawPng& out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (png_get_bit_depth(png, info) < 8) png_set_expand(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_read_update_info(png, info);
  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  out.pixels.resize(row_bytes * out.height);
  rows.resize(out.height);
  for (png_uint_32 y = 0; y < out.height; ++y) rows[y] = out.pixels.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

RawPng read_raw(const std::filesystem::path& path) {
  auto fp = open_file(path, "rb");
  unsigned char sig[8] = {};
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(ErrorCode::CorruptFile, "not a PNG file: " + path.string());
  }
  std::rewind(fp.get());
  RawPng raw;
  if (!decode(fp.get(), raw)) {
    throw Error(ErrorCode::CorruptFile, "corrupt PNG data: " + path.string());
  }
  return raw;
}

}  // namespace

void write_png16(const std::filesystem::path& path, const Image& img) {
  write_png(path, img, 16);
}

void write_png8(const std::filesystem::path& path, const Image& img) {
  write_png(path, img, 8);
}

Image read_png(const std::filesystem::path& path) {
  RawPng raw = read_raw(path);
  const int in_channels = raw.channels;
  const int out_channels = in_channels == 2 ? 4 : in_channels;
  Image img(static_cast<int>(raw.width), static_cast<int>(raw.height), out_channels);
  const double scale = raw.bit_depth == 16 ? 65535.0 : 255.0;
  const std::size_t n = static_cast<std::size_t>(raw.width) * raw.height;
  auto dst = img.data();
  for (std::size_t p = 0; p < n; ++p) {
    double v[4] = {};
    for (int c = 0; c < in_channels; ++c) {
      const std::size_t i = p * in_channels + c;
      const unsigned q = raw.bit_depth == 16
                             ? (unsigned(raw.pixels[2 * i]) << 8) | raw.pixels[2 * i + 1]
                             : raw.pixels[i];
      v[c] = q / scale;
    }
    if (in_channels == 2) {
      dst[p * 4 + 0] = dst[p * 4 + 1] = dst[p * 4 + 2] = v[0];
      dst[p * 4 + 3] = v[1];
    } else {
      for (int c = 0; c < in_channels; ++c) dst[p * in_channels + c] = v[c];
    }
  }
  return img;
}

int png_bit_depth(const std::filesystem::path& path) { return read_raw(path).bit_depth; }

}  // namespace mpilab
