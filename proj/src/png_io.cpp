#include "fruitsynth/png_io.hpp"

#include <png.h>

#include <bit>
#include <csetjmp>
#include <cstring>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "fruitsynth/errors.hpp"

namespace fruitsynth {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(Errc::IoError, "cannot open '" + path.string() + "'");
  return f;
}

// libpng reports errors with longjmp; everything that needs cleanup lives
// outside the setjmp frame so the unwind path only has to destroy libpng state.
struct ReadState {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~ReadState() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct WriteState {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~WriteState() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};

enum class Target { Rgb8, Gray16 };

// Returns false on a libpng error; rows are filled in place.
bool decode(std::FILE* file, Target target, ReadState& st, png_uint_32& width, png_uint_32& height,
            std::vector<unsigned char>& pixels, int& color_type_out, int& bit_depth_out) {
  if (setjmp(png_jmpbuf(st.png))) return false;
  png_init_io(st.png, file);
  png_read_info(st.png, st.info);
  width = png_get_image_width(st.png, st.info);
  height = png_get_image_height(st.png, st.info);
  const int color_type = png_get_color_type(st.png, st.info);
  const int bit_depth = png_get_bit_depth(st.png, st.info);
  color_type_out = color_type;
  bit_depth_out = bit_depth;

  if (target == Target::Rgb8) {
    if (bit_depth == 16) png_set_strip_16(st.png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(st.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(st.png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(st.png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(st.png);
  } else {
    if (color_type != PNG_COLOR_TYPE_GRAY || bit_depth != 16) return true;  // rejected by caller
    if constexpr (std::endian::native == std::endian::little) png_set_swap(st.png);
  }
  png_read_update_info(st.png, st.info);
  const png_size_t row_bytes = png_get_rowbytes(st.png, st.info);
  pixels.resize(row_bytes * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * row_bytes;
  png_read_image(st.png, rows.data());
  png_read_end(st.png, nullptr);
  return true;
}

bool encode(std::FILE* file, WriteState& st, png_uint_32 width, png_uint_32 height, int bit_depth, int color_type,
            const unsigned char* pixels, png_size_t row_bytes, bool swap) {
  if (setjmp(png_jmpbuf(st.png))) return false;
  png_init_io(st.png, file);
  png_set_compression_level(st.png, 6);
  png_set_IHDR(st.png, st.info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(st.png, st.info);
  if (swap) png_set_swap(st.png);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = const_cast<png_bytep>(pixels + y * row_bytes);
  png_write_image(st.png, rows.data());
  png_write_end(st.png, nullptr);
  return true;
}

std::vector<unsigned char> read_raw(const std::filesystem::path& path, Target target, png_uint_32& width,
                                    png_uint_32& height) {
  auto file = open_file(path, "rb");
  unsigned char sig[8] = {};
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw Error(Errc::IoError, "'" + path.string() + "' is not a PNG file");
  ReadState st;
  st.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!st.png) throw Error(Errc::IoError, "png_create_read_struct failed");
  st.info = png_create_info_struct(st.png);
  if (!st.info) throw Error(Errc::IoError, "png_create_info_struct failed");
  png_set_sig_bytes(st.png, 8);

  std::vector<unsigned char> pixels;
  int color_type = 0, bit_depth = 0;
  if (!decode(file.get(), target, st, width, height, pixels, color_type, bit_depth))
    throw Error(Errc::IoError, "failed to decode '" + path.string() + "'");
  if (target == Target::Gray16 && (color_type != PNG_COLOR_TYPE_GRAY || bit_depth != 16))
    throw Error(Errc::IoError, "'" + path.string() + "' is not a 16-bit grayscale PNG");
  return pixels;
}

void write_raw(const std::filesystem::path& path, png_uint_32 width, png_uint_32 height, int bit_depth,
               int color_type, const unsigned char* pixels, png_size_t row_bytes, bool swap) {
  auto file = open_file(path, "wb");
  WriteState st;
  st.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!st.png) throw Error(Errc::IoError, "png_create_write_struct failed");
  st.info = png_create_info_struct(st.png);
  if (!st.info) throw Error(Errc::IoError, "png_create_info_struct failed");
  if (!encode(file.get(), st, width, height, bit_depth, color_type, pixels, row_bytes, swap))
    throw Error(Errc::IoError, "failed to encode '" + path.string() + "'");
  if (std::fflush(file.get()) != 0) throw Error(Errc::IoError, "write failed for '" + path.string() + "'");
}

}  // namespace

RgbImage read_png_rgb(const std::filesystem::path& path) {
  png_uint_32 w = 0, h = 0;
  auto pixels = read_raw(path, Target::Rgb8, w, h);
  return RgbImage(static_cast<int>(w), static_cast<int>(h), std::vector<std::uint8_t>(pixels.begin(), pixels.end()));
}

void write_png_rgb(const std::filesystem::path& path, const RgbImage& image) {
  write_raw(path, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
            PNG_COLOR_TYPE_RGB, image.data().data(), static_cast<png_size_t>(image.width()) * 3, false);
}

DepthImage read_png_depth(const std::filesystem::path& path) {
  png_uint_32 w = 0, h = 0;
  auto pixels = read_raw(path, Target::Gray16, w, h);
  std::vector<std::uint16_t> data(static_cast<std::size_t>(w) * h);
  std::memcpy(data.data(), pixels.data(), data.size() * sizeof(std::uint16_t));
  return DepthImage(static_cast<int>(w), static_cast<int>(h), std::move(data));
}

void write_png_depth(const std::filesystem::path& path, const DepthImage& depth) {
  write_raw(path, static_cast<png_uint_32>(depth.width()), static_cast<png_uint_32>(depth.height()), 16,
            PNG_COLOR_TYPE_GRAY, reinterpret_cast<const unsigned char*>(depth.data().data()),
            static_cast<png_size_t>(depth.width()) * 2,
            std::endian::native == std::endian::little);
}

}  // namespace fruitsynth
