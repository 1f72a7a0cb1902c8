#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fruitsynth {

using Rgb = std::array<std::uint8_t, 3>;

/// Row-major 8-bit RGB raster.
class RgbImage {
 public:
  RgbImage(int width, int height, Rgb fill = {0, 0, 0});
  RgbImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  Rgb at(int x, int y) const {
    const std::size_t i = offset(x, y);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const std::size_t i = offset(x, y);
    data_[i] = c[0];
    data_[i + 1] = c[1];
    data_[i + 2] = c[2];
  }

  bool operator==(const RgbImage&) const = default;

 private:
  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> data_;
};

/// Row-major 16-bit depth in millimeters; 0 marks an invalid reading.
class DepthImage {
 public:
  DepthImage(int width, int height, std::uint16_t fill = 0);
  DepthImage(int width, int height, std::vector<std::uint16_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::span<const std::uint16_t> data() const noexcept { return data_; }

  std::uint16_t at(int x, int y) const { return data_[index(x, y)]; }
  void set(int x, int y, std::uint16_t mm) { data_[index(x, y)] = mm; }

  bool operator==(const DepthImage&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<std::uint16_t> data_;
};

/// Axis-aligned pixel box; (x, y) is the top-left pixel.
struct Bbox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const noexcept { return static_cast<long long>(w) * h; }
  bool operator==(const Bbox&) const = default;
};

/// Intersects `box` with a width x height frame. Returns nullopt if nothing remains.
std::optional<Bbox> clip_box(const Bbox& box, int width, int height);

/// One bit per pixel, row-major, packed into 64-bit words.
class BitMask {
 public:
  BitMask(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_); }

  bool get(int x, int y) const {
    const std::size_t i = bit(x, y);
    return (words_[i >> 6] >> (i & 63)) & 1U;
  }
  void set(int x, int y, bool on = true) {
    const std::size_t i = bit(x, y);
    const std::uint64_t m = std::uint64_t{1} << (i & 63);
    if (on)
      words_[i >> 6] |= m;
    else
      words_[i >> 6] &= ~m;
  }

  std::size_t popcount() const noexcept;
  bool empty() const noexcept;

  /// Tight box around set pixels, nullopt for an empty mask.
  std::optional<Bbox> bounding_box() const;

  BitMask operator&(const BitMask& other) const;
  BitMask operator|(const BitMask& other) const;
  /// Pixels set here and clear in `other`.
  BitMask minus(const BitMask& other) const;
  BitMask& operator|=(const BitMask& other);

  std::size_t intersection_count(const BitMask& other) const;
  std::size_t union_count(const BitMask& other) const;
  bool is_subset_of(const BitMask& other) const;

  BitMask crop(const Bbox& box) const;
  BitMask flipped_horizontal() const;

  /// Mask with every pixel of `box` (clipped to the frame) set.
  static BitMask filled_box(int width, int height, const Bbox& box);

  bool operator==(const BitMask&) const = default;

 private:
  std::size_t bit(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }
  void require_same_dims(const BitMask& other) const;

  int width_;
  int height_;
  std::vector<std::uint64_t> words_;
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  void validate() const;
};

RgbImage crop_image(const RgbImage& image, const Bbox& box);
RgbImage flip_horizontal(const RgbImage& image);

}  // namespace fruitsynth
