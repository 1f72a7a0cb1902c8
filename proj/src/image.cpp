#include "fruitsynth/image.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "fruitsynth/errors.hpp"

namespace fruitsynth {

namespace {

void require_dims(int width, int height, const char* what) {
  if (width < 1 || height < 1)
    throw Error(Errc::InvalidArgument, std::string(what) + ": dimensions must be >= 1, got " +
                                           std::to_string(width) + "x" + std::to_string(height));
}

std::size_t pixel_count(int width, int height) {
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

}  // namespace

RgbImage::RgbImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  require_dims(width, height, "RgbImage");
  data_.resize(pixel_count(width, height) * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill[0];
    data_[i + 1] = fill[1];
    data_[i + 2] = fill[2];
  }
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  require_dims(width, height, "RgbImage");
  if (data_.size() != pixel_count(width, height) * 3)
    throw Error(Errc::DimensionMismatch, "RgbImage: data length does not match width*height*3");
}

DepthImage::DepthImage(int width, int height, std::uint16_t fill) : width_(width), height_(height) {
  require_dims(width, height, "DepthImage");
  data_.assign(pixel_count(width, height), fill);
}

DepthImage::DepthImage(int width, int height, std::vector<std::uint16_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  require_dims(width, height, "DepthImage");
  if (data_.size() != pixel_count(width, height))
    throw Error(Errc::DimensionMismatch, "DepthImage: data length does not match width*height");
}

std::optional<Bbox> clip_box(const Bbox& box, int width, int height) {
  const int x0 = std::max(box.x, 0);
  const int y0 = std::max(box.y, 0);
  const int x1 = std::min(box.x + box.w, width);
  const int y1 = std::min(box.y + box.h, height);
  if (x1 <= x0 || y1 <= y0) return std::nullopt;
  return Bbox{x0, y0, x1 - x0, y1 - y0};
}

BitMask::BitMask(int width, int height) : width_(width), height_(height) {
  require_dims(width, height, "BitMask");
  words_.assign((pixel_count(width, height) + 63) / 64, 0);
}

void BitMask::require_same_dims(const BitMask& other) const {
  if (width_ != other.width_ || height_ != other.height_)
    throw Error(Errc::DimensionMismatch, "BitMask: " + std::to_string(width_) + "x" + std::to_string(height_) +
                                             " vs " + std::to_string(other.width_) + "x" +
                                             std::to_string(other.height_));
}

std::size_t BitMask::popcount() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool BitMask::empty() const noexcept {
  return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

std::optional<Bbox> BitMask::bounding_box() const {
  int x0 = width_, y0 = height_, x1 = -1, y1 = -1;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      if (!get(x, y)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) return std::nullopt;
  return Bbox{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

BitMask BitMask::operator&(const BitMask& other) const {
  require_same_dims(other);
  BitMask out = *this;
  for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] &= other.words_[i];
  return out;
}

BitMask BitMask::operator|(const BitMask& other) const {
  BitMask out = *this;
  out |= other;
  return out;
}

BitMask& BitMask::operator|=(const BitMask& other) {
  require_same_dims(other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

BitMask BitMask::minus(const BitMask& other) const {
  require_same_dims(other);
  BitMask out = *this;
  for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] &= ~other.words_[i];
  return out;
}

std::size_t BitMask::intersection_count(const BitMask& other) const {
  require_same_dims(other);
  std::size_t n = 0;
  for (std::size_t i = 0; i < words_.size(); ++i)
    n += static_cast<std::size_t>(std::popcount(words_[i] & other.words_[i]));
  return n;
}

std::size_t BitMask::union_count(const BitMask& other) const {
  require_same_dims(other);
  std::size_t n = 0;
  for (std::size_t i = 0; i < words_.size(); ++i)
    n += static_cast<std::size_t>(std::popcount(words_[i] | other.words_[i]));
  return n;
}

bool BitMask::is_subset_of(const BitMask& other) const {
  require_same_dims(other);
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] & ~other.words_[i]) return false;
  return true;
}

BitMask BitMask::crop(const Bbox& box) const {
  if (box.x < 0 || box.y < 0 || box.w < 1 || box.h < 1 || box.x + box.w > width_ || box.y + box.h > height_)
    throw Error(Errc::InvalidArgument, "BitMask::crop: box outside mask");
  BitMask out(box.w, box.h);
  for (int y = 0; y < box.h; ++y)
    for (int x = 0; x < box.w; ++x)
      if (get(box.x + x, box.y + y)) out.set(x, y);
  return out;
}

BitMask BitMask::flipped_horizontal() const {
  BitMask out(width_, height_);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      if (get(x, y)) out.set(width_ - 1 - x, y);
  return out;
}

BitMask BitMask::filled_box(int width, int height, const Bbox& box) {
  BitMask out(width, height);
  if (auto clipped = clip_box(box, width, height)) {
    for (int y = clipped->y; y < clipped->y + clipped->h; ++y)
      for (int x = clipped->x; x < clipped->x + clipped->w; ++x) out.set(x, y);
  }
  return out;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0))
    throw Error(Errc::InvalidArgument, "CameraIntrinsics: fx and fy must be positive");
}

RgbImage crop_image(const RgbImage& image, const Bbox& box) {
  if (box.x < 0 || box.y < 0 || box.w < 1 || box.h < 1 || box.x + box.w > image.width() ||
      box.y + box.h > image.height())
    throw Error(Errc::InvalidArgument, "crop_image: box outside image");
  std::vector<std::uint8_t> data(static_cast<std::size_t>(box.w) * static_cast<std::size_t>(box.h) * 3);
  const auto src = image.data();
  const std::size_t row_bytes = static_cast<std::size_t>(box.w) * 3;
  for (int y = 0; y < box.h; ++y) {
    const std::size_t from =
        (static_cast<std::size_t>(box.y + y) * static_cast<std::size_t>(image.width()) + static_cast<std::size_t>(box.x)) * 3;
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(from), row_bytes,
                data.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(y) * row_bytes));
  }
  return RgbImage(box.w, box.h, std::move(data));
}

RgbImage flip_horizontal(const RgbImage& image) {
  RgbImage out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) out.set(image.width() - 1 - x, y, image.at(x, y));
  return out;
}

}  // namespace fruitsynth
