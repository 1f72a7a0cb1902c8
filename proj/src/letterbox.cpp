#include "fruitsynth/letterbox.hpp"

#include <algorithm>
#include <cmath>

#include "fruitsynth/errors.hpp"

namespace fruitsynth {

LetterboxTransform make_letterbox_transform(int source_width, int source_height, int target_width,
                                            int target_height) {
  if (source_width < 1 || source_height < 1 || target_width < 1 || target_height < 1)
    throw Error(Errc::InvalidArgument, "letterbox: dimensions must be >= 1");
  LetterboxTransform t;
  t.source_width = source_width;
  t.source_height = source_height;
  t.target_width = target_width;
  t.target_height = target_height;
  const double sx = static_cast<double>(target_width) / source_width;
  const double sy = static_cast<double>(target_height) / source_height;
  t.scale = std::min(sx, sy);
  t.scaled_width = std::clamp(static_cast<int>(std::lround(source_width * t.scale)), 1, target_width);
  t.scaled_height = std::clamp(static_cast<int>(std::lround(source_height * t.scale)), 1, target_height);
  t.offset_x = (target_width - t.scaled_width) / 2;
  t.offset_y = (target_height - t.scaled_height) / 2;
  return t;
}

int LetterboxTransform::source_column(int tx) const {
  const int local = tx - offset_x;
  if (local < 0 || local >= scaled_width) return -1;
  return static_cast<int>((2LL * local + 1) * source_width / (2LL * scaled_width));
}

int LetterboxTransform::source_row(int ty) const {
  const int local = ty - offset_y;
  if (local < 0 || local >= scaled_height) return -1;
  return static_cast<int>((2LL * local + 1) * source_height / (2LL * scaled_height));
}

std::pair<RgbImage, LetterboxTransform> letterbox(const RgbImage& image, int target_width, int target_height) {
  const auto t = make_letterbox_transform(image.width(), image.height(), target_width, target_height);
  if (t.is_identity()) return {image, t};
  RgbImage out(target_width, target_height);
  for (int y = 0; y < target_height; ++y) {
    const int sy = t.source_row(y);
    if (sy < 0) continue;
    for (int x = 0; x < target_width; ++x) {
      const int sx = t.source_column(x);
      if (sx >= 0) out.set(x, y, image.at(sx, sy));
    }
  }
  return {std::move(out), t};
}

BitMask letterbox_mask(const BitMask& mask, const LetterboxTransform& t) {
  if (mask.width() != t.source_width || mask.height() != t.source_height)
    throw Error(Errc::DimensionMismatch, "letterbox_mask: mask does not match transform source");
  if (t.is_identity()) return mask;
  BitMask out(t.target_width, t.target_height);
  for (int y = 0; y < t.target_height; ++y) {
    const int sy = t.source_row(y);
    if (sy < 0) continue;
    for (int x = 0; x < t.target_width; ++x) {
      const int sx = t.source_column(x);
      if (sx >= 0 && mask.get(sx, sy)) out.set(x, y);
    }
  }
  return out;
}

}  // namespace fruitsynth
