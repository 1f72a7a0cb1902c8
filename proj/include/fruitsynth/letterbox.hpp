#pragma once

#include <utility>

#include "fruitsynth/image.hpp"

namespace fruitsynth {

/// Maps source pixel coordinates into a letterboxed frame:
/// dst = src * scale + offset. The scaled content occupies
/// [offset, offset + scaled) on each axis; the rest is zero padding.
struct LetterboxTransform {
  int source_width = 0;
  int source_height = 0;
  int target_width = 0;
  int target_height = 0;
  double scale = 1.0;
  int scaled_width = 0;
  int scaled_height = 0;
  int offset_x = 0;
  int offset_y = 0;

  std::pair<double, double> forward(double x, double y) const {
    return {x * scale + offset_x, y * scale + offset_y};
  }
  std::pair<double, double> inverse(double x, double y) const {
    return {(x - offset_x) / scale, (y - offset_y) / scale};
  }

  bool is_identity() const noexcept {
    return scale == 1.0 && offset_x == 0 && offset_y == 0 && source_width == target_width &&
           source_height == target_height;
  }

  /// Source pixel sampled by target pixel (tx, ty); nullopt-like -1 inside padding.
  int source_column(int tx) const;
  int source_row(int ty) const;

  bool operator==(const LetterboxTransform&) const = default;
};

LetterboxTransform make_letterbox_transform(int source_width, int source_height, int target_width, int target_height);

/// Nearest-neighbour resize into target dims preserving aspect ratio; the
/// padding is split evenly, with the odd pixel on the right/bottom.
std::pair<RgbImage, LetterboxTransform> letterbox(const RgbImage& image, int target_width, int target_height);

/// Applies the same pixel sampling to an annotation mask.
BitMask letterbox_mask(const BitMask& mask, const LetterboxTransform& transform);

}  // namespace fruitsynth
