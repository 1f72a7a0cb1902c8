#pragma once

#include <cstdint>
#include <vector>

#include "fruitsynth/image.hpp"

namespace fruitsynth {

/// Uncompressed run-length counts in column-major order. The first run is
/// always background (it may be zero-length), runs then alternate.
struct RleMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> counts;

  bool operator==(const RleMask&) const = default;
};

RleMask encode_mask_rle(const BitMask& mask);

/// Throws ParseError when the counts do not cover exactly width*height pixels.
BitMask decode_mask_rle(const RleMask& rle);

/// Area without decoding: the sum of the odd-indexed runs.
std::uint64_t rle_area(const RleMask& rle);

}  // namespace fruitsynth
