#include "fruitsynth/rle.hpp"

#include <string>

#include "fruitsynth/errors.hpp"

namespace fruitsynth {

RleMask encode_mask_rle(const BitMask& mask) {
  RleMask rle{mask.width(), mask.height(), {}};
  bool current = false;
  std::uint32_t run = 0;
  for (int x = 0; x < mask.width(); ++x) {
    for (int y = 0; y < mask.height(); ++y) {
      const bool bit = mask.get(x, y);
      if (bit != current) {
        rle.counts.push_back(run);
        run = 0;
        current = bit;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

BitMask decode_mask_rle(const RleMask& rle) {
  if (rle.width < 1 || rle.height < 1) throw Error(Errc::ParseError, "RLE: invalid size");
  const std::uint64_t total = static_cast<std::uint64_t>(rle.width) * static_cast<std::uint64_t>(rle.height);
  std::uint64_t sum = 0;
  for (auto c : rle.counts) sum += c;
  if (sum != total)
    throw Error(Errc::ParseError, "RLE: counts sum to " + std::to_string(sum) + ", expected " + std::to_string(total));

  BitMask mask(rle.width, rle.height);
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < rle.counts.size(); ++i) {
    const bool on = (i % 2) == 1;
    for (std::uint32_t k = 0; k < rle.counts[i]; ++k, ++pos) {
      if (!on) continue;
      const auto h = static_cast<std::uint64_t>(rle.height);
      mask.set(static_cast<int>(pos / h), static_cast<int>(pos % h));
    }
  }
  return mask;
}

std::uint64_t rle_area(const RleMask& rle) {
  std::uint64_t area = 0;
  for (std::size_t i = 1; i < rle.counts.size(); i += 2) area += rle.counts[i];
  return area;
}

}  // namespace fruitsynth
