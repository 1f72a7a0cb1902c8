#pragma once

#include <string>

#include "fruitsynth/category.hpp"
#include "fruitsynth/image.hpp"

namespace fruitsynth {

/// A pixel is background iff all three channels are >= min_channel_value.
struct WhiteThreshold {
  int min_channel_value = 240;

  void validate() const;
};

/// A self-annotated object: a tight crop and the object mask over it.
struct AnnotatedObject {
  RgbImage patch;
  BitMask mask;
  Category category;
  std::string source_id;
};

struct SelfAnnotateConfig {
  WhiteThreshold white{};
  int min_component_area = 16;
};

BitMask extract_mask(const RgbImage& image, WhiteThreshold thresh);

/// Keeps the largest 4-connected component whose area is at least
/// `min_component_area` (ties go to the component met first in row-major
/// order). Throws EmptyMask when no component qualifies.
BitMask clean_mask(const BitMask& mask, int min_component_area);

/// Crops image and mask to the mask's bounding box.
AnnotatedObject make_cutout(const RgbImage& image, const BitMask& mask, Category category,
                            std::string source_id = {});

/// extract_mask -> clean_mask -> make_cutout.
AnnotatedObject self_annotate(const RgbImage& image, const SelfAnnotateConfig& cfg, Category category,
                              std::string source_id = {});

}  // namespace fruitsynth
