#include "fruitsynth/objprep.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "fruitsynth/errors.hpp"

namespace fruitsynth {

void WhiteThreshold::validate() const {
  if (min_channel_value < 1 || min_channel_value > 255)
    throw Error(Errc::InvalidArgument, "white threshold must be in 1..255, got " + std::to_string(min_channel_value));
}

BitMask extract_mask(const RgbImage& image, WhiteThreshold thresh) {
  thresh.validate();
  const auto t = static_cast<std::uint8_t>(thresh.min_channel_value);
  BitMask mask(image.width(), image.height());
  const auto px = image.data();
  std::size_t i = 0;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x, i += 3) {
      const bool white = px[i] >= t && px[i + 1] >= t && px[i + 2] >= t;
      if (!white) mask.set(x, y);
    }
  }
  return mask;
}

BitMask clean_mask(const BitMask& mask, int min_component_area) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> label(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
  std::vector<int> stack;
  int best_label = -1;
  std::size_t best_area = 0;
  int next_label = 0;

  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const int start = y0 * w + x0;
      if (!mask.get(x0, y0) || label[static_cast<std::size_t>(start)] >= 0) continue;
      const int id = next_label++;
      std::size_t area = 0;
      stack.assign(1, start);
      label[static_cast<std::size_t>(start)] = id;
      while (!stack.empty()) {
        const int p = stack.back();
        stack.pop_back();
        ++area;
        const int px = p % w;
        const int py = p / w;
        const int nbr[4][2] = {{px - 1, py}, {px + 1, py}, {px, py - 1}, {px, py + 1}};
        for (const auto& n : nbr) {
          if (n[0] < 0 || n[0] >= w || n[1] < 0 || n[1] >= h) continue;
          const int q = n[1] * w + n[0];
          if (label[static_cast<std::size_t>(q)] >= 0 || !mask.get(n[0], n[1])) continue;
          label[static_cast<std::size_t>(q)] = id;
          stack.push_back(q);
        }
      }
      if (area >= static_cast<std::size_t>(std::max(min_component_area, 0)) && area > best_area) {
        best_area = area;
        best_label = id;
      }
    }
  }
  if (best_label < 0) throw Error(Errc::EmptyMask, "no connected component with area >= " + std::to_string(min_component_area));

  BitMask out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (label[static_cast<std::size_t>(y * w + x)] == best_label) out.set(x, y);
  return out;
}

AnnotatedObject make_cutout(const RgbImage& image, const BitMask& mask, Category category, std::string source_id) {
  if (mask.width() != image.width() || mask.height() != image.height())
    throw Error(Errc::DimensionMismatch, "make_cutout: mask and image dims differ");
  const auto box = mask.bounding_box();
  if (!box) throw Error(Errc::EmptyMask, "make_cutout: mask is empty" + (source_id.empty() ? "" : " (" + source_id + ")"));
  return AnnotatedObject{crop_image(image, *box), mask.crop(*box), category, std::move(source_id)};
}

AnnotatedObject self_annotate(const RgbImage& image, const SelfAnnotateConfig& cfg, Category category,
                              std::string source_id) {
  auto raw = extract_mask(image, cfg.white);
  auto cleaned = clean_mask(raw, cfg.min_component_area);
  return make_cutout(image, cleaned, category, std::move(source_id));
}

}  // namespace fruitsynth
