#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fruitsynth/category.hpp"
#include "fruitsynth/image.hpp"
#include "fruitsynth/letterbox.hpp"
#include "fruitsynth/objprep.hpp"
#include "fruitsynth/rng.hpp"

namespace fruitsynth {

/// Annotation-consistent augmentation. Photometric ops never touch masks;
/// the horizontal flip moves image, masks and boxes together.
struct AugmentConfig {
  bool brightness = false;
  bool contrast = false;
  bool channel_shift = false;
  bool blur = false;
  bool hflip = false;

  double brightness_lo = 0.8, brightness_hi = 1.2;
  double contrast_lo = 0.8, contrast_hi = 1.2;
  int shift_max = 10;
  double blur_sigma_max = 1.5;
  double hflip_prob = 0.5;

  bool any() const noexcept { return brightness || contrast || channel_shift || blur || hflip; }
  static AugmentConfig all_on();
};

struct SynthConfig {
  int scene_width = 1280;
  int scene_height = 720;
  int min_instances = 10;
  int max_instances = 10;
  double scale_lo = 0.5;
  double scale_hi = 2.0;
  double flip_prob = 0.5;
  bool allow_rotation = false;  // quarter turns only
  double visibility_floor = 0.05;
  SelfAnnotateConfig self_annotation{};
  AugmentConfig augment{};

  void validate() const;
};

struct Placement {
  std::size_t object_index = 0;
  double scale = 1.0;
  bool flip_h = false;
  int rotation_quarters = 0;  // clockwise
  int x = 0;
  int y = 0;
  int z_order = 0;  // higher is pasted later, i.e. on top

  bool operator==(const Placement&) const = default;
};

struct SceneInstance {
  Category category = Category::Apple;
  BitMask visible_mask;
  Bbox bbox;
  std::size_t full_area = 0;
  int z_order = 0;
  std::size_t object_index = 0;
  std::string source_id;

  std::size_t visible_area() const { return visible_mask.popcount(); }
};

struct SceneAnnotation {
  std::string scene_id;
  RgbImage image;
  std::vector<SceneInstance> instances;
  std::string background_source;
  std::uint64_t seed = 0;
  std::optional<LetterboxTransform> letterbox;
};

/// Dimensions of an object's patch after rotation and nearest-neighbour scaling.
std::pair<int, int> placed_size(const AnnotatedObject& object, double scale, int rotation_quarters);

/// Rasterizes the scaled / flipped / rotated patch and mask of one placement.
std::pair<RgbImage, BitMask> render_placement(const AnnotatedObject& object, const Placement& placement);

std::vector<Placement> sample_placements(Rng& rng, const SynthConfig& cfg, const std::vector<AnnotatedObject>& objects);

/// Pastes objects in ascending z_order. Each instance's visible mask is its
/// pasted mask minus everything pasted above it; instances whose visible
/// fraction falls below cfg.visibility_floor (or is zero) are dropped from the
/// annotations but their pixels stay in the image.
SceneAnnotation compose_scene(const RgbImage& background, const std::vector<AnnotatedObject>& objects,
                              const std::vector<Placement>& placements, const SynthConfig& cfg);

RgbImage crop_background(Rng& rng, const RgbImage& source, int scene_width, int scene_height);

SceneAnnotation augment(const SceneAnnotation& scene, Rng& rng, const AugmentConfig& cfg);

/// Letterboxes the image and every visible mask; boxes are recomputed from
/// the resampled masks and the transform is kept on the scene.
SceneAnnotation letterbox_scene(const SceneAnnotation& scene, int target_width, int target_height);

/// One full scene from a child stream: background pick, crop, placements,
/// compose, optional augmentation.
SceneAnnotation generate_scene(Rng rng, const SynthConfig& cfg, const std::vector<AnnotatedObject>& objects,
                               const std::vector<std::pair<std::string, RgbImage>>& backgrounds,
                               std::string scene_id);

}  // namespace fruitsynth
