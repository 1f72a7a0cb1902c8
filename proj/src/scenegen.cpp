#include "fruitsynth/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fruitsynth/errors.hpp"

namespace fruitsynth {

namespace {

constexpr int kScaleRetries = 8;

std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

// Maps a pixel of the rotated frame back to the unrotated patch.
std::pair<int, int> unrotate(int rx, int ry, int w, int h, int quarters) {
  switch (quarters & 3) {
    case 1: return {ry, h - 1 - rx};
    case 2: return {w - 1 - rx, h - 1 - ry};
    case 3: return {w - 1 - ry, rx};
    default: return {rx, ry};
  }
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& v : k) v /= sum;
  return k;
}

RgbImage gaussian_blur(const RgbImage& image, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = image.width();
  const int h = image.height();
  std::vector<double> tmp(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  const auto src = image.data();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int sx = std::clamp(x + i, 0, w - 1);
          acc += kernel[static_cast<std::size_t>(i + radius)] * src[(static_cast<std::size_t>(y) * w + sx) * 3 + c];
        }
        tmp[(static_cast<std::size_t>(y) * w + x) * 3 + c] = acc;
      }
    }
  }
  RgbImage out(w, h);
  auto dst = out.data();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int sy = std::clamp(y + i, 0, h - 1);
          acc += kernel[static_cast<std::size_t>(i + radius)] * tmp[(static_cast<std::size_t>(sy) * w + x) * 3 + c];
        }
        dst[(static_cast<std::size_t>(y) * w + x) * 3 + c] = clamp_u8(acc);
      }
    }
  }
  return out;
}

}  // namespace

AugmentConfig AugmentConfig::all_on() {
  AugmentConfig cfg;
  cfg.brightness = cfg.contrast = cfg.channel_shift = cfg.blur = cfg.hflip = true;
  return cfg;
}

void SynthConfig::validate() const {
  if (scene_width < 1 || scene_height < 1) throw Error(Errc::InvalidArgument, "scene dims must be >= 1");
  if (min_instances < 0 || max_instances < min_instances)
    throw Error(Errc::InvalidArgument, "instance range must satisfy 0 <= lo <= hi");
  if (!(scale_lo > 0.0) || scale_hi < scale_lo)
    throw Error(Errc::InvalidArgument, "scale jitter range must satisfy 0 < lo <= hi");
  if (flip_prob < 0.0 || flip_prob > 1.0) throw Error(Errc::InvalidArgument, "flip probability must be in [0,1]");
  if (visibility_floor < 0.0 || visibility_floor >= 1.0)
    throw Error(Errc::InvalidArgument, "visibility floor must be in [0,1)");
  self_annotation.white.validate();
}

std::pair<int, int> placed_size(const AnnotatedObject& object, double scale, int rotation_quarters) {
  int w = object.patch.width();
  int h = object.patch.height();
  if (rotation_quarters & 1) std::swap(w, h);
  return {std::max(1, static_cast<int>(std::lround(w * scale))), std::max(1, static_cast<int>(std::lround(h * scale)))};
}

std::pair<RgbImage, BitMask> render_placement(const AnnotatedObject& object, const Placement& p) {
  const int pw = object.patch.width();
  const int ph = object.patch.height();
  const int rw = (p.rotation_quarters & 1) ? ph : pw;
  const int rh = (p.rotation_quarters & 1) ? pw : ph;
  const auto [sw, sh] = placed_size(object, p.scale, p.rotation_quarters);
  RgbImage patch(sw, sh);
  BitMask mask(sw, sh);
  for (int dy = 0; dy < sh; ++dy) {
    const int ry = static_cast<int>((2LL * dy + 1) * rh / (2LL * sh));
    for (int dx = 0; dx < sw; ++dx) {
      int rx = static_cast<int>((2LL * dx + 1) * rw / (2LL * sw));
      if (p.flip_h) rx = rw - 1 - rx;
      const auto [ox, oy] = unrotate(rx, ry, pw, ph, p.rotation_quarters);
      patch.set(dx, dy, object.patch.at(ox, oy));
      if (object.mask.get(ox, oy)) mask.set(dx, dy);
    }
  }
  return {std::move(patch), std::move(mask)};
}

std::vector<Placement> sample_placements(Rng& rng, const SynthConfig& cfg, const std::vector<AnnotatedObject>& objects) {
  cfg.validate();
  if (objects.empty()) throw Error(Errc::InvalidArgument, "sample_placements: no objects");
  const int n = static_cast<int>(rng.uniform_int(cfg.min_instances, cfg.max_instances));
  std::vector<Placement> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Placement p;
    p.object_index = rng.index(objects.size());
    const auto& obj = objects[p.object_index];
    p.rotation_quarters = cfg.allow_rotation ? static_cast<int>(rng.uniform_int(0, 3)) : 0;

    auto fits = [&](double s) {
      const auto [w, h] = placed_size(obj, s, p.rotation_quarters);
      return w <= cfg.scene_width && h <= cfg.scene_height;
    };
    p.scale = rng.uniform_real(cfg.scale_lo, cfg.scale_hi);
    for (int retry = 0; retry < kScaleRetries && !fits(p.scale); ++retry)
      p.scale = rng.uniform_real(cfg.scale_lo, cfg.scale_hi);
    if (!fits(p.scale)) p.scale = cfg.scale_lo;
    if (!fits(p.scale))
      throw Error(Errc::SceneTooSmall, "object '" + obj.source_id + "' does not fit a " +
                                           std::to_string(cfg.scene_width) + "x" + std::to_string(cfg.scene_height) +
                                           " scene even at minimum scale");

    p.flip_h = rng.bernoulli(cfg.flip_prob);
    const auto [w, h] = placed_size(obj, p.scale, p.rotation_quarters);
    p.x = static_cast<int>(rng.uniform_int(0, cfg.scene_width - w));
    p.y = static_cast<int>(rng.uniform_int(0, cfg.scene_height - h));
    p.z_order = i;
    out.push_back(p);
  }
  return out;
}

SceneAnnotation compose_scene(const RgbImage& background, const std::vector<AnnotatedObject>& objects,
                              const std::vector<Placement>& placements, const SynthConfig& cfg) {
  cfg.validate();
  if (background.width() != cfg.scene_width || background.height() != cfg.scene_height)
    throw Error(Errc::DimensionMismatch, "compose_scene: background is " + std::to_string(background.width()) + "x" +
                                             std::to_string(background.height()) + ", scene is " +
                                             std::to_string(cfg.scene_width) + "x" + std::to_string(cfg.scene_height));
  const int W = cfg.scene_width;
  const int H = cfg.scene_height;

  std::vector<std::size_t> order(placements.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return placements[a].z_order < placements[b].z_order; });

  SceneAnnotation scene{"", background, {}, "", 0, std::nullopt};
  std::vector<BitMask> full;
  full.reserve(order.size());
  for (std::size_t idx : order) {
    const auto& p = placements[idx];
    if (p.object_index >= objects.size())
      throw Error(Errc::InvalidArgument, "placement references object " + std::to_string(p.object_index));
    const auto& obj = objects[p.object_index];
    auto [patch, mask] = render_placement(obj, p);
    if (p.x < 0 || p.y < 0 || p.x + patch.width() > W || p.y + patch.height() > H)
      throw Error(Errc::InvalidArgument, "placement outside scene bounds");
    BitMask scene_mask(W, H);
    for (int y = 0; y < patch.height(); ++y) {
      for (int x = 0; x < patch.width(); ++x) {
        if (!mask.get(x, y)) continue;
        scene.image.set(p.x + x, p.y + y, patch.at(x, y));
        scene_mask.set(p.x + x, p.y + y);
      }
    }
    full.push_back(std::move(scene_mask));
  }

  // Walk from the top down so each visible mask is its own mask minus the union above it.
  std::vector<std::optional<SceneInstance>> kept(order.size());
  BitMask covered(W, H);
  for (std::size_t k = order.size(); k-- > 0;) {
    const auto& p = placements[order[k]];
    const auto& obj = objects[p.object_index];
    BitMask visible = full[k].minus(covered);
    covered |= full[k];
    const std::size_t full_area = full[k].popcount();
    const std::size_t visible_area = visible.popcount();
    if (visible_area == 0 || full_area == 0) continue;
    if (static_cast<double>(visible_area) < cfg.visibility_floor * static_cast<double>(full_area)) continue;
    const auto box = visible.bounding_box();
    kept[k] = SceneInstance{obj.category, std::move(visible), *box, full_area, p.z_order, p.object_index, obj.source_id};
  }
  for (auto& inst : kept)
    if (inst) scene.instances.push_back(std::move(*inst));
  return scene;
}

RgbImage crop_background(Rng& rng, const RgbImage& source, int scene_width, int scene_height) {
  if (source.width() < scene_width || source.height() < scene_height)
    throw Error(Errc::SourceTooSmall, "background " + std::to_string(source.width()) + "x" +
                                          std::to_string(source.height()) + " is smaller than scene " +
                                          std::to_string(scene_width) + "x" + std::to_string(scene_height));
  const int x = static_cast<int>(rng.uniform_int(0, source.width() - scene_width));
  const int y = static_cast<int>(rng.uniform_int(0, source.height() - scene_height));
  return crop_image(source, Bbox{x, y, scene_width, scene_height});
}

SceneAnnotation augment(const SceneAnnotation& scene, Rng& rng, const AugmentConfig& cfg) {
  SceneAnnotation out = scene;
  if (!cfg.any()) return out;

  double gain = 1.0, contrast = 1.0, sigma = 0.0;
  int shift[3] = {0, 0, 0};
  if (cfg.brightness) gain = rng.uniform_real(cfg.brightness_lo, cfg.brightness_hi);
  if (cfg.contrast) contrast = rng.uniform_real(cfg.contrast_lo, cfg.contrast_hi);
  if (cfg.channel_shift)
    for (int& s : shift) s = static_cast<int>(rng.uniform_int(-cfg.shift_max, cfg.shift_max));
  if (cfg.blur) sigma = rng.uniform_real(0.0, cfg.blur_sigma_max);
  const bool flip = cfg.hflip && rng.bernoulli(cfg.hflip_prob);

  if (cfg.brightness || cfg.contrast || cfg.channel_shift) {
    auto px = out.image.data();
    for (std::size_t i = 0; i < px.size(); ++i) {
      const double v = (px[i] * gain - 128.0) * contrast + 128.0 + shift[i % 3];
      px[i] = clamp_u8(v);
    }
  }
  if (sigma > 0.0) out.image = gaussian_blur(out.image, sigma);

  if (flip) {
    const int W = out.image.width();
    out.image = flip_horizontal(out.image);
    for (auto& inst : out.instances) {
      inst.visible_mask = inst.visible_mask.flipped_horizontal();
      inst.bbox.x = W - inst.bbox.x - inst.bbox.w;
    }
  }
  return out;
}

SceneAnnotation letterbox_scene(const SceneAnnotation& scene, int target_width, int target_height) {
  auto [image, transform] = letterbox(scene.image, target_width, target_height);
  SceneAnnotation out{scene.scene_id, std::move(image), {}, scene.background_source, scene.seed, transform};
  for (const auto& inst : scene.instances) {
    SceneInstance moved = inst;
    moved.visible_mask = letterbox_mask(inst.visible_mask, transform);
    const auto box = moved.visible_mask.bounding_box();
    if (!box) continue;
    moved.bbox = *box;
    out.instances.push_back(std::move(moved));
  }
  return out;
}

SceneAnnotation generate_scene(Rng rng, const SynthConfig& cfg, const std::vector<AnnotatedObject>& objects,
                               const std::vector<std::pair<std::string, RgbImage>>& backgrounds,
                               std::string scene_id) {
  if (backgrounds.empty()) throw Error(Errc::InvalidArgument, "generate_scene: no backgrounds");
  const std::uint64_t seed = rng.seed();
  const auto& [bg_name, bg_image] = backgrounds[rng.index(backgrounds.size())];
  auto background = crop_background(rng, bg_image, cfg.scene_width, cfg.scene_height);
  auto placements = sample_placements(rng, cfg, objects);
  auto scene = compose_scene(background, objects, placements, cfg);
  if (cfg.augment.any()) scene = augment(scene, rng, cfg.augment);
  scene.scene_id = std::move(scene_id);
  scene.background_source = bg_name;
  scene.seed = seed;
  return scene;
}

}  // namespace fruitsynth
