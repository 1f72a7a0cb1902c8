#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include <unistd.h>

namespace fstest {

namespace {

Rgb base_colour(Category c) {
  switch (c) {
    case Category::Apple: return {190, 30, 35};
    case Category::Banana: return {225, 200, 50};
    case Category::Strawberry: return {200, 20, 60};
    case Category::Orange: return {235, 130, 20};
    case Category::Peach: return {230, 160, 120};
    case Category::Plum: return {90, 30, 90};
  }
  return {128, 128, 128};
}

std::uint8_t clamp_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 230L)); }

}  // namespace

RgbImage fruit_image(Rng& rng, Category c, int width, int height) {
  RgbImage img(width, height, Rgb{255, 255, 255});
  const double cx = width / 2.0 + rng.uniform_real(-3, 3);
  const double cy = height / 2.0 + rng.uniform_real(-3, 3);
  const double rx = width * rng.uniform_real(0.25, 0.4);
  const double ry = height * rng.uniform_real(0.25, 0.4);
  const Rgb base = base_colour(c);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = (x + 0.5 - cx) / rx;
      const double dy = (y + 0.5 - cy) / ry;
      const double r2 = dx * dx + dy * dy;
      if (r2 > 1.0) continue;
      const double shade = 1.0 - 0.35 * r2 + 0.15 * (dx < 0 && dy < 0 ? -dx * -dy : 0.0);
      img.set(x, y, {clamp_u8(base[0] * shade), clamp_u8(base[1] * shade), clamp_u8(base[2] * shade)});
    }
  }
  return img;
}

RgbImage background_image(Rng& rng, int width, int height) {
  RgbImage img(width, height);
  const int tone = static_cast<int>(rng.uniform_int(80, 160));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int grain = static_cast<int>(rng.uniform_int(-12, 12));
      const int v = std::clamp(tone + ((x / 16 + y / 16) % 2) * 20 + grain, 0, 230);
      img.set(x, y, {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v * 3 / 4),
                     static_cast<std::uint8_t>(v / 2)});
    }
  }
  return img;
}

std::vector<AnnotatedObject> fruit_objects(std::uint64_t seed, int n, int size) {
  Rng rng(seed);
  std::vector<AnnotatedObject> out;
  for (int i = 0; i < n; ++i) {
    const Category c = kAllCategories[static_cast<std::size_t>(i) % kAllCategories.size()];
    out.push_back(self_annotate(fruit_image(rng, c, size, size), SelfAnnotateConfig{}, c,
                                std::string(category_name(c)) + "_" + std::to_string(i)));
  }
  return out;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("fruitsynth_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace fstest
