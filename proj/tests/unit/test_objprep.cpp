#include <doctest.h>

#include <deque>

#include "fixtures.hpp"
#include "fruitsynth/errors.hpp"
#include "fruitsynth/objprep.hpp"

using namespace fruitsynth;

namespace {

// 8-bit-per-pixel flood fill keeping the largest 4-connected component.
BitMask largest_component(const BitMask& m) {
  const int w = m.width(), h = m.height();
  std::vector<int> comp(static_cast<std::size_t>(w * h), -1);
  std::vector<std::size_t> sizes;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!m.get(x, y) || comp[static_cast<std::size_t>(y * w + x)] >= 0) continue;
      const int id = static_cast<int>(sizes.size());
      sizes.push_back(0);
      std::deque<std::pair<int, int>> q{{x, y}};
      comp[static_cast<std::size_t>(y * w + x)] = id;
      while (!q.empty()) {
        auto [cx, cy] = q.front();
        q.pop_front();
        ++sizes.back();
        for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
          const int nx = cx + dx, ny = cy + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h || !m.get(nx, ny)) continue;
          auto& c = comp[static_cast<std::size_t>(ny * w + nx)];
          if (c < 0) {
            c = id;
            q.emplace_back(nx, ny);
          }
        }
      }
    }
  int best = 0;
  for (std::size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] > sizes[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  BitMask out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (comp[static_cast<std::size_t>(y * w + x)] == best) out.set(x, y);
  return out;
}

RgbImage white_with_patch(int w, int h, Bbox box, Rgb colour) {
  RgbImage img(w, h, Rgb{255, 255, 255});
  for (int y = box.y; y < box.y + box.h; ++y)
    for (int x = box.x; x < box.x + box.w; ++x) img.set(x, y, colour);
  return img;
}

}  // namespace

TEST_CASE("white threshold classifies single pixels") {
  RgbImage img(2, 1, Rgb{255, 255, 255});
  img.set(1, 0, {200, 30, 40});
  const BitMask m = extract_mask(img, WhiteThreshold{240});
  CHECK_FALSE(m.get(0, 0));
  CHECK(m.get(1, 0));
  // One channel below the threshold is enough to count as foreground.
  img.set(0, 0, {255, 239, 255});
  CHECK(extract_mask(img, WhiteThreshold{240}).get(0, 0));
  CHECK_THROWS_AS(extract_mask(img, WhiteThreshold{0}), Error);
}

TEST_CASE("centred 20x20 patch gives 400 foreground pixels") {
  const RgbImage img = white_with_patch(64, 64, {22, 22, 20, 20}, {180, 20, 20});
  std::size_t scan = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      const Rgb p = img.at(x, y);
      scan += !(p[0] >= 240 && p[1] >= 240 && p[2] >= 240);
    }
  CHECK(scan == 400);
  CHECK(extract_mask(img, WhiteThreshold{240}).popcount() == 400);
}

TEST_CASE("raising the threshold never shrinks the mask") {
  fruitsynth::Rng rng(1);
  const RgbImage img = fstest::fruit_image(rng, Category::Peach);
  std::size_t prev = 0;
  for (int t = 1; t <= 255; t += 6) {
    const BitMask m = extract_mask(img, WhiteThreshold{t});
    CHECK(m.popcount() >= prev);
    prev = m.popcount();
  }
}

TEST_CASE("clean_mask examples") {
  BitMask blob = BitMask::filled_box(64, 64, {10, 10, 20, 20});
  CHECK(clean_mask(blob, 50) == blob);

  BitMask noisy = blob;
  noisy.set(0, 0);
  noisy.set(50, 50);
  noisy.set(60, 2);
  const BitMask cleaned = clean_mask(noisy, 50);
  CHECK(cleaned == blob);
  CHECK(cleaned == largest_component(noisy));

  CHECK_THROWS_AS(clean_mask(BitMask(8, 8), 1), Error);
  CHECK_THROWS_AS(clean_mask(BitMask::filled_box(8, 8, {0, 0, 2, 2}), 5), Error);
}

TEST_CASE("clean_mask matches the flood-fill oracle on random masks") {
  fruitsynth::Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    BitMask m(24, 24);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x)
        if (rng.bernoulli(0.45)) m.set(x, y);
    const BitMask expect = largest_component(m);
    // Ties in component size are resolved by scan order in both implementations.
    CHECK(clean_mask(m, 1) == expect);
  }
}

TEST_CASE("diagonal contact does not join components") {
  BitMask m(4, 4);
  m.set(0, 0);
  m.set(1, 1);
  m.set(2, 1);
  CHECK(clean_mask(m, 1).popcount() == 2);
}

TEST_CASE("make_cutout examples") {
  const RgbImage img = white_with_patch(64, 64, {22, 22, 20, 20}, {180, 20, 20});
  const BitMask m = extract_mask(img, WhiteThreshold{});
  const AnnotatedObject obj = make_cutout(img, m, Category::Apple, "a");
  CHECK(obj.patch.width() == 20);
  CHECK(obj.patch.height() == 20);
  CHECK(obj.mask.popcount() == m.popcount());
  CHECK(obj.patch.at(0, 0) == Rgb{180, 20, 20});

  BitMask all(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) all.set(x, y);
  CHECK(make_cutout(img, all, Category::Apple).patch == img);

  CHECK_THROWS_AS(make_cutout(img, BitMask(64, 64), Category::Apple), Error);
  CHECK_THROWS_AS(make_cutout(img, BitMask(8, 8), Category::Apple), Error);
}

TEST_CASE("self_annotate end to end on a synthetic fruit") {
  fruitsynth::Rng rng(3);
  const RgbImage img = fstest::fruit_image(rng, Category::Orange);
  const AnnotatedObject obj = self_annotate(img, SelfAnnotateConfig{}, Category::Orange, "orange_0");
  CHECK(obj.category == Category::Orange);
  CHECK(obj.source_id == "orange_0");
  CHECK(obj.mask.popcount() == extract_mask(img, WhiteThreshold{}).popcount());
  CHECK(obj.mask.width() == obj.patch.width());

  const RgbImage white(64, 64, Rgb{255, 255, 255});
  try {
    self_annotate(white, SelfAnnotateConfig{}, Category::Apple);
    FAIL("expected EmptyMask");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyMask);
  }
}
