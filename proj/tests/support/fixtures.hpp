#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fruitsynth/category.hpp"
#include "fruitsynth/image.hpp"
#include "fruitsynth/objprep.hpp"
#include "fruitsynth/rng.hpp"

namespace fstest {

using namespace fruitsynth;

// Object-wise image: a shaded ellipse of the category's colour on pure white.
RgbImage fruit_image(Rng& rng, Category c, int width = 64, int height = 64);

// Textured table-top background (no pure white anywhere).
RgbImage background_image(Rng& rng, int width, int height);

// n self-annotated objects cycling through all categories.
std::vector<AnnotatedObject> fruit_objects(std::uint64_t seed, int n, int size = 48);

// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fstest
