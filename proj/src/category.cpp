#include "fruitsynth/category.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "fruitsynth/errors.hpp"

namespace fruitsynth {

std::string_view category_name(Category c) noexcept {
  switch (c) {
    case Category::Apple: return "apple";
    case Category::Banana: return "banana";
    case Category::Strawberry: return "strawberry";
    case Category::Orange: return "orange";
    case Category::Peach: return "peach";
    case Category::Plum: return "plum";
  }
  return "unknown";
}

std::optional<Category> category_from_id(int id) noexcept {
  if (id < 1 || id > static_cast<int>(kAllCategories.size())) return std::nullopt;
  return static_cast<Category>(id);
}

std::optional<Category> category_from_name(std::string_view name) noexcept {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  for (Category c : kAllCategories)
    if (category_name(c) == lower) return c;
  return std::nullopt;
}

Category parse_category(std::string_view text) {
  if (auto c = category_from_name(text)) return *c;
  int id = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
  if (ec == std::errc() && ptr == text.data() + text.size())
    if (auto c = category_from_id(id)) return *c;
  throw Error(Errc::InvalidArgument, "unknown category '" + std::string(text) + "'");
}

}  // namespace fruitsynth
