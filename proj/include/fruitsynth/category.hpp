#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace fruitsynth {

/// Fruit categories. Ids are 1-based; 0 is reserved for background.
enum class Category : int {
  Apple = 1,
  Banana = 2,
  Strawberry = 3,
  Orange = 4,
  Peach = 5,
  Plum = 6,
};

inline constexpr std::array<Category, 6> kAllCategories = {
    Category::Apple, Category::Banana, Category::Strawberry, Category::Orange, Category::Peach, Category::Plum};

constexpr int category_id(Category c) noexcept { return static_cast<int>(c); }
std::string_view category_name(Category c) noexcept;

std::optional<Category> category_from_id(int id) noexcept;
std::optional<Category> category_from_name(std::string_view name) noexcept;

/// Accepts either a name ("apple") or a numeric id ("1").
Category parse_category(std::string_view text);

}  // namespace fruitsynth
