#pragma once

#include <filesystem>

#include "fruitsynth/image.hpp"

namespace fruitsynth {

/// Reads any PNG colour type, converting to 8-bit RGB (alpha is dropped).
RgbImage read_png_rgb(const std::filesystem::path& path);
void write_png_rgb(const std::filesystem::path& path, const RgbImage& image);

/// 16-bit single-channel depth PNG in millimeters.
DepthImage read_png_depth(const std::filesystem::path& path);
void write_png_depth(const std::filesystem::path& path, const DepthImage& depth);

}  // namespace fruitsynth
