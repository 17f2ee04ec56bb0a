#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "voxelfeat/geometry.hpp"
#include "voxelfeat/saliency.hpp"

namespace voxelfeat {

/// 8-bit PNG, any colour type; returned as RGB in [0, 1].
RgbImage load_rgb_png(const std::filesystem::path& path);
void save_rgb_png(const std::filesystem::path& path, const RgbImage& image);

/// 16-bit grayscale PNG; depth = raw * meters_per_unit, raw 0 marks a hole.
DepthImage load_depth_png(const std::filesystem::path& path, double meters_per_unit);
/// Invalid or unrepresentable depths are written as 0.
void save_depth_png(const std::filesystem::path& path, const DepthImage& depth, double meters_per_unit);

void save_gray8_png(const std::filesystem::path& path, int height, int width, const std::vector<std::uint8_t>& pixels);

/// Raw attention file: u32 height, u32 width, u32 K (little-endian), then
/// height * width * K little-endian f32 values, row-major with channels
/// interleaved per pixel.
SaliencyMap load_saliency_file(const std::filesystem::path& path);
void save_saliency_file(const std::filesystem::path& path, const SaliencyMap& map);

/// Width and height of a PNG without decoding pixels.
std::pair<int, int> png_extent(const std::filesystem::path& path);

}  // namespace voxelfeat
