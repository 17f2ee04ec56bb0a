#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <filesystem>
#include <string>
#include <vector>

#include "voxelfeat/voxelizer.hpp"

namespace voxelfeat {

struct ChannelSummary {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;  // over all voxels, empty ones included
};

struct InspectReport {
    GridDims dims;
    WorkspaceBounds bounds;
    int channels = 0;
    int saliency_channels = 0;
    std::size_t occupied_voxels = 0;
    std::uint32_t checksum = 0;
    std::vector<ChannelSummary> summaries;
};

/// Human-readable channel name, e.g. "rgb.r", "saliency.2", "occupancy".
std::string channel_name(const ChannelLayout& layout, int channel);

InspectReport inspect_grid(const VoxelGrid& grid);

/// Loads a tensor file (verifying its checksum) and summarizes it.
InspectReport inspect_file(const std::filesystem::path& path);

std::string format_report(const InspectReport& report);

enum class SliceAxis { kX, kY, kZ };
SliceAxis parse_slice_axis(std::string_view text);

/// Writes one axis-aligned slice of a channel as an 8-bit grayscale PNG,
/// scaled so the channel's min maps to 0 and its max to 255. Rows follow the
/// first remaining axis, columns the second.
/// Throws Error(kParameter) for an out-of-range channel or slice index.
void render_slice(const VoxelGrid& grid, int channel, SliceAxis axis, int index,
                  const std::filesystem::path& png_path);

}  // namespace voxelfeat
