#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "voxelfeat/voxelizer.hpp"

namespace voxelfeat {

/// Voxel tensor file layout, all integers and floats little-endian:
///
///   offset  size  field
///        0     4  magic "VXFT"
///        4     4  format version (u32)
///        8    12  nx, ny, nz (u32 each)
///       20     4  channel count (u32), equals 10 + K
///       24    48  min x, y, z, max x, y, z (f64 each)
///       72     4  K, saliency channel count (u32)
///       76     4  reserved (u32, written as 0)
///       80     -  payload: f32 per value, channel-major then x, y, z
///      end     4  CRC-32 (IEEE, zlib polynomial) of the payload bytes (u32)
inline constexpr std::uint32_t kTensorFormatVersion = 1;
inline constexpr std::size_t kTensorHeaderSize = 80;
inline constexpr char kTensorMagic[4] = {'V', 'X', 'F', 'T'};

/// CRC-32 of arbitrary bytes.
std::uint32_t crc32_bytes(std::span<const std::uint8_t> bytes);

/// CRC-32 of the grid's little-endian f32 payload; stable across platforms.
std::uint32_t payload_checksum(const VoxelGrid& grid);

std::vector<std::uint8_t> serialize_grid(const VoxelGrid& grid);

/// Throws Error(kFormat) for a bad magic, header or size, Error(kVersion)
/// for an unknown version and Error(kIntegrity) when the CRC does not match.
VoxelGrid deserialize_grid(std::span<const std::uint8_t> bytes);

/// Writes via a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

void save_grid(const std::filesystem::path& path, const VoxelGrid& grid);
VoxelGrid load_grid(const std::filesystem::path& path);

}  // namespace voxelfeat
