#include "voxelfeat/tensor_file.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

#include "voxelfeat/errors.hpp"

namespace voxelfeat {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t offset) {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(in[offset + b]) << (8 * b);
    return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t offset) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(in[offset + b]) << (8 * b);
    return v;
}

void append_payload(std::vector<std::uint8_t>& out, std::span<const float> values) {
    const std::size_t start = out.size();
    out.resize(start + values.size() * 4);
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(out.data() + start, values.data(), values.size() * 4);
    } else {
        for (std::size_t i = 0; i < values.size(); ++i) {
            const auto bits = std::bit_cast<std::uint32_t>(values[i]);
            for (int b = 0; b < 4; ++b) out[start + 4 * i + b] = static_cast<std::uint8_t>(bits >> (8 * b));
        }
    }
}

}  // namespace

std::uint32_t crc32_bytes(std::span<const std::uint8_t> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    std::size_t offset = 0;
    while (offset < bytes.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, std::numeric_limits<uInt>::max()));
        crc = ::crc32(crc, bytes.data() + offset, chunk);
        offset += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

std::uint32_t payload_checksum(const VoxelGrid& grid) {
    std::vector<std::uint8_t> payload;
    payload.reserve(grid.features().size() * 4);
    append_payload(payload, grid.features());
    return crc32_bytes(payload);
}

std::vector<std::uint8_t> serialize_grid(const VoxelGrid& grid) {
    std::vector<std::uint8_t> out;
    out.reserve(kTensorHeaderSize + grid.features().size() * 4 + 4);
    out.insert(out.end(), kTensorMagic, kTensorMagic + 4);
    put_u32(out, kTensorFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(grid.dims().nx));
    put_u32(out, static_cast<std::uint32_t>(grid.dims().ny));
    put_u32(out, static_cast<std::uint32_t>(grid.dims().nz));
    put_u32(out, static_cast<std::uint32_t>(grid.channel_count()));
    for (int a = 0; a < 3; ++a) put_u64(out, std::bit_cast<std::uint64_t>(grid.bounds().min_corner[a]));
    for (int a = 0; a < 3; ++a) put_u64(out, std::bit_cast<std::uint64_t>(grid.bounds().max_corner[a]));
    put_u32(out, static_cast<std::uint32_t>(grid.saliency_channels()));
    put_u32(out, 0);

    const std::size_t payload_start = out.size();
    append_payload(out, grid.features());
    const std::uint32_t crc = crc32_bytes(std::span(out).subspan(payload_start));
    put_u32(out, crc);
    return out;
}

VoxelGrid deserialize_grid(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kTensorHeaderSize + 4) raise(ErrorCode::kFormat, "voxel tensor file is truncated");
    if (std::memcmp(bytes.data(), kTensorMagic, 4) != 0) raise(ErrorCode::kFormat, "bad magic, not a VXFT file");
    const std::uint32_t version = get_u32(bytes, 4);
    if (version != kTensorFormatVersion) {
        raise(ErrorCode::kVersion, "unsupported voxel tensor version " + std::to_string(version));
    }
    GridDims dims{static_cast<int>(get_u32(bytes, 8)), static_cast<int>(get_u32(bytes, 12)),
                  static_cast<int>(get_u32(bytes, 16))};
    const std::uint32_t channels = get_u32(bytes, 20);
    WorkspaceBounds bounds;
    for (int a = 0; a < 3; ++a) {
        bounds.min_corner[a] = std::bit_cast<double>(get_u64(bytes, 24 + 8 * static_cast<std::size_t>(a)));
        bounds.max_corner[a] = std::bit_cast<double>(get_u64(bytes, 48 + 8 * static_cast<std::size_t>(a)));
    }
    const std::uint32_t k = get_u32(bytes, 72);
    if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1) raise(ErrorCode::kFormat, "grid dims must be positive");
    if (k > 64 || channels != 10 + k) raise(ErrorCode::kFormat, "channel count does not equal 10 + K");

    const std::size_t values = dims.voxel_count() * channels;
    if (bytes.size() != kTensorHeaderSize + values * 4 + 4) {
        raise(ErrorCode::kFormat, "file size does not match the header's dims and channel count");
    }
    const auto payload = bytes.subspan(kTensorHeaderSize, values * 4);
    const std::uint32_t stored = get_u32(bytes, kTensorHeaderSize + values * 4);
    if (crc32_bytes(payload) != stored) raise(ErrorCode::kIntegrity, "payload CRC mismatch");

    std::vector<float> features(values);
    for (std::size_t i = 0; i < values; ++i) features[i] = std::bit_cast<float>(get_u32(payload, 4 * i));
    return VoxelGrid(dims, bounds, static_cast<int>(k), std::move(features));
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::random_device rd;
    fs::path tmp = path;
    tmp += ".tmp" + std::to_string(rd());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorCode::kIo, "cannot open " + tmp.string() + " for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) raise(ErrorCode::kIo, "failed writing " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        raise(ErrorCode::kIo, "cannot rename into " + path.string() + ": " + ec.message());
    }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::kMissingFile, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void save_grid(const std::filesystem::path& path, const VoxelGrid& grid) {
    write_file_atomic(path, serialize_grid(grid));
}

VoxelGrid load_grid(const std::filesystem::path& path) { return deserialize_grid(read_file_bytes(path)); }

}  // namespace voxelfeat
