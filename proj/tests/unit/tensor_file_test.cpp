#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "test_support.hpp"
#include "voxelfeat/synth.hpp"
#include "voxelfeat/tensor_file.hpp"

using namespace voxelfeat;
using namespace voxelfeat::testing;

namespace {

VoxelGrid random_grid(std::uint64_t seed, int k, const GridDims& dims) {
    return voxelize(random_cloud(500, k, WorkspaceBounds{}, seed), WorkspaceBounds{}, dims, k).grid;
}

std::uint32_t read_u32(const std::vector<std::uint8_t>& b, std::size_t off) {
    return static_cast<std::uint32_t>(b[off]) | static_cast<std::uint32_t>(b[off + 1]) << 8 |
           static_cast<std::uint32_t>(b[off + 2]) << 16 | static_cast<std::uint32_t>(b[off + 3]) << 24;
}

double read_f64(const std::vector<std::uint8_t>& b, std::size_t off) {
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = bits << 8 | b[off + static_cast<std::size_t>(i)];
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

bool bitwise_equal(std::span<const float> a, std::span<const float> b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

}  // namespace

TEST(TensorFile, HeaderLayout) {
    const GridDims dims{4, 5, 6};
    WorkspaceBounds bounds;
    bounds.min_corner = {-0.5, -1.5, 0.25};
    bounds.max_corner = {1.5, 0.5, 3.0};
    const VoxelGrid grid(dims, bounds, 3);
    const auto bytes = serialize_grid(grid);
    ASSERT_EQ(bytes.size(), 80u + 4u * 4 * 5 * 6 * 13 + 4u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "VXFT");
    EXPECT_EQ(read_u32(bytes, 4), 1u);
    EXPECT_EQ(read_u32(bytes, 8), 4u);
    EXPECT_EQ(read_u32(bytes, 12), 5u);
    EXPECT_EQ(read_u32(bytes, 16), 6u);
    EXPECT_EQ(read_u32(bytes, 20), 13u);
    EXPECT_EQ(read_f64(bytes, 24), -0.5);
    EXPECT_EQ(read_f64(bytes, 32), -1.5);
    EXPECT_EQ(read_f64(bytes, 40), 0.25);
    EXPECT_EQ(read_f64(bytes, 48), 1.5);
    EXPECT_EQ(read_f64(bytes, 56), 0.5);
    EXPECT_EQ(read_f64(bytes, 64), 3.0);
    EXPECT_EQ(read_u32(bytes, 72), 3u);
    EXPECT_EQ(read_u32(bytes, 76), 0u);
    const std::span<const std::uint8_t> payload(bytes.data() + 80, bytes.size() - 84);
    EXPECT_EQ(read_u32(bytes, bytes.size() - 4), crc32_bytes(payload));
}

TEST(TensorFile, PayloadIsChannelMajorLittleEndianFloat) {
    const GridDims dims{2, 3, 4};
    std::vector<float> features(dims.voxel_count() * 11);
    for (std::size_t i = 0; i < features.size(); ++i) features[i] = 0.25f * static_cast<float>(i);
    const VoxelGrid grid(dims, WorkspaceBounds{}, 1, features);
    const auto bytes = serialize_grid(grid);
    // Channel 3, voxel (1, 2, 3) sits at 3 * 24 + (1 * 3 + 2) * 4 + 3.
    const std::size_t index = 3 * 24 + (1 * 3 + 2) * 4 + 3;
    const std::uint32_t bits = read_u32(bytes, 80 + 4 * index);
    float value;
    std::memcpy(&value, &bits, 4);
    EXPECT_EQ(value, 0.25f * static_cast<float>(index));
    EXPECT_EQ(grid.feature(3, {1, 2, 3}), value);
}

TEST(TensorFile, KnownCrcValue) {
    const std::string text = "123456789";
    EXPECT_EQ(crc32_bytes(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size())), 0xCBF43926u);
}

TEST(TensorFile, RoundTripIsBitwise) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> side(1, 12), heads(0, 6);
    for (int trial = 0; trial < 30; ++trial) {
        const GridDims dims{side(rng), side(rng), side(rng)};
        const VoxelGrid grid = random_grid(static_cast<std::uint64_t>(trial), heads(rng), dims);
        const VoxelGrid back = deserialize_grid(serialize_grid(grid));
        EXPECT_EQ(back.dims().nx, dims.nx);
        EXPECT_EQ(back.dims().nz, dims.nz);
        EXPECT_EQ(back.bounds(), grid.bounds());
        EXPECT_EQ(back.saliency_channels(), grid.saliency_channels());
        EXPECT_TRUE(bitwise_equal(back.features(), grid.features()));
        EXPECT_EQ(payload_checksum(back), payload_checksum(grid));
    }
}

TEST(TensorFile, EverySinglePayloadBitFlipIsAnIntegrityError) {
    const VoxelGrid grid = random_grid(2, 1, GridDims{3, 3, 3});
    const auto bytes = serialize_grid(grid);
    for (std::size_t byte = 80; byte < bytes.size() - 4; ++byte) {
        for (int bit = 0; bit < 8; ++bit) {
            auto corrupt = bytes;
            corrupt[byte] ^= static_cast<std::uint8_t>(1u << bit);
            ASSERT_EQ(error_code_of([&] { deserialize_grid(corrupt); }), ErrorCode::kIntegrity) << byte << ":" << bit;
        }
    }
}

TEST(TensorFile, CorruptFooterIsAnIntegrityError) {
    auto bytes = serialize_grid(random_grid(3, 1, GridDims{2, 2, 2}));
    bytes.back() ^= 0x10;
    EXPECT_EQ(error_code_of([&] { deserialize_grid(bytes); }), ErrorCode::kIntegrity);
}

TEST(TensorFile, HeaderProblems) {
    const auto good = serialize_grid(random_grid(4, 2, GridDims{2, 3, 2}));
    auto bad_magic = good;
    bad_magic[0] = 'W';
    EXPECT_EQ(error_code_of([&] { deserialize_grid(bad_magic); }), ErrorCode::kFormat);
    auto bad_version = good;
    bad_version[4] = 2;
    EXPECT_EQ(error_code_of([&] { deserialize_grid(bad_version); }), ErrorCode::kVersion);
    auto bad_channels = good;
    bad_channels[20] = 11;  // K is 2, so 12 is expected
    EXPECT_EQ(error_code_of([&] { deserialize_grid(bad_channels); }), ErrorCode::kFormat);
    auto bad_dims = good;
    bad_dims[8] = 0;
    EXPECT_EQ(error_code_of([&] { deserialize_grid(bad_dims); }), ErrorCode::kFormat);
    const std::vector<std::uint8_t> truncated(good.begin(), good.end() - 9);
    EXPECT_EQ(error_code_of([&] { deserialize_grid(truncated); }), ErrorCode::kFormat);
    const std::vector<std::uint8_t> tiny(good.begin(), good.begin() + 40);
    EXPECT_EQ(error_code_of([&] { deserialize_grid(tiny); }), ErrorCode::kFormat);
}

TEST(TensorFile, SaveAndLoad) {
    TempDir dir;
    const VoxelGrid grid = random_grid(5, 1, GridDims{5, 5, 5});
    const auto path = dir / "nested" / "a.vxft";
    save_grid(path, grid);
    const VoxelGrid back = load_grid(path);
    EXPECT_TRUE(bitwise_equal(back.features(), grid.features()));
    // No temporary files left behind.
    std::size_t files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(path.parent_path())) files += entry.is_regular_file();
    EXPECT_EQ(files, 1u);
    EXPECT_EQ(read_file_bytes(path), serialize_grid(grid));
}

TEST(TensorFile, OverwriteReplacesContents) {
    TempDir dir;
    const auto path = dir / "a.vxft";
    save_grid(path, random_grid(6, 0, GridDims{2, 2, 2}));
    const VoxelGrid second = random_grid(7, 3, GridDims{3, 2, 2});
    save_grid(path, second);
    EXPECT_EQ(load_grid(path).saliency_channels(), 3);
}

TEST(TensorFile, MissingFile) {
    TempDir dir;
    EXPECT_EQ(error_code_of([&] { load_grid(dir / "nope.vxft"); }), ErrorCode::kMissingFile);
}
