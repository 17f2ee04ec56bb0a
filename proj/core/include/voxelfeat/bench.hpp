#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "voxelfeat/geometry.hpp"
#include "voxelfeat/saliency.hpp"
#include "voxelfeat/voxelizer.hpp"

namespace voxelfeat {

/// In-memory inputs of one multi-camera frame: rendered rgb and depth plus
/// patch-resolution attention maps, ready for featurization.
struct FrameFixture {
    std::vector<CameraIntrinsics> intrinsics;
    std::vector<RigidTransform> poses;
    std::vector<RgbImage> rgb;
    std::vector<DepthImage> depth;
    std::vector<SaliencyMap> attention;  // patch x patch x heads
    SaliencyConfig saliency;
    WorkspaceBounds bounds;
    GridDims dims;
};

/// Three-camera tabletop frame rendered from the synthetic scene.
FrameFixture make_frame_fixture(int width, int height, int patch_size, int heads, std::uint64_t seed);

/// Attention post-processing, fusion and voxelization of one fixture frame.
/// This is the per-frame featurization path minus file decoding.
VoxelizeResult featurize_frame(const FrameFixture& frame, int threads = 1);

struct BenchReport {
    std::string scenario;
    std::size_t points = 0;
    int threads = 1;
    int repeats = 0;
    double best_seconds = 0.0;
    double mean_seconds = 0.0;
    double points_per_second = 0.0;  // from the best repeat
    std::uint32_t checksum = 0;      // CRC32 of the output features
};

BenchReport bench_voxelize(std::size_t points, const GridDims& dims, int saliency_channels, int threads,
                           int repeats, std::uint64_t seed);

BenchReport bench_frame(const FrameFixture& frame, int threads, int repeats);

/// Tab-separated columns: scenario, points, threads, repeats, best_ms,
/// mean_ms, points_per_sec, crc32.
std::string bench_tsv_header();
std::string bench_tsv_row(const BenchReport& report);

}  // namespace voxelfeat
