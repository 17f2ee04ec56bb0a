#include "voxelfeat/bench.hpp"

#include <chrono>
#include <iomanip>
#include <random>
#include <sstream>

#include "voxelfeat/errors.hpp"
#include "voxelfeat/synth.hpp"
#include "voxelfeat/tensor_file.hpp"

namespace voxelfeat {

namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
BenchReport time_repeats(std::string scenario, int threads, int repeats, Fn&& run) {
    if (repeats < 1) raise(ErrorCode::kParameter, "repeats must be at least 1");
    BenchReport report;
    report.scenario = std::move(scenario);
    report.threads = threads;
    report.repeats = repeats;
    double total = 0.0;
    for (int r = 0; r < repeats; ++r) {
        const auto start = Clock::now();
        VoxelizeResult result = run();
        const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
        total += seconds;
        if (r == 0 || seconds < report.best_seconds) report.best_seconds = seconds;
        if (r == 0) {
            report.points = result.stats.input_points;
            report.checksum = payload_checksum(result.grid);
        }
    }
    report.mean_seconds = total / repeats;
    report.points_per_second = report.best_seconds > 0.0 ? report.points / report.best_seconds : 0.0;
    return report;
}

}  // namespace

FrameFixture make_frame_fixture(int width, int height, int patch_size, int heads, std::uint64_t seed) {
    if (heads < 0 || heads > kMaxAttentionHeads) raise(ErrorCode::kParameter, "heads must lie in [0, 6]");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    SyntheticScene scene;
    scene.boxes.push_back({{-0.6, -0.6, 0.70}, {0.6, 0.6, 0.75}, {0.55, 0.40, 0.25}, 0.1});
    const Eigen::Vector3d object(jitter(rng), 0.1 + jitter(rng), 0.85);
    scene.spheres.push_back({object, 0.1, {0.85, 0.1, 0.1}, 0.9});
    scene.boxes.push_back({{0.25, -0.2, 0.75}, {0.4, -0.05, 0.9}, {0.1, 0.2, 0.8}, 0.7});
    // Closed room so every pixel sees a surface.
    const Eigen::Vector3d wall(0.6, 0.6, 0.6);
    scene.boxes.push_back({{-4.0, -4.0, -0.1}, {4.0, 4.0, 0.0}, wall, 0.0});
    scene.boxes.push_back({{-4.0, -4.0, 3.0}, {4.0, 4.0, 3.1}, wall, 0.0});
    scene.boxes.push_back({{-4.1, -4.0, 0.0}, {-4.0, 4.0, 3.0}, wall, 0.0});
    scene.boxes.push_back({{4.0, -4.0, 0.0}, {4.1, 4.0, 3.0}, wall, 0.0});
    scene.boxes.push_back({{-4.0, -4.1, 0.0}, {4.0, -4.0, 3.0}, wall, 0.0});
    scene.boxes.push_back({{-4.0, 4.0, 0.0}, {4.0, 4.1, 3.0}, wall, 0.0});

    FrameFixture frame;
    frame.saliency.heads = heads;
    const CameraIntrinsics intr = make_intrinsics(width, height, 60.0);
    const CameraIntrinsics patch_intr = intr.rescaled(patch_size, patch_size);
    for (const auto& pose : three_camera_rig(object, 1.6)) {
        RenderedView view = render_depth(scene, intr, pose);
        SaliencyMap maps(patch_size, patch_size, heads);
        if (heads > 0) {
            const RenderedView coarse = render_depth(scene, patch_intr, pose);
            for (int r = 0; r < patch_size; ++r) {
                for (int c = 0; c < patch_size; ++c) {
                    for (int h = 0; h < heads; ++h) maps.at(r, c, h) = coarse.saliency.at(r, c) * (1.0 - 0.12 * h);
                }
            }
        }
        frame.intrinsics.push_back(intr);
        frame.poses.push_back(pose);
        frame.rgb.push_back(std::move(view.rgb));
        frame.depth.push_back(std::move(view.depth));
        frame.attention.push_back(std::move(maps));
    }
    return frame;
}

VoxelizeResult featurize_frame(const FrameFixture& frame, int threads) {
    const std::size_t n = frame.rgb.size();
    std::vector<SaliencyMap> saliency(n);
    std::vector<CameraView> views;
    views.reserve(n);
    for (std::size_t v = 0; v < n; ++v) {
        saliency[v] = frame.saliency.heads > 0
                          ? process_attention(frame.attention[v], frame.rgb[v].height, frame.rgb[v].width, frame.saliency)
                          : SaliencyMap(frame.rgb[v].height, frame.rgb[v].width, 0);
        views.push_back({frame.rgb[v], frame.depth[v], saliency[v], frame.intrinsics[v], frame.poses[v]});
    }
    FuseOptions fuse;
    fuse.threads = threads;
    const FeaturedPointCloud cloud = fuse_views(views, fuse);
    return voxelize(cloud, frame.bounds, frame.dims, frame.saliency.heads, VoxelizeOptions{threads});
}

BenchReport bench_voxelize(std::size_t points, const GridDims& dims, int saliency_channels, int threads, int repeats,
                           std::uint64_t seed) {
    const WorkspaceBounds bounds;
    const FeaturedPointCloud cloud = random_cloud(points, saliency_channels, bounds, seed);
    return time_repeats("voxelize", threads, repeats, [&] {
        return voxelize(cloud, bounds, dims, saliency_channels, VoxelizeOptions{threads});
    });
}

BenchReport bench_frame(const FrameFixture& frame, int threads, int repeats) {
    return time_repeats("frame", threads, repeats, [&] { return featurize_frame(frame, threads); });
}

std::string bench_tsv_header() {
    return "scenario\tpoints\tthreads\trepeats\tbest_ms\tmean_ms\tpoints_per_sec\tcrc32";
}

std::string bench_tsv_row(const BenchReport& r) {
    std::ostringstream os;
    os << r.scenario << '\t' << r.points << '\t' << r.threads << '\t' << r.repeats << '\t' << std::fixed
       << std::setprecision(3) << r.best_seconds * 1e3 << '\t' << r.mean_seconds * 1e3 << '\t' << std::setprecision(0)
       << r.points_per_second << '\t' << std::hex << std::setw(8) << std::setfill('0') << r.checksum;
    return os.str();
}

}  // namespace voxelfeat
