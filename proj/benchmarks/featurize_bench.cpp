#include <benchmark/benchmark.h>

#include "voxelfeat/bench.hpp"
#include "voxelfeat/saliency.hpp"
#include "voxelfeat/synth.hpp"
#include "voxelfeat/voxelizer.hpp"

using namespace voxelfeat;

namespace {

void BM_Voxelize(benchmark::State& state) {
    const auto points = static_cast<std::size_t>(state.range(0));
    const int threads = static_cast<int>(state.range(1));
    const WorkspaceBounds bounds;
    const GridDims dims;
    const FeaturedPointCloud cloud = random_cloud(points, 1, bounds, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(voxelize(cloud, bounds, dims, 1, VoxelizeOptions{threads}));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(points));
}
BENCHMARK(BM_Voxelize)
    ->ArgsProduct({{10'000, 49'152, 98'304, 196'608}, {1, 2, 8}})
    ->Unit(benchmark::kMillisecond);

void BM_FeaturizeFrame(benchmark::State& state) {
    const int heads = static_cast<int>(state.range(0));
    const FrameFixture frame = make_frame_fixture(128, 128, 74, heads, 3);
    for (auto _ : state) benchmark::DoNotOptimize(featurize_frame(frame, 1));
    state.SetItemsProcessed(state.iterations() * 3 * 128 * 128);
}
BENCHMARK(BM_FeaturizeFrame)->Arg(0)->Arg(1)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_UpsampleAttention(benchmark::State& state) {
    SaliencyMap patch(74, 74, 1);
    for (std::size_t i = 0; i < patch.data.size(); ++i) patch.data[i] = static_cast<double>(i % 97) / 97.0;
    for (auto _ : state) benchmark::DoNotOptimize(upsample_bilinear(patch, 128, 128));
}
BENCHMARK(BM_UpsampleAttention);

}  // namespace

BENCHMARK_MAIN();
