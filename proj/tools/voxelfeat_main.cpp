// voxelfeat command line tool.
//
//   voxelfeat synth --output DIR [--frames N] [--heads K] [--seed S]
//   voxelfeat keyframes MANIFEST [--config CFG] [--output FILE]
//   voxelfeat encode-targets MANIFEST [--config CFG] [--output DIR]
//   voxelfeat featurize MANIFEST --output DIR [--config CFG] [--seed S] [--threads N]
//   voxelfeat inspect TENSOR [--channel C --axis x|y|z --index I --output DIR]
//   voxelfeat bench [--scenario all|voxelize|frame] [--points N] [--repeats R]
//
// Exit status: 0 on success, 1 unexpected failure, 2 usage error, and one
// distinct code per library error class (see voxelfeat::exit_code).

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>

#include "voxelfeat/bench.hpp"
#include "voxelfeat/errors.hpp"
#include "voxelfeat/featurize.hpp"
#include "voxelfeat/inspect.hpp"
#include "voxelfeat/manifest.hpp"
#include "voxelfeat/parallel.hpp"
#include "voxelfeat/synth.hpp"
#include "voxelfeat/tensor_file.hpp"

namespace fs = std::filesystem;
using namespace voxelfeat;

namespace {

struct GlobalOptions {
    std::string config;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string output;
};

FeaturizeConfig resolve_config(const GlobalOptions& g) {
    FeaturizeConfig config = g.config.empty() ? FeaturizeConfig{} : load_featurize_config(g.config);
    config.seed = g.seed;
    config.threads = resolve_thread_count(g.threads);
    return config;
}

void emit(const GlobalOptions& g, const std::string& text, const std::string& default_name) {
    if (g.output.empty()) {
        std::cout << text;
        return;
    }
    fs::path out = g.output;
    if (fs::is_directory(out) || out.filename().empty()) {
        fs::create_directories(out);
        out /= default_name;
    }
    write_text_atomic(out, text);
    std::cout << "wrote " << out.string() << "\n";
}

int run_keyframes(const GlobalOptions& g, const std::string& manifest_path) {
    const EpisodeManifest manifest = load_manifest(manifest_path);
    const FeaturizeConfig config = resolve_config(g);
    const KeyframeReport report = classify_keyframes(manifest.episode, config.keyframes);
    const auto pairs = keyframe_pairs(manifest.episode, report.keyframes);
    nlohmann::json doc = {{"frames", manifest.episode.frames.size()},
                          {"keyframes", report.keyframes},
                          {"gripper_changes", report.gripper_changes},
                          {"motion_stops", report.motion_stops},
                          {"pairs", pairs.size()}};
    emit(g, doc.dump(2) + "\n", "keyframes.json");
    return 0;
}

int run_encode_targets(const GlobalOptions& g, const std::string& manifest_path) {
    const EpisodeManifest manifest = load_manifest(manifest_path);
    const FeaturizeConfig config = resolve_config(g);
    const auto keyframes = extract_keyframes(manifest.episode, config.keyframes);
    const auto records = encode_episode_targets(manifest, config);
    emit(g, targets_json(records, keyframes, manifest, config), "targets.json");
    return 0;
}

int run_featurize(const GlobalOptions& g, const std::string& manifest_path) {
    if (g.output.empty()) raise(ErrorCode::kParameter, "featurize needs --output DIR");
    const EpisodeManifest manifest = load_manifest(manifest_path);
    const FeaturizeConfig config = resolve_config(g);
    fs::create_directories(g.output);
    const auto records = featurize_episode(manifest, config, g.output);
    std::size_t points = 0;
    for (const auto& r : records) points += r.stats.input_points;
    std::cout << "featurized " << records.size() << " pairs (" << points << " points, "
              << 10 + manifest.saliency.heads << " channels) into " << g.output << "\n";
    return 0;
}

int run_synth(const GlobalOptions& g, SynthEpisodeOptions options) {
    if (g.output.empty()) raise(ErrorCode::kParameter, "synth needs --output DIR");
    options.seed = g.seed;
    const fs::path manifest = write_synthetic_episode(g.output, options);
    std::cout << manifest.string() << "\n";
    return 0;
}

struct SliceRequest {
    std::optional<int> channel;
    std::string axis = "z";
    std::optional<int> index;
};

int run_inspect(const GlobalOptions& g, const std::string& tensor_path, const SliceRequest& slice) {
    const VoxelGrid grid = load_grid(tensor_path);
    std::cout << format_report(inspect_grid(grid));
    if (slice.channel) {
        if (g.output.empty()) raise(ErrorCode::kParameter, "slice rendering needs --output DIR");
        const SliceAxis axis = parse_slice_axis(slice.axis);
        const GridDims& d = grid.dims();
        const int extent = axis == SliceAxis::kX ? d.nx : axis == SliceAxis::kY ? d.ny : d.nz;
        const int index = slice.index.value_or(extent / 2);
        fs::create_directories(g.output);
        const fs::path png = fs::path(g.output) / ("slice_c" + std::to_string(*slice.channel) + "_" + slice.axis +
                                                   std::to_string(index) + ".png");
        render_slice(grid, *slice.channel, axis, index, png);
        std::cout << "wrote " << png.string() << "\n";
    }
    return 0;
}

struct BenchRequest {
    std::string scenario = "all";
    std::size_t points = 3 * 128 * 128;
    int grid = 50;
    int heads = 1;
    int repeats = 20;
};

int run_bench(const GlobalOptions& g, const BenchRequest& b) {
    const int threads = resolve_thread_count(g.threads);
    std::cout << bench_tsv_header() << "\n";
    if (b.scenario == "all" || b.scenario == "voxelize") {
        const GridDims dims{b.grid, b.grid, b.grid};
        std::cout << bench_tsv_row(bench_voxelize(b.points, dims, b.heads, threads, b.repeats, g.seed)) << "\n";
    }
    if (b.scenario == "all" || b.scenario == "frame") {
        FrameFixture frame = make_frame_fixture(128, 128, 74, b.heads, g.seed);
        frame.dims = GridDims{b.grid, b.grid, b.grid};
        std::cout << bench_tsv_row(bench_frame(frame, threads, b.repeats)) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Featured voxel grids and keyframe targets from multi-view RGB-D demonstrations"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config, "JSON processing config");
    app.add_option("--seed", g.seed, "Seed for augmentation, synthesis and benchmarks");
    auto* threads_opt = app.add_option("--threads", g.threads, "Worker threads, 0 for all cores (env VOXELFEAT_THREADS)")
                            ->check(CLI::NonNegativeNumber);
    app.add_option("--output", g.output, "Output directory or file");

    std::string manifest_path;
    auto* featurize = app.add_subcommand("featurize", "Write voxel tensors and targets for every keyframe pair");
    featurize->add_option("manifest", manifest_path, "Episode manifest")->required();
    auto* keyframes = app.add_subcommand("keyframes", "Report the keyframes of an episode");
    keyframes->add_option("manifest", manifest_path, "Episode manifest")->required();
    auto* encode = app.add_subcommand("encode-targets", "Write discretized targets without voxelizing");
    encode->add_option("manifest", manifest_path, "Episode manifest")->required();

    SynthEpisodeOptions synth_options;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic three-camera episode");
    synth->add_option("--frames", synth_options.frames, "Frame count")->check(CLI::Range(8, 100000));
    synth->add_option("--width", synth_options.width, "Image width")->check(CLI::PositiveNumber);
    synth->add_option("--height", synth_options.height, "Image height")->check(CLI::PositiveNumber);
    synth->add_option("--patch", synth_options.patch_size, "Attention map side length")->check(CLI::PositiveNumber);
    synth->add_option("--heads", synth_options.heads, "Attention heads")->check(CLI::Range(0, kMaxAttentionHeads));

    std::string tensor_path;
    SliceRequest slice;
    auto* inspect = app.add_subcommand("inspect", "Summarize a voxel tensor file");
    inspect->add_option("tensor", tensor_path, "Tensor file")->required();
    inspect->add_option("--channel", slice.channel, "Render a slice of this channel");
    inspect->add_option("--axis", slice.axis, "Slice axis")->check(CLI::IsMember({"x", "y", "z"}));
    inspect->add_option("--index", slice.index, "Slice index, default the middle");

    BenchRequest bench_request;
    auto* bench = app.add_subcommand("bench", "Measure featurization throughput (TSV on stdout)");
    bench->add_option("--scenario", bench_request.scenario)->check(CLI::IsMember({"all", "voxelize", "frame"}));
    bench->add_option("--points", bench_request.points, "Points for the voxelize scenario")
        ->check(CLI::PositiveNumber);
    bench->add_option("--grid", bench_request.grid, "Voxels per axis")->check(CLI::PositiveNumber);
    bench->add_option("--heads", bench_request.heads, "Saliency channels")->check(CLI::Range(0, kMaxAttentionHeads));
    bench->add_option("--repeats", bench_request.repeats, "Timed repetitions")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    // CLI11 drops environment values that fail validation, so check by hand.
    if (const char* env = std::getenv("VOXELFEAT_THREADS"); env != nullptr && threads_opt->count() == 0) {
        const std::string_view text(env);
        int value = -1;
        const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc() || end != text.data() + text.size() || value < 0) {
            std::cerr << "VOXELFEAT_THREADS must be a non-negative integer, got '" << env << "'\n";
            return 2;
        }
        g.threads = value;
    }

    try {
        if (*featurize) return run_featurize(g, manifest_path);
        if (*keyframes) return run_keyframes(g, manifest_path);
        if (*encode) return run_encode_targets(g, manifest_path);
        if (*synth) return run_synth(g, synth_options);
        if (*inspect) return run_inspect(g, tensor_path, slice);
        if (*bench) return run_bench(g, bench_request);
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
