#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "voxelfeat/manifest.hpp"
#include "voxelfeat/targets.hpp"
#include "voxelfeat/trajectory.hpp"
#include "voxelfeat/voxelizer.hpp"

namespace voxelfeat {

/// Processing options that are not part of the episode itself.
struct FeaturizeConfig {
    KeyframeOptions keyframes;
    double rotation_resolution_deg = 5.0;
    double max_depth = 10.0;
    bool augment = false;
    PerturbationLimits augmentation;
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Reads a JSON config file. Unknown keys are rejected with Error(kFormat).
/// Recognized layout (all keys optional):
///   {"keyframes": {"vel_eps", "stationary_window", "dt", "mode", "angular_eps"},
///    "rotation_resolution_deg", "max_depth",
///    "augmentation": {"enabled", "max_translation": [3], "max_rotation_deg": [3], "max_attempts"}}
FeaturizeConfig load_featurize_config(const std::filesystem::path& path);

/// Continuous acting and stabilizing poses of a frame, acting arm first.
std::vector<ArmActionPose> frame_action_poses(const EpisodeManifest& manifest, std::size_t frame);

/// Loads, post-processes and fuses every camera view of one frame.
FeaturedPointCloud frame_point_cloud(const EpisodeManifest& manifest, std::size_t frame, const FeaturizeConfig& config);

struct PairRecord {
    std::size_t observation = 0;
    std::size_t keyframe = 0;
    std::string tensor_file;  // empty when only targets were encoded
    std::vector<ArmActionPose> poses;
    std::vector<ActionTarget> targets;
    VoxelizeStats stats;
};

/// Seed of the augmentation draw for one observation frame.
std::uint64_t pair_seed(std::uint64_t seed, std::size_t observation);

/// Keyframes and the discretized targets of every (observation, keyframe)
/// pair. No images are read.
std::vector<PairRecord> encode_episode_targets(const EpisodeManifest& manifest, const FeaturizeConfig& config);

/// For every pair: fuse the observation's views, voxelize, encode the
/// target keyframe's arm poses (optionally with a seeded SE(3)
/// perturbation applied to both), and write obs_NNNNNN.vxft into
/// `output_dir`. Also writes targets.json. Output depends only on the
/// manifest, config and seed.
std::vector<PairRecord> featurize_episode(const EpisodeManifest& manifest, const FeaturizeConfig& config,
                                          const std::filesystem::path& output_dir);

/// targets.json text for a list of pairs.
std::string targets_json(const std::vector<PairRecord>& pairs, const std::vector<std::size_t>& keyframes,
                         const EpisodeManifest& manifest, const FeaturizeConfig& config);

}  // namespace voxelfeat
