#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "voxelfeat/saliency.hpp"
#include "voxelfeat/trajectory.hpp"
#include "voxelfeat/voxelizer.hpp"

namespace voxelfeat {

inline constexpr int kManifestVersion = 1;

/// A demonstration episode on disk, described by a versioned JSON document.
/// File references are relative to the manifest's directory. Camera poses
/// live in plain-text files, one camera-to-world pose per frame:
/// "r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz", '#' starts a comment.
struct EpisodeManifest {
    int version = kManifestVersion;
    std::filesystem::path base_dir;
    WorkspaceBounds bounds;
    GridDims dims;
    SaliencyConfig saliency;
    double depth_scale = 1e-3;  // meters per 16-bit depth unit
    int acting_arm = 0;         // kLeftArmId or kRightArmId
    DemonstrationEpisode episode;

    std::filesystem::path resolve(const std::string& relative) const { return base_dir / relative; }
};

/// Parses and fully validates a manifest: every referenced file must exist
/// and match its camera's declared image size.
/// Errors: Error(kMissingFile) for the manifest or any referenced file,
/// Error(kVersion) for an unsupported version, Error(kDimensionMismatch)
/// naming the frame and camera when an image has the wrong size,
/// Error(kFormat) naming the field for malformed or missing fields.
EpisodeManifest load_manifest(const std::filesystem::path& path);

/// Serializes a manifest; pose files are written next to it.
void save_manifest(const std::filesystem::path& path, const EpisodeManifest& manifest);

}  // namespace voxelfeat
