#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "voxelfeat/geometry.hpp"

namespace voxelfeat {

/// Proprioceptive state of one arm at one frame.
struct ArmState {
    std::array<double, 7> joint_positions{};
    Eigen::Vector3d ee_position = Eigen::Vector3d::Zero();
    Eigen::Quaterniond ee_orientation = Eigen::Quaterniond::Identity();
    bool gripper_open = true;
    bool collision = false;  // supervision flag, provided with the demonstration

    /// Throws Error(kParameter) when the orientation is not unit norm within 1e-6.
    void validate() const;
};

/// File references for one camera at one frame. `saliency` may be empty.
struct ViewRef {
    std::string camera;
    std::string rgb;
    std::string depth;
    std::string saliency;
};

struct FrameObservation {
    std::int64_t timestep = 0;
    ArmState left;
    ArmState right;
    std::vector<ViewRef> views;
    std::string language_acting;
    std::string language_stabilizing;
};

/// A camera's intrinsics and its camera-to-world pose at every frame.
struct CameraTrack {
    std::string name;
    CameraIntrinsics intrinsics;
    std::vector<RigidTransform> poses;
};

struct DemonstrationEpisode {
    std::vector<FrameObservation> frames;
    std::vector<CameraTrack> cameras;

    /// Throws Error(kDegenerateInput) for fewer than 2 frames and
    /// Error(kParameter) for non-increasing timesteps, inconsistent camera
    /// sets or pose counts that differ from the frame count.
    void validate() const;
};

enum class StationaryMode {
    kBoth,    // every arm must be still
    kEither,  // any arm being still is enough
};

StationaryMode parse_stationary_mode(std::string_view text);
std::string_view to_string(StationaryMode mode);

struct KeyframeOptions {
    double vel_eps = 1e-3;       // m/s
    int stationary_window = 2;   // frames
    double dt = 0.05;            // seconds between consecutive frames
    StationaryMode mode = StationaryMode::kBoth;
    std::optional<double> angular_eps;  // rad/s; when set, rotation must also be below it

    void validate() const;
};

/// Keyframes split by cause. `keyframes` is the sorted, de-duplicated union
/// of both causes plus the final frame.
struct KeyframeReport {
    std::vector<std::size_t> gripper_changes;
    std::vector<std::size_t> motion_stops;
    std::vector<std::size_t> keyframes;
};

/// End-effector speeds of one arm by finite differences. Frame 0 uses the
/// forward difference, every later frame the backward difference.
std::vector<double> ee_speeds(const std::vector<ArmState>& track, double dt);
std::vector<double> ee_angular_speeds(const std::vector<ArmState>& track, double dt);

KeyframeReport classify_keyframes(const DemonstrationEpisode& episode, const KeyframeOptions& options = {});

/// Frame t is a keyframe when a gripper flag flips between t-1 and t, or when
/// t completes the first `stationary_window` consecutive still frames of a
/// still run. The last frame is always a keyframe.
/// Throws Error(kDegenerateInput) for episodes shorter than 2 frames.
std::vector<std::size_t> extract_keyframes(const DemonstrationEpisode& episode,
                                           const KeyframeOptions& options = {});

/// (observation frame, target keyframe) pairs: every frame before the last
/// keyframe paired with the first keyframe strictly after it.
/// Throws Error(kParameter) when keyframes are empty, unsorted, or outside
/// the episode.
std::vector<std::pair<std::size_t, std::size_t>> keyframe_pairs(const DemonstrationEpisode& episode,
                                                                 const std::vector<std::size_t>& keyframes);

}  // namespace voxelfeat
