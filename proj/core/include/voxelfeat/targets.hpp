#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "voxelfeat/geometry.hpp"
#include "voxelfeat/voxelizer.hpp"

namespace voxelfeat {

enum class ArmRole { kActing, kStabilizing };

std::string_view to_string(ArmRole role);

/// Identifier of the physical arm carried in the arm-id channel.
inline constexpr int kLeftArmId = 0;
inline constexpr int kRightArmId = 1;

/// Continuous supervision pose of one arm at a keyframe.
struct ArmActionPose {
    ArmRole role = ArmRole::kActing;
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
    bool gripper_open = true;
    bool collision = false;
    int arm_id = kLeftArmId;
};

/// Discretized supervision for one arm.
struct ActionTarget {
    ArmRole role = ArmRole::kActing;
    VoxelIndex translation;
    std::array<int, 3> rotation_bins{};  // (x, y, z) Euler angle bins
    int gripper_open = 0;
    int collision = 0;
    int arm_id = 0;

    friend bool operator==(const ActionTarget&, const ActionTarget&) = default;
};

/// A stack of categorical columns: `bins` rows by `columns` columns,
/// row-major. Each column is one distribution or one-hot vector.
struct CategoricalTable {
    std::size_t bins = 0;
    std::size_t columns = 1;
    std::vector<double> values;

    CategoricalTable() = default;
    CategoricalTable(std::size_t bins, std::size_t columns, double fill = 0.0)
        : bins(bins), columns(columns), values(bins * columns, fill) {}

    double& at(std::size_t bin, std::size_t column = 0) { return values[bin * columns + column]; }
    double at(std::size_t bin, std::size_t column = 0) const { return values[bin * columns + column]; }
    double column_sum(std::size_t column) const;
    /// Index of the largest entry in `column` (first one on ties).
    std::size_t argmax(std::size_t column = 0) const;

    friend bool operator==(const CategoricalTable&, const CategoricalTable&) = default;
};

/// Loss channels in fixed order.
enum class LossChannel : int { kTranslation = 0, kRotation, kGripperOpen, kCollision, kArmId };
inline constexpr std::size_t kLossChannels = 5;

/// One-hot targets (or predicted distributions) for the five channels of one arm.
struct ChannelTables {
    CategoricalTable translation;  // voxel_count x 1
    CategoricalTable rotation;     // (360 / R) x 3
    CategoricalTable gripper_open; // 2 x 1
    CategoricalTable collision;    // 2 x 1
    CategoricalTable arm_id;       // 2 x 1

    const CategoricalTable& operator[](LossChannel c) const;
};

using OneHotTargets = ChannelTables;
using PredictionDistributions = ChannelTables;

/// Numerically stable softmax (max subtraction).
/// Throws Error(kNumeric) on non-finite input.
std::vector<double> softmax(std::span<const double> scores);

/// One-hot over the grid at point_to_index(position).
/// Throws Error(kEncoding) when the position is outside the workspace.
CategoricalTable encode_translation(const Eigen::Vector3d& position, const WorkspaceBounds& bounds,
                                    const GridDims& dims);

/// Number of rotation bins per axis for bin width `resolution_deg`.
/// Throws Error(kParameter) unless the width is positive and divides 360.
int rotation_bin_count(double resolution_deg);

/// Bin of one angle after normalizing it into [0, 360).
int rotation_bin(double angle_deg, double resolution_deg);

/// (360 / R) x 3 table, column a one-hot at the bin of angles_deg[a].
CategoricalTable encode_rotation(const std::array<double, 3>& angles_deg, double resolution_deg);

/// (1, 0) for 0 and (0, 1) for 1. Throws Error(kParameter) for other values.
CategoricalTable encode_binary(int flag);

/// Euler angles in degrees, each in [0, 360), for the intrinsic Z-Y-X
/// convention q = Rz(angles[2]) * Ry(angles[1]) * Rx(angles[0]).
std::array<double, 3> quaternion_to_euler_deg(const Eigen::Quaterniond& q);
Eigen::Quaterniond euler_deg_to_quaternion(const std::array<double, 3>& angles_deg);

inline constexpr double kLogFloor = 1e-12;

/// Cross-entropy -sum(Y log(V + 1e-12)) summed over every column (so the
/// rotation loss is the sum over the three axes), floored at 0.
/// Throws Error(kShape) when shapes differ and Error(kParameter) when
/// `predicted` is not a distribution per column (within 1e-6) or `target`
/// has negative entries.
double channel_loss(const CategoricalTable& predicted, const CategoricalTable& target);

/// Analytic gradient -Y / (V + 1e-12) of channel_loss with respect to V.
std::vector<double> channel_loss_gradient(const CategoricalTable& predicted, const CategoricalTable& target);

/// Five channel losses of one arm, in LossChannel order.
std::array<double, kLossChannels> arm_losses(const PredictionDistributions& predicted, const OneHotTargets& target);

/// Sum of the acting-arm losses plus the sum of the stabilizing-arm losses,
/// each summed left to right. Throws Error(kParameter) unless both spans
/// hold exactly 5 values.
double total_loss(std::span<const double> acting, std::span<const double> stabilizing);

/// Discretizes a continuous pose. Throws Error(kEncoding) when the position
/// lies outside the workspace.
ActionTarget discretize_action(const ArmActionPose& pose, const WorkspaceBounds& bounds, const GridDims& dims,
                               double rotation_resolution_deg);

OneHotTargets encode_targets(const ActionTarget& target, const GridDims& dims, double rotation_resolution_deg);

struct PerturbationLimits {
    Eigen::Vector3d max_translation = Eigen::Vector3d::Constant(0.125);  // meters, per axis
    Eigen::Vector3d max_rotation_deg = Eigen::Vector3d(0.0, 0.0, 45.0);  // degrees about x, y, z
    int max_attempts = 10;

    void validate() const;
};

struct PerturbationResult {
    FeaturedPointCloud cloud;
    std::vector<ArmActionPose> poses;
    std::vector<ActionTarget> targets;
    RigidTransform transform;
    int attempts = 0;
};

/// Draws a rigid transform uniformly within `limits`: rotation about the
/// workspace center by Rz Ry Rx with per-axis angles in [-max, max], then a
/// translation with per-axis offsets in [-max, max]. Zero limits give the
/// identity exactly.
RigidTransform sample_perturbation(std::mt19937_64& rng, const PerturbationLimits& limits,
                                   const Eigen::Vector3d& rotation_center);

/// Applies `transform` to every cloud point and every arm pose, then
/// re-discretizes the poses. Throws Error(kEncoding) when a transformed pose
/// leaves the workspace.
PerturbationResult apply_perturbation(const FeaturedPointCloud& cloud, std::span<const ArmActionPose> poses,
                                      const RigidTransform& transform, const WorkspaceBounds& bounds,
                                      const GridDims& dims, double rotation_resolution_deg);

/// Seeded SE(3) augmentation of a cloud and its arm targets. Redraws until
/// every transformed pose stays inside the workspace, up to
/// limits.max_attempts draws. Same seed, same output bit for bit.
/// Throws Error(kAugmentation) when every draw pushes a target outside.
PerturbationResult se3_perturb(const FeaturedPointCloud& cloud, std::span<const ArmActionPose> poses,
                               std::uint64_t seed, const PerturbationLimits& limits, const WorkspaceBounds& bounds,
                               const GridDims& dims, double rotation_resolution_deg);

}  // namespace voxelfeat
