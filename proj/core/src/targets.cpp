#include "voxelfeat/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "voxelfeat/errors.hpp"

namespace voxelfeat {

std::string_view to_string(ArmRole role) { return role == ArmRole::kActing ? "acting" : "stabilizing"; }

double CategoricalTable::column_sum(std::size_t column) const {
    double s = 0.0;
    for (std::size_t b = 0; b < bins; ++b) s += at(b, column);
    return s;
}

std::size_t CategoricalTable::argmax(std::size_t column) const {
    std::size_t best = 0;
    for (std::size_t b = 1; b < bins; ++b) {
        if (at(b, column) > at(best, column)) best = b;
    }
    return best;
}

const CategoricalTable& ChannelTables::operator[](LossChannel c) const {
    switch (c) {
        case LossChannel::kTranslation: return translation;
        case LossChannel::kRotation: return rotation;
        case LossChannel::kGripperOpen: return gripper_open;
        case LossChannel::kCollision: return collision;
        case LossChannel::kArmId: return arm_id;
    }
    return arm_id;
}

std::vector<double> softmax(std::span<const double> scores) {
    if (scores.empty()) return {};
    for (double s : scores) {
        if (!std::isfinite(s)) raise(ErrorCode::kNumeric, "softmax input is not finite");
    }
    const double peak = *std::max_element(scores.begin(), scores.end());
    std::vector<double> out(scores.size());
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - peak);
        total += out[i];
    }
    for (double& v : out) v /= total;
    return out;
}

CategoricalTable encode_translation(const Eigen::Vector3d& position, const WorkspaceBounds& bounds,
                                    const GridDims& dims) {
    bounds.validate();
    dims.validate();
    const auto idx = point_to_index(position, bounds, dims);
    if (!idx) {
        raise(ErrorCode::kEncoding, "translation target lies outside the workspace");
    }
    CategoricalTable table(dims.voxel_count(), 1);
    table.at(flat_index(*idx, dims)) = 1.0;
    return table;
}

int rotation_bin_count(double resolution_deg) {
    if (!(resolution_deg > 0.0) || !std::isfinite(resolution_deg)) {
        raise(ErrorCode::kParameter, "rotation resolution must be positive");
    }
    const double bins = 360.0 / resolution_deg;
    const double rounded = std::round(bins);
    if (rounded < 1.0 || std::abs(rounded * resolution_deg - 360.0) > 1e-9) {
        raise(ErrorCode::kParameter, "rotation resolution " + std::to_string(resolution_deg) + " does not divide 360");
    }
    return static_cast<int>(rounded);
}

int rotation_bin(double angle_deg, double resolution_deg) {
    const int bins = rotation_bin_count(resolution_deg);
    if (!std::isfinite(angle_deg)) raise(ErrorCode::kEncoding, "rotation angle is not finite");
    double a = std::fmod(angle_deg, 360.0);
    if (a < 0.0) a += 360.0;
    const int bin = static_cast<int>(std::floor(a / resolution_deg));
    return ((bin % bins) + bins) % bins;
}

CategoricalTable encode_rotation(const std::array<double, 3>& angles_deg, double resolution_deg) {
    const int bins = rotation_bin_count(resolution_deg);
    CategoricalTable table(static_cast<std::size_t>(bins), 3);
    for (std::size_t axis = 0; axis < 3; ++axis) {
        table.at(static_cast<std::size_t>(rotation_bin(angles_deg[axis], resolution_deg)), axis) = 1.0;
    }
    return table;
}

CategoricalTable encode_binary(int flag) {
    if (flag != 0 && flag != 1) raise(ErrorCode::kParameter, "binary flag must be 0 or 1");
    CategoricalTable table(2, 1);
    table.at(static_cast<std::size_t>(flag)) = 1.0;
    return table;
}

namespace {

double wrap_degrees(double deg) {
    double a = std::fmod(deg, 360.0);
    if (a < 0.0) a += 360.0;
    if (a >= 360.0) a = 0.0;
    return a + 0.0;  // drop the sign of -0
}

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

void check_distribution(const CategoricalTable& table) {
    for (double v : table.values) {
        if (!(v >= 0.0) || !std::isfinite(v)) raise(ErrorCode::kParameter, "distribution has a negative or non-finite entry");
    }
    for (std::size_t c = 0; c < table.columns; ++c) {
        if (std::abs(table.column_sum(c) - 1.0) > 1e-6) {
            raise(ErrorCode::kParameter, "distribution column " + std::to_string(c) + " does not sum to 1");
        }
    }
}

void check_same_shape(const CategoricalTable& a, const CategoricalTable& b) {
    if (a.bins != b.bins || a.columns != b.columns || a.values.size() != b.values.size() ||
        a.values.size() != a.bins * a.columns) {
        raise(ErrorCode::kShape, "prediction is " + std::to_string(a.bins) + "x" + std::to_string(a.columns) +
                                     ", target is " + std::to_string(b.bins) + "x" + std::to_string(b.columns));
    }
}

}  // namespace

std::array<double, 3> quaternion_to_euler_deg(const Eigen::Quaterniond& q) {
    const Eigen::Matrix3d r = q.normalized().toRotationMatrix();
    const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
    double roll = 0.0;
    double yaw = 0.0;
    if (std::abs(r(2, 0)) < 1.0 - 1e-12) {
        roll = std::atan2(r(2, 1), r(2, 2));
        yaw = std::atan2(r(1, 0), r(0, 0));
    } else {
        // Gimbal lock: fold all of the remaining rotation into yaw.
        yaw = std::atan2(-r(0, 1), r(1, 1));
    }
    return {wrap_degrees(roll * kRadToDeg), wrap_degrees(pitch * kRadToDeg), wrap_degrees(yaw * kRadToDeg)};
}

Eigen::Quaterniond euler_deg_to_quaternion(const std::array<double, 3>& angles_deg) {
    const double deg_to_rad = std::numbers::pi / 180.0;
    return Eigen::Quaterniond(Eigen::AngleAxisd(angles_deg[2] * deg_to_rad, Eigen::Vector3d::UnitZ()) *
                              Eigen::AngleAxisd(angles_deg[1] * deg_to_rad, Eigen::Vector3d::UnitY()) *
                              Eigen::AngleAxisd(angles_deg[0] * deg_to_rad, Eigen::Vector3d::UnitX()));
}

double channel_loss(const CategoricalTable& predicted, const CategoricalTable& target) {
    check_same_shape(predicted, target);
    check_distribution(predicted);
    double loss = 0.0;
    for (std::size_t i = 0; i < target.values.size(); ++i) {
        const double y = target.values[i];
        if (y < 0.0) raise(ErrorCode::kParameter, "target has a negative entry");
        if (y != 0.0) loss -= y * std::log(predicted.values[i] + kLogFloor);
    }
    return std::max(loss, 0.0);
}

std::vector<double> channel_loss_gradient(const CategoricalTable& predicted, const CategoricalTable& target) {
    check_same_shape(predicted, target);
    std::vector<double> grad(predicted.values.size());
    for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] = -target.values[i] / (predicted.values[i] + kLogFloor);
    }
    return grad;
}

std::array<double, kLossChannels> arm_losses(const PredictionDistributions& predicted, const OneHotTargets& target) {
    std::array<double, kLossChannels> out{};
    for (std::size_t c = 0; c < kLossChannels; ++c) {
        const auto ch = static_cast<LossChannel>(c);
        out[c] = channel_loss(predicted[ch], target[ch]);
    }
    return out;
}

double total_loss(std::span<const double> acting, std::span<const double> stabilizing) {
    if (acting.size() != kLossChannels || stabilizing.size() != kLossChannels) {
        raise(ErrorCode::kParameter, "total loss needs exactly 5 channel losses per arm");
    }
    double acting_sum = 0.0;
    for (double v : acting) acting_sum += v;
    double stabilizing_sum = 0.0;
    for (double v : stabilizing) stabilizing_sum += v;
    return acting_sum + stabilizing_sum;
}

ActionTarget discretize_action(const ArmActionPose& pose, const WorkspaceBounds& bounds, const GridDims& dims,
                               double rotation_resolution_deg) {
    bounds.validate();
    dims.validate();
    const auto idx = point_to_index(pose.position, bounds, dims);
    if (!idx) raise(ErrorCode::kEncoding, "translation target lies outside the workspace");
    const auto angles = quaternion_to_euler_deg(pose.orientation);
    ActionTarget target;
    target.role = pose.role;
    target.translation = *idx;
    for (std::size_t a = 0; a < 3; ++a) target.rotation_bins[a] = rotation_bin(angles[a], rotation_resolution_deg);
    target.gripper_open = pose.gripper_open ? 1 : 0;
    target.collision = pose.collision ? 1 : 0;
    if (pose.arm_id != kLeftArmId && pose.arm_id != kRightArmId) raise(ErrorCode::kParameter, "arm id must be 0 or 1");
    target.arm_id = pose.arm_id;
    return target;
}

OneHotTargets encode_targets(const ActionTarget& target, const GridDims& dims, double rotation_resolution_deg) {
    dims.validate();
    const int bins = rotation_bin_count(rotation_resolution_deg);
    if (target.translation.i < 0 || target.translation.i >= dims.nx || target.translation.j < 0 ||
        target.translation.j >= dims.ny || target.translation.k < 0 || target.translation.k >= dims.nz) {
        raise(ErrorCode::kEncoding, "translation index outside the grid");
    }
    OneHotTargets out;
    out.translation = CategoricalTable(dims.voxel_count(), 1);
    out.translation.at(flat_index(target.translation, dims)) = 1.0;
    out.rotation = CategoricalTable(static_cast<std::size_t>(bins), 3);
    for (std::size_t a = 0; a < 3; ++a) {
        const int b = target.rotation_bins[a];
        if (b < 0 || b >= bins) raise(ErrorCode::kEncoding, "rotation bin outside [0, 360/R)");
        out.rotation.at(static_cast<std::size_t>(b), a) = 1.0;
    }
    out.gripper_open = encode_binary(target.gripper_open);
    out.collision = encode_binary(target.collision);
    out.arm_id = encode_binary(target.arm_id);
    return out;
}

void PerturbationLimits::validate() const {
    if (!max_translation.allFinite() || (max_translation.array() < 0.0).any()) {
        raise(ErrorCode::kParameter, "translation limits must be non-negative");
    }
    if (!max_rotation_deg.allFinite() || (max_rotation_deg.array() < 0.0).any()) {
        raise(ErrorCode::kParameter, "rotation limits must be non-negative");
    }
    if (max_attempts < 1) raise(ErrorCode::kParameter, "max_attempts must be at least 1");
}

RigidTransform sample_perturbation(std::mt19937_64& rng, const PerturbationLimits& limits,
                                   const Eigen::Vector3d& rotation_center) {
    auto draw = [&rng](double limit) {
        if (limit == 0.0) return 0.0;
        std::uniform_real_distribution<double> dist(-limit, limit);
        return dist(rng);
    };
    std::array<double, 3> angles{};
    for (int a = 0; a < 3; ++a) angles[static_cast<std::size_t>(a)] = draw(limits.max_rotation_deg[a]);
    Eigen::Vector3d offset;
    for (int a = 0; a < 3; ++a) offset[a] = draw(limits.max_translation[a]);

    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    if (angles[0] != 0.0 || angles[1] != 0.0 || angles[2] != 0.0) {
        rotation = euler_deg_to_quaternion(angles).toRotationMatrix();
    }
    // Rotate about the center, then shift: p -> R (p - c) + c + offset.
    const Eigen::Vector3d translation = (rotation_center + offset) - rotation * rotation_center;
    return {rotation, translation};
}

PerturbationResult apply_perturbation(const FeaturedPointCloud& cloud, std::span<const ArmActionPose> poses,
                                      const RigidTransform& transform, const WorkspaceBounds& bounds,
                                      const GridDims& dims, double rotation_resolution_deg) {
    transform.validate();
    PerturbationResult result;
    result.transform = transform;

    result.cloud = cloud;
    auto positions = result.cloud.mutable_positions();
    const Eigen::Matrix3d& r = transform.rotation();
    const Eigen::Vector3d& t = transform.translation();
    for (std::size_t p = 0; p < cloud.size(); ++p) {
        const Eigen::Vector3d moved = r * cloud.position(p) + t;
        positions[3 * p] = moved.x();
        positions[3 * p + 1] = moved.y();
        positions[3 * p + 2] = moved.z();
    }

    const Eigen::Quaterniond q_rot(r);
    for (const auto& pose : poses) {
        ArmActionPose moved = pose;
        moved.position = transform.apply(pose.position);
        moved.orientation = q_rot * pose.orientation;
        result.targets.push_back(discretize_action(moved, bounds, dims, rotation_resolution_deg));
        result.poses.push_back(moved);
    }
    return result;
}

PerturbationResult se3_perturb(const FeaturedPointCloud& cloud, std::span<const ArmActionPose> poses,
                               std::uint64_t seed, const PerturbationLimits& limits, const WorkspaceBounds& bounds,
                               const GridDims& dims, double rotation_resolution_deg) {
    limits.validate();
    bounds.validate();
    std::mt19937_64 rng(seed);
    for (int attempt = 1; attempt <= limits.max_attempts; ++attempt) {
        const RigidTransform transform = sample_perturbation(rng, limits, bounds.center());
        const bool inside = std::all_of(poses.begin(), poses.end(), [&](const ArmActionPose& pose) {
            return point_to_index(transform.apply(pose.position), bounds, dims).has_value();
        });
        if (!inside) continue;
        PerturbationResult result =
            apply_perturbation(cloud, poses, transform, bounds, dims, rotation_resolution_deg);
        result.attempts = attempt;
        return result;
    }
    raise(ErrorCode::kAugmentation, "no perturbation within " + std::to_string(limits.max_attempts) +
                                        " draws kept every target inside the workspace");
}

}  // namespace voxelfeat
