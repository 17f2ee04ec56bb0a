#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace voxelfeat {

/// Pinhole intrinsics in pixels. Camera frame is +Z forward, +X right,
/// +Y down. Pixel (u, v) samples the continuous image coordinate (u, v)
/// with no half-pixel offset.
struct CameraIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;

    /// Throws Error(kParameter) when focal lengths or principal point are out of range.
    void validate() const;

    /// Same camera at a different image resolution (scales focal lengths and principal point).
    CameraIntrinsics rescaled(int new_width, int new_height) const;
};

/// Rigid body transform p -> R p + t. Construction does not validate;
/// operations that consume a transform call validate().
class RigidTransform {
public:
    RigidTransform() = default;
    RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
        : rotation_(rotation), translation_(translation) {}

    static RigidTransform identity() { return {}; }
    static RigidTransform from_quaternion(const Eigen::Quaterniond& q, const Eigen::Vector3d& t);

    const Eigen::Matrix3d& rotation() const { return rotation_; }
    const Eigen::Vector3d& translation() const { return translation_; }

    /// True when R^T R = I and det R = +1 within `tolerance` per entry.
    bool is_rigid(double tolerance = 1e-9) const;
    /// Throws Error(kInvalidTransform) unless is_rigid().
    void validate() const;

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation_ * p + translation_; }
    RigidTransform inverse() const;
    RigidTransform operator*(const RigidTransform& rhs) const;

private:
    Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

/// Camera-to-world pose of a camera at `eye` looking at `target`. `up` is
/// the world direction that should appear upward in the image.
RigidTransform look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                       const Eigen::Vector3d& up);

/// Dense row-major raster of doubles with interleaved channels.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, int c, double fill = 0.0);

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    }
    double& at(int row, int col, int ch = 0) {
        return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
    }
    double at(int row, int col, int ch = 0) const {
        return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
    }
    bool same_extent(const Image& other) const {
        return height == other.height && width == other.width;
    }
};

/// RGB image with values in [0, 1].
using RgbImage = Image;

/// Depth in meters along the camera Z axis, with a per-pixel validity mask.
struct DepthImage {
    int height = 0;
    int width = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> valid;

    DepthImage() = default;
    DepthImage(int h, int w);

    /// Builds an image whose validity mask marks every finite, positive value.
    static DepthImage from_values(int h, int w, std::vector<double> values);

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    }
    double at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
    bool is_valid(int row, int col) const { return valid[static_cast<std::size_t>(row) * width + col] != 0; }
    void set(int row, int col, double depth);
    void invalidate(int row, int col);
};

/// World-frame points each carrying RGB and `saliency_channels` saliency
/// values. Storage is structure-of-arrays, point-major within each array.
class FeaturedPointCloud {
public:
    FeaturedPointCloud() = default;
    explicit FeaturedPointCloud(int saliency_channels) : saliency_channels_(saliency_channels) {}

    int saliency_channels() const { return saliency_channels_; }
    std::size_t size() const { return positions_.size() / 3; }
    bool empty() const { return positions_.empty(); }

    void reserve(std::size_t n);
    void resize(std::size_t n);
    /// Appends one point. `saliency` must hold saliency_channels() values.
    void push_back(const Eigen::Vector3d& position, const Eigen::Vector3d& color,
                   std::span<const double> saliency);

    Eigen::Vector3d position(std::size_t i) const {
        return {positions_[3 * i], positions_[3 * i + 1], positions_[3 * i + 2]};
    }
    Eigen::Vector3d color(std::size_t i) const {
        return {colors_[3 * i], colors_[3 * i + 1], colors_[3 * i + 2]};
    }
    std::span<const double> saliency(std::size_t i) const {
        return {saliency_.data() + i * saliency_channels_, static_cast<std::size_t>(saliency_channels_)};
    }

    std::span<const double> positions() const { return positions_; }
    std::span<const double> colors() const { return colors_; }
    std::span<const double> saliency_values() const { return saliency_; }
    std::span<double> mutable_positions() { return positions_; }
    std::span<double> mutable_colors() { return colors_; }
    std::span<double> mutable_saliency_values() { return saliency_; }

    /// Reordered copy: point i of the result is point order[i] of this cloud.
    FeaturedPointCloud permuted(std::span<const std::size_t> order) const;

    friend bool operator==(const FeaturedPointCloud&, const FeaturedPointCloud&) = default;

private:
    int saliency_channels_ = 0;
    std::vector<double> positions_;
    std::vector<double> colors_;
    std::vector<double> saliency_;
};

/// Lifts pixel (u, v) with depth `depth` into the camera frame:
/// ((u - cx) d / fx, (v - cy) d / fy, d).
/// Throws Error(kInvalidDepth) for non-positive or non-finite depth and
/// Error(kParameter) for a pixel outside [0, width) x [0, height).
Eigen::Vector3d backproject_pixel(double u, double v, double depth, const CameraIntrinsics& intr);

/// Applies `pose` to every point. Throws Error(kInvalidTransform) when the
/// rotation is not orthonormal with determinant +1.
std::vector<Eigen::Vector3d> transform_points(std::span<const Eigen::Vector3d> points,
                                              const RigidTransform& pose);

/// One camera's synchronized observation. `saliency` may have zero
/// channels; otherwise it must match the rgb/depth extent.
struct CameraView {
    const RgbImage& rgb;
    const DepthImage& depth;
    const Image& saliency;
    CameraIntrinsics intrinsics;
    RigidTransform pose;  // camera-to-world
};

struct FuseOptions {
    double max_depth = 10.0;  // meters; farther pixels are skipped like holes
    int threads = 1;
};

/// Back-projects every valid depth pixel of every view into one world-frame
/// cloud. Points are ordered by view, then row-major by pixel. Invalid,
/// non-finite and out-of-range depth pixels are skipped.
/// Throws Error(kShape) when rgb/depth/saliency extents disagree or views
/// carry different saliency channel counts.
FeaturedPointCloud fuse_views(std::span<const CameraView> views, const FuseOptions& options = {});

}  // namespace voxelfeat
