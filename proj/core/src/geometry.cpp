#include "voxelfeat/geometry.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "voxelfeat/errors.hpp"
#include "voxelfeat/parallel.hpp"

namespace voxelfeat {

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
        raise(ErrorCode::kParameter, "focal lengths must be positive and finite");
    }
    if (width <= 0 || height <= 0) {
        raise(ErrorCode::kParameter, "image size must be positive");
    }
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
        raise(ErrorCode::kParameter, "principal point must lie inside the image");
    }
}

CameraIntrinsics CameraIntrinsics::rescaled(int new_width, int new_height) const {
    const double sx = static_cast<double>(new_width) / width;
    const double sy = static_cast<double>(new_height) / height;
    return {fx * sx, fy * sy, cx * sx, cy * sy, new_width, new_height};
}

RigidTransform RigidTransform::from_quaternion(const Eigen::Quaterniond& q, const Eigen::Vector3d& t) {
    return {q.normalized().toRotationMatrix(), t};
}

bool RigidTransform::is_rigid(double tolerance) const {
    if (!rotation_.allFinite() || !translation_.allFinite()) return false;
    const Eigen::Matrix3d gram = rotation_.transpose() * rotation_;
    if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tolerance) return false;
    return std::abs(rotation_.determinant() - 1.0) <= tolerance;
}

void RigidTransform::validate() const {
    if (!is_rigid()) {
        std::ostringstream os;
        os << "rotation is not orthonormal with determinant +1 (det = " << rotation_.determinant() << ")";
        raise(ErrorCode::kInvalidTransform, os.str());
    }
}

RigidTransform RigidTransform::inverse() const {
    const Eigen::Matrix3d rt = rotation_.transpose();
    return {rt, -(rt * translation_)};
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
    return {rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_};
}

RigidTransform look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                       const Eigen::Vector3d& up) {
    const Eigen::Vector3d forward = (target - eye).normalized();
    Eigen::Vector3d right = forward.cross(up);
    if (right.norm() < 1e-12) {
        raise(ErrorCode::kParameter, "look_at: up vector is parallel to the viewing direction");
    }
    right.normalize();
    // Image +Y points down, i.e. away from `up`.
    const Eigen::Vector3d down = forward.cross(right);
    Eigen::Matrix3d rotation;
    rotation.col(0) = right;
    rotation.col(1) = down;
    rotation.col(2) = forward;
    return {rotation, eye};
}

Image::Image(int h, int w, int c, double fill)
    : height(h), width(w), channels(c),
      data(static_cast<std::size_t>(h) * static_cast<std::size_t>(w) * static_cast<std::size_t>(c), fill) {}

DepthImage::DepthImage(int h, int w)
    : height(h), width(w),
      values(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), 0.0),
      valid(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), 0) {}

DepthImage DepthImage::from_values(int h, int w, std::vector<double> values) {
    if (values.size() != static_cast<std::size_t>(h) * static_cast<std::size_t>(w)) {
        raise(ErrorCode::kShape, "depth value count does not match image size");
    }
    DepthImage image;
    image.height = h;
    image.width = w;
    image.valid.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        image.valid[i] = (std::isfinite(values[i]) && values[i] > 0.0) ? 1 : 0;
    }
    image.values = std::move(values);
    return image;
}

void DepthImage::set(int row, int col, double depth) {
    const std::size_t idx = static_cast<std::size_t>(row) * width + col;
    values[idx] = depth;
    valid[idx] = (std::isfinite(depth) && depth > 0.0) ? 1 : 0;
}

void DepthImage::invalidate(int row, int col) {
    const std::size_t idx = static_cast<std::size_t>(row) * width + col;
    values[idx] = 0.0;
    valid[idx] = 0;
}

void FeaturedPointCloud::reserve(std::size_t n) {
    positions_.reserve(3 * n);
    colors_.reserve(3 * n);
    saliency_.reserve(static_cast<std::size_t>(saliency_channels_) * n);
}

void FeaturedPointCloud::resize(std::size_t n) {
    positions_.resize(3 * n);
    colors_.resize(3 * n);
    saliency_.resize(static_cast<std::size_t>(saliency_channels_) * n);
}

void FeaturedPointCloud::push_back(const Eigen::Vector3d& position, const Eigen::Vector3d& color,
                                   std::span<const double> saliency) {
    if (saliency.size() != static_cast<std::size_t>(saliency_channels_)) {
        raise(ErrorCode::kShape, "saliency value count does not match the cloud's channel count");
    }
    positions_.insert(positions_.end(), {position.x(), position.y(), position.z()});
    colors_.insert(colors_.end(), {color.x(), color.y(), color.z()});
    saliency_.insert(saliency_.end(), saliency.begin(), saliency.end());
}

FeaturedPointCloud FeaturedPointCloud::permuted(std::span<const std::size_t> order) const {
    FeaturedPointCloud out(saliency_channels_);
    out.resize(order.size());
    const auto k = static_cast<std::size_t>(saliency_channels_);
    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::size_t src = order[i];
        for (std::size_t a = 0; a < 3; ++a) {
            out.positions_[3 * i + a] = positions_[3 * src + a];
            out.colors_[3 * i + a] = colors_[3 * src + a];
        }
        for (std::size_t c = 0; c < k; ++c) out.saliency_[k * i + c] = saliency_[k * src + c];
    }
    return out;
}

Eigen::Vector3d backproject_pixel(double u, double v, double depth, const CameraIntrinsics& intr) {
    if (!std::isfinite(depth) || !(depth > 0.0)) {
        raise(ErrorCode::kInvalidDepth, "depth must be positive and finite");
    }
    if (!(u >= 0.0 && u < intr.width && v >= 0.0 && v < intr.height)) {
        raise(ErrorCode::kParameter, "pixel lies outside the image");
    }
    return {(u - intr.cx) * depth / intr.fx, (v - intr.cy) * depth / intr.fy, depth};
}

std::vector<Eigen::Vector3d> transform_points(std::span<const Eigen::Vector3d> points,
                                              const RigidTransform& pose) {
    pose.validate();
    std::vector<Eigen::Vector3d> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(pose.apply(p));
    return out;
}

namespace {

struct RowRef {
    std::size_t view;
    int row;
};

bool usable_depth(const DepthImage& depth, int row, int col, double max_depth) {
    if (!depth.is_valid(row, col)) return false;
    const double d = depth.at(row, col);
    return std::isfinite(d) && d > 0.0 && d <= max_depth;
}

}  // namespace

FeaturedPointCloud fuse_views(std::span<const CameraView> views, const FuseOptions& options) {
    if (views.empty()) return FeaturedPointCloud(0);

    const int k = views.front().saliency.channels;
    std::vector<RowRef> rows;
    for (std::size_t vi = 0; vi < views.size(); ++vi) {
        const CameraView& view = views[vi];
        view.intrinsics.validate();
        view.pose.validate();
        if (view.rgb.channels != 3) raise(ErrorCode::kShape, "rgb image must have 3 channels");
        if (view.depth.height != view.rgb.height || view.depth.width != view.rgb.width) {
            raise(ErrorCode::kShape, "depth and rgb extents differ in view " + std::to_string(vi));
        }
        if (view.saliency.channels != k) {
            raise(ErrorCode::kShape, "views carry different saliency channel counts");
        }
        if (k > 0 && !view.saliency.same_extent(view.rgb)) {
            raise(ErrorCode::kShape, "saliency and rgb extents differ in view " + std::to_string(vi));
        }
        if (view.intrinsics.width != view.rgb.width || view.intrinsics.height != view.rgb.height) {
            raise(ErrorCode::kShape, "intrinsics image size differs from rgb extent in view " +
                                         std::to_string(vi));
        }
        for (int r = 0; r < view.rgb.height; ++r) rows.push_back({vi, r});
    }

    // Count valid pixels per row, then fill rows at their prefix offsets so
    // the output order is independent of the thread count.
    std::vector<std::size_t> offsets(rows.size() + 1, 0);
    parallel_for(rows.size(), options.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t ri = begin; ri < end; ++ri) {
            const CameraView& view = views[rows[ri].view];
            std::size_t n = 0;
            for (int c = 0; c < view.depth.width; ++c) {
                n += usable_depth(view.depth, rows[ri].row, c, options.max_depth) ? 1 : 0;
            }
            offsets[ri + 1] = n;
        }
    });
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());

    FeaturedPointCloud cloud(k);
    cloud.resize(offsets.back());
    auto positions = cloud.mutable_positions();
    auto colors = cloud.mutable_colors();
    auto saliency = cloud.mutable_saliency_values();
    const auto kk = static_cast<std::size_t>(k);

    parallel_for(rows.size(), options.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t ri = begin; ri < end; ++ri) {
            const CameraView& view = views[rows[ri].view];
            const int r = rows[ri].row;
            const CameraIntrinsics& intr = view.intrinsics;
            const Eigen::Matrix3d& rot = view.pose.rotation();
            const Eigen::Vector3d& trans = view.pose.translation();
            const double ray_y = (r - intr.cy) / intr.fy;
            std::size_t out = offsets[ri];
            for (int c = 0; c < view.depth.width; ++c) {
                if (!usable_depth(view.depth, r, c, options.max_depth)) continue;
                const double d = view.depth.at(r, c);
                const Eigen::Vector3d cam((c - intr.cx) * d / intr.fx, ray_y * d, d);
                const Eigen::Vector3d world = rot * cam + trans;
                for (int a = 0; a < 3; ++a) {
                    positions[3 * out + a] = world[a];
                    colors[3 * out + a] = view.rgb.at(r, c, a);
                }
                for (std::size_t s = 0; s < kk; ++s) {
                    saliency[kk * out + s] = view.saliency.at(r, c, static_cast<int>(s));
                }
                ++out;
            }
        }
    });
    return cloud;
}

}  // namespace voxelfeat
