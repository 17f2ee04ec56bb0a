#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <vector>

#include "voxelfeat/geometry.hpp"
#include "voxelfeat/saliency.hpp"
#include "voxelfeat/voxelizer.hpp"

namespace voxelfeat {

struct SphereShape {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double radius = 0.1;
    Eigen::Vector3d color = Eigen::Vector3d::Constant(0.5);
    double saliency = 0.5;
};

struct BoxShape {
    Eigen::Vector3d min_corner = Eigen::Vector3d::Zero();
    Eigen::Vector3d max_corner = Eigen::Vector3d::Constant(0.1);
    Eigen::Vector3d color = Eigen::Vector3d::Constant(0.5);
    double saliency = 0.5;
};

/// Analytic test scene made of spheres and axis-aligned boxes.
struct SyntheticScene {
    std::vector<SphereShape> spheres;
    std::vector<BoxShape> boxes;

    bool empty() const { return spheres.empty() && boxes.empty(); }
    /// Throws Error(kParameter) for non-positive radii or box extents.
    void validate() const;
    /// Distance from `p` to the nearest primitive surface.
    double surface_distance(const Eigen::Vector3d& p) const;
};

struct RenderedView {
    DepthImage depth;
    RgbImage rgb;
    SaliencyMap saliency;  // one channel
};

/// Ray casts every pixel (through its exact coordinate, no half-pixel
/// offset) against the scene. Depth is the camera-frame Z of the nearest
/// hit; pixels that hit nothing are invalid and black with zero saliency.
/// Throws Error(kParameter) for an empty scene.
RenderedView render_depth(const SyntheticScene& scene, const CameraIntrinsics& intr, const RigidTransform& pose);

/// Front camera plus two cameras offset to the left and right, all aimed at
/// `target` from about `distance` meters away.
std::vector<RigidTransform> three_camera_rig(const Eigen::Vector3d& target, double distance);

/// Symmetric intrinsics with a horizontal field of view of `fov_deg`.
CameraIntrinsics make_intrinsics(int width, int height, double fov_deg);

/// Seeded cloud of `count` points uniform in `bounds` with uniform features.
FeaturedPointCloud random_cloud(std::size_t count, int saliency_channels, const WorkspaceBounds& bounds,
                                std::uint64_t seed);

/// Reference voxelizer: one point at a time, in input order, into dense
/// double accumulators, with its own binning arithmetic. Test oracle only.
VoxelGrid brute_force_voxelize(const FeaturedPointCloud& cloud, const WorkspaceBounds& bounds, const GridDims& dims,
                               int saliency_channels);

struct SynthEpisodeOptions {
    int frames = 24;
    int width = 128;
    int height = 128;
    int patch_size = 74;  // attention map side length
    int heads = 1;        // attention maps per file and configured head count
    double depth_scale = 1e-4;
    std::uint64_t seed = 0;
};

/// Writes a complete three-camera bimanual episode (manifest.json, PNGs,
/// attention files and pose files) into `dir` and returns the manifest path.
std::filesystem::path write_synthetic_episode(const std::filesystem::path& dir, const SynthEpisodeOptions& options);

}  // namespace voxelfeat
