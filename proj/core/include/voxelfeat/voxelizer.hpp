#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "voxelfeat/geometry.hpp"

namespace voxelfeat {

/// Axis-aligned workspace box in world meters.
struct WorkspaceBounds {
    Eigen::Vector3d min_corner = Eigen::Vector3d(-1.0, -1.0, 0.0);
    Eigen::Vector3d max_corner = Eigen::Vector3d(1.0, 1.0, 2.0);

    void validate() const;
    Eigen::Vector3d extent() const { return max_corner - min_corner; }
    Eigen::Vector3d center() const { return 0.5 * (min_corner + max_corner); }
    bool contains(const Eigen::Vector3d& p) const;

    friend bool operator==(const WorkspaceBounds& a, const WorkspaceBounds& b) {
        return a.min_corner == b.min_corner && a.max_corner == b.max_corner;
    }
};

struct GridDims {
    int nx = 50;
    int ny = 50;
    int nz = 50;

    void validate() const;
    std::size_t voxel_count() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    }
    friend bool operator==(const GridDims&, const GridDims&) = default;
};

struct VoxelIndex {
    int i = 0;
    int j = 0;
    int k = 0;
    friend bool operator==(const VoxelIndex&, const VoxelIndex&) = default;
};

/// Row-major flat index: x-major, then y, then z.
inline std::size_t flat_index(const VoxelIndex& v, const GridDims& dims) {
    return (static_cast<std::size_t>(v.i) * dims.ny + static_cast<std::size_t>(v.j)) * dims.nz +
           static_cast<std::size_t>(v.k);
}
VoxelIndex unflatten_index(std::size_t flat, const GridDims& dims);

/// Bin of `p`. Bins are half-open [lo, hi) except the last bin on each
/// axis, which also takes points lying exactly on max_corner. Points outside
/// the bounds (or non-finite) yield std::nullopt.
std::optional<VoxelIndex> point_to_index(const Eigen::Vector3d& p, const WorkspaceBounds& bounds,
                                         const GridDims& dims);

/// Per-voxel feature layout for K saliency channels:
/// [rgb 3 | saliency K | mean world xyz 3 | normalized grid xyz 3 | occupancy 1].
struct ChannelLayout {
    int saliency_channels = 1;

    static constexpr int rgb = 0;
    static constexpr int saliency = 3;
    int position() const { return 3 + saliency_channels; }
    int grid_location() const { return 6 + saliency_channels; }
    int occupancy() const { return 9 + saliency_channels; }
    int count() const { return 10 + saliency_channels; }
    /// Channels that are per-point means: rgb, saliency and world position.
    int accumulated() const { return 6 + saliency_channels; }
};

/// Dense voxel feature grid, channel-major (channel, then x, y, z).
/// Grids produced by voxelize() also carry the double-precision sums and
/// point counts of every occupied voxel; grids read from disk do not.
class VoxelGrid {
public:
    /// Sums of (rgb, saliency, position) per occupied voxel, in increasing
    /// flat voxel order.
    struct Accumulators {
        std::vector<std::uint32_t> voxels;
        std::vector<std::uint32_t> counts;
        std::vector<double> sums;  // voxels.size() x accumulated()
    };

    VoxelGrid() = default;
    /// All-zero grid.
    VoxelGrid(const GridDims& dims, const WorkspaceBounds& bounds, int saliency_channels);
    /// Takes ownership of channel-major `features`. Throws Error(kShape) on
    /// a size mismatch.
    VoxelGrid(const GridDims& dims, const WorkspaceBounds& bounds, int saliency_channels,
              std::vector<float> features, Accumulators accumulators = {});

    const GridDims& dims() const { return dims_; }
    const WorkspaceBounds& bounds() const { return bounds_; }
    int saliency_channels() const { return layout_.saliency_channels; }
    const ChannelLayout& layout() const { return layout_; }
    int channel_count() const { return layout_.count(); }
    std::size_t voxel_count() const { return dims_.voxel_count(); }

    Eigen::Vector3d voxel_size() const;
    Eigen::Vector3d voxel_min_corner(const VoxelIndex& v) const;
    Eigen::Vector3d voxel_center(const VoxelIndex& v) const;

    float feature(int channel, const VoxelIndex& v) const {
        return features_[static_cast<std::size_t>(channel) * voxel_count() + flat_index(v, dims_)];
    }
    std::span<const float> channel(int c) const {
        return std::span<const float>(features_).subspan(static_cast<std::size_t>(c) * voxel_count(),
                                                         voxel_count());
    }
    std::span<const float> features() const { return features_; }
    std::span<float> mutable_features() { return features_; }

    bool occupied(const VoxelIndex& v) const { return feature(layout_.occupancy(), v) != 0.0f; }
    std::size_t occupied_count() const;

    const Accumulators& accumulators() const { return accumulators_; }

    /// Bitwise equality of header fields and features (accumulators ignored).
    bool same_features(const VoxelGrid& other) const;

private:
    GridDims dims_{};
    WorkspaceBounds bounds_{};
    ChannelLayout layout_{};
    std::vector<float> features_;
    Accumulators accumulators_;
};

struct VoxelizeStats {
    std::size_t input_points = 0;
    std::size_t dropped_points = 0;  // outside the workspace
    std::size_t occupied_voxels = 0;
};

struct VoxelizeResult {
    VoxelGrid grid;
    VoxelizeStats stats;
};

struct VoxelizeOptions {
    int threads = 1;
};

/// Averages point features into voxels. Points are bucketed by voxel index,
/// each bucket is put into a canonical order (lexicographic on its features),
/// and sums are taken in that order, so the result is bitwise identical for
/// any input permutation and any thread count.
/// Throws Error(kShape) when the cloud's saliency channel count is not
/// `saliency_channels`.
VoxelizeResult voxelize(const FeaturedPointCloud& cloud, const WorkspaceBounds& bounds, const GridDims& dims,
                        int saliency_channels, const VoxelizeOptions& options = {});

/// Contiguous copy of channels [first, first + count).
/// Throws Error(kParameter) when the range exceeds the channel count.
std::vector<float> feature_slice(const VoxelGrid& grid, int first, int count);

/// Normalized grid coordinate of bin `i` along an axis with `n` bins:
/// i / (n - 1), or 0.5 when n = 1.
double normalized_grid_coordinate(int i, int n);

}  // namespace voxelfeat
