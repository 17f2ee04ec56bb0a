#include "voxelfeat/voxelizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "voxelfeat/errors.hpp"
#include "voxelfeat/parallel.hpp"

namespace voxelfeat {

void WorkspaceBounds::validate() const {
    if (!min_corner.allFinite() || !max_corner.allFinite()) {
        raise(ErrorCode::kParameter, "workspace bounds must be finite");
    }
    if ((max_corner.array() <= min_corner.array()).any()) {
        raise(ErrorCode::kParameter, "workspace max corner must exceed min corner on every axis");
    }
}

bool WorkspaceBounds::contains(const Eigen::Vector3d& p) const {
    return (p.array() >= min_corner.array()).all() && (p.array() <= max_corner.array()).all();
}

void GridDims::validate() const {
    if (nx < 1 || ny < 1 || nz < 1) raise(ErrorCode::kParameter, "grid dimensions must be at least 1");
    if (voxel_count() > std::numeric_limits<std::uint32_t>::max() - 1) {
        raise(ErrorCode::kParameter, "grid has too many voxels");
    }
}

VoxelIndex unflatten_index(std::size_t flat, const GridDims& dims) {
    const auto nz = static_cast<std::size_t>(dims.nz);
    const auto ny = static_cast<std::size_t>(dims.ny);
    return {static_cast<int>(flat / (ny * nz)), static_cast<int>((flat / nz) % ny), static_cast<int>(flat % nz)};
}

namespace {

inline int axis_bin(double p, double lo, double hi, int n) {
    // Callers guarantee lo <= p <= hi. Rounding can push p just below hi
    // to n; that point is in bounds, so it joins the closed last bin.
    const int b = static_cast<int>(std::floor((p - lo) * n / (hi - lo)));
    return std::min(b, n - 1);
}

inline bool axis_inside(double p, double lo, double hi) { return p >= lo && p <= hi; }

constexpr std::uint32_t kOutside = std::numeric_limits<std::uint32_t>::max();

}  // namespace

std::optional<VoxelIndex> point_to_index(const Eigen::Vector3d& p, const WorkspaceBounds& bounds,
                                         const GridDims& dims) {
    const auto& lo = bounds.min_corner;
    const auto& hi = bounds.max_corner;
    if (!axis_inside(p.x(), lo.x(), hi.x()) || !axis_inside(p.y(), lo.y(), hi.y()) ||
        !axis_inside(p.z(), lo.z(), hi.z())) {
        return std::nullopt;
    }
    return VoxelIndex{axis_bin(p.x(), lo.x(), hi.x(), dims.nx), axis_bin(p.y(), lo.y(), hi.y(), dims.ny),
                      axis_bin(p.z(), lo.z(), hi.z(), dims.nz)};
}

double normalized_grid_coordinate(int i, int n) {
    return n == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(n - 1);
}

VoxelGrid::VoxelGrid(const GridDims& dims, const WorkspaceBounds& bounds, int saliency_channels)
    : dims_(dims), bounds_(bounds), layout_{saliency_channels},
      features_(static_cast<std::size_t>(layout_.count()) * dims.voxel_count(), 0.0f) {}

VoxelGrid::VoxelGrid(const GridDims& dims, const WorkspaceBounds& bounds, int saliency_channels,
                     std::vector<float> features, Accumulators accumulators)
    : dims_(dims), bounds_(bounds), layout_{saliency_channels}, features_(std::move(features)),
      accumulators_(std::move(accumulators)) {
    if (features_.size() != static_cast<std::size_t>(layout_.count()) * dims.voxel_count()) {
        raise(ErrorCode::kShape, "feature buffer size does not match grid dims and channel count");
    }
}

Eigen::Vector3d VoxelGrid::voxel_size() const {
    return bounds_.extent().cwiseQuotient(Eigen::Vector3d(dims_.nx, dims_.ny, dims_.nz));
}

Eigen::Vector3d VoxelGrid::voxel_min_corner(const VoxelIndex& v) const {
    return bounds_.min_corner + Eigen::Vector3d(v.i, v.j, v.k).cwiseProduct(voxel_size());
}

Eigen::Vector3d VoxelGrid::voxel_center(const VoxelIndex& v) const {
    return bounds_.min_corner + (Eigen::Vector3d(v.i, v.j, v.k).array() + 0.5).matrix().cwiseProduct(voxel_size());
}

std::size_t VoxelGrid::occupied_count() const {
    const auto occ = channel(layout_.occupancy());
    return static_cast<std::size_t>(std::count_if(occ.begin(), occ.end(), [](float v) { return v != 0.0f; }));
}

bool VoxelGrid::same_features(const VoxelGrid& other) const {
    if (!(dims_ == other.dims_) || !(bounds_ == other.bounds_) ||
        layout_.saliency_channels != other.layout_.saliency_channels) {
        return false;
    }
    return features_.size() == other.features_.size() &&
           std::memcmp(features_.data(), other.features_.data(), features_.size() * sizeof(float)) == 0;
}

VoxelizeResult voxelize(const FeaturedPointCloud& cloud, const WorkspaceBounds& bounds, const GridDims& dims,
                        int saliency_channels, const VoxelizeOptions& options) {
    bounds.validate();
    dims.validate();
    if (saliency_channels < 0) raise(ErrorCode::kParameter, "saliency channel count must be non-negative");
    if (cloud.saliency_channels() != saliency_channels) {
        raise(ErrorCode::kShape, "cloud carries " + std::to_string(cloud.saliency_channels()) +
                                     " saliency channels, grid expects " + std::to_string(saliency_channels));
    }

    const std::size_t n = cloud.size();
    const std::size_t voxels = dims.voxel_count();
    const ChannelLayout layout{saliency_channels};
    const auto k = static_cast<std::size_t>(saliency_channels);
    const auto acc_width = static_cast<std::size_t>(layout.accumulated());

    const auto pos = cloud.positions();
    const auto col = cloud.colors();
    const auto sal = cloud.saliency_values();

    // 1. Voxel of every point.
    std::vector<std::uint32_t> voxel_of(n);
    const Eigen::Vector3d lo = bounds.min_corner;
    const Eigen::Vector3d hi = bounds.max_corner;
    parallel_for(n, options.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            const double x = pos[3 * p], y = pos[3 * p + 1], z = pos[3 * p + 2];
            if (!axis_inside(x, lo.x(), hi.x()) || !axis_inside(y, lo.y(), hi.y()) ||
                !axis_inside(z, lo.z(), hi.z())) {
                voxel_of[p] = kOutside;
                continue;
            }
            const std::size_t i = static_cast<std::size_t>(axis_bin(x, lo.x(), hi.x(), dims.nx));
            const std::size_t j = static_cast<std::size_t>(axis_bin(y, lo.y(), hi.y(), dims.ny));
            const std::size_t kk = static_cast<std::size_t>(axis_bin(z, lo.z(), hi.z(), dims.nz));
            voxel_of[p] = static_cast<std::uint32_t>((i * dims.ny + j) * dims.nz + kk);
        }
    });

    // 2. Stable counting sort of point ids by voxel.
    std::vector<std::uint32_t> bucket_start(voxels + 1, 0);
    std::size_t dropped = 0;
    for (std::size_t p = 0; p < n; ++p) {
        if (voxel_of[p] == kOutside) {
            ++dropped;
        } else {
            ++bucket_start[voxel_of[p] + 1];
        }
    }
    std::vector<std::uint32_t> occupied;
    for (std::size_t v = 0; v < voxels; ++v) {
        if (bucket_start[v + 1] != 0) occupied.push_back(static_cast<std::uint32_t>(v));
        bucket_start[v + 1] += bucket_start[v];
    }
    std::vector<std::uint32_t> order(n - dropped);
    {
        std::vector<std::uint32_t> cursor(bucket_start.begin(), bucket_start.end() - 1);
        for (std::size_t p = 0; p < n; ++p) {
            if (voxel_of[p] != kOutside) order[cursor[voxel_of[p]]++] = static_cast<std::uint32_t>(p);
        }
    }

    // 3. Per-voxel canonical ordering and reduction, sharded by voxel range.
    VoxelGrid::Accumulators acc;
    acc.voxels = occupied;
    acc.counts.resize(occupied.size());
    acc.sums.resize(occupied.size() * acc_width);
    std::vector<float> features(static_cast<std::size_t>(layout.count()) * voxels, 0.0f);

    auto point_less = [&](std::uint32_t a, std::uint32_t b) {
        for (std::size_t c = 0; c < 3; ++c) {
            if (pos[3 * a + c] != pos[3 * b + c]) return pos[3 * a + c] < pos[3 * b + c];
        }
        for (std::size_t c = 0; c < 3; ++c) {
            if (col[3 * a + c] != col[3 * b + c]) return col[3 * a + c] < col[3 * b + c];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (sal[k * a + c] != sal[k * b + c]) return sal[k * a + c] < sal[k * b + c];
        }
        return false;
    };

    auto channel_at = [&](int channel, std::size_t v) -> float& {
        return features[static_cast<std::size_t>(channel) * voxels + v];
    };

    parallel_for(occupied.size(), options.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> sum(acc_width);
        for (std::size_t o = begin; o < end; ++o) {
            const std::uint32_t v = occupied[o];
            const auto first = order.begin() + bucket_start[v];
            const auto last = order.begin() + bucket_start[v + 1];
            if (last - first > 1) std::sort(first, last, point_less);

            std::fill(sum.begin(), sum.end(), 0.0);
            for (auto it = first; it != last; ++it) {
                const std::size_t p = *it;
                sum[0] += col[3 * p];
                sum[1] += col[3 * p + 1];
                sum[2] += col[3 * p + 2];
                for (std::size_t c = 0; c < k; ++c) sum[3 + c] += sal[k * p + c];
                sum[3 + k] += pos[3 * p];
                sum[4 + k] += pos[3 * p + 1];
                sum[5 + k] += pos[3 * p + 2];
            }

            const auto count = static_cast<std::uint32_t>(last - first);
            acc.counts[o] = count;
            std::copy(sum.begin(), sum.end(), acc.sums.begin() + static_cast<std::ptrdiff_t>(o * acc_width));

            const double inv_count = 1.0 / count;
            for (std::size_t c = 0; c < acc_width; ++c) {
                channel_at(static_cast<int>(c), v) = static_cast<float>(sum[c] * inv_count);
            }
            const VoxelIndex idx = unflatten_index(v, dims);
            channel_at(layout.grid_location(), v) = static_cast<float>(normalized_grid_coordinate(idx.i, dims.nx));
            channel_at(layout.grid_location() + 1, v) =
                static_cast<float>(normalized_grid_coordinate(idx.j, dims.ny));
            channel_at(layout.grid_location() + 2, v) =
                static_cast<float>(normalized_grid_coordinate(idx.k, dims.nz));
            channel_at(layout.occupancy(), v) = 1.0f;
        }
    });

    VoxelizeResult result{VoxelGrid(dims, bounds, saliency_channels, std::move(features), std::move(acc)),
                          VoxelizeStats{n, dropped, occupied.size()}};
    return result;
}

std::vector<float> feature_slice(const VoxelGrid& grid, int first, int count) {
    if (first < 0 || count < 0 || first + count > grid.channel_count()) {
        raise(ErrorCode::kParameter, "channel range [" + std::to_string(first) + ", " +
                                         std::to_string(first + count) + ") exceeds " +
                                         std::to_string(grid.channel_count()) + " channels");
    }
    const auto all = grid.features();
    const std::size_t v = grid.voxel_count();
    return {all.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(first) * v),
            all.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(first + count) * v)};
}

}  // namespace voxelfeat
