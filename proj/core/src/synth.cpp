#include "voxelfeat/synth.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "voxelfeat/errors.hpp"
#include "voxelfeat/image_io.hpp"
#include "voxelfeat/manifest.hpp"
#include "voxelfeat/targets.hpp"

namespace voxelfeat {

void SyntheticScene::validate() const {
    for (const auto& s : spheres) {
        if (!(s.radius > 0.0)) raise(ErrorCode::kParameter, "sphere radius must be positive");
    }
    for (const auto& b : boxes) {
        if ((b.max_corner.array() <= b.min_corner.array()).any()) {
            raise(ErrorCode::kParameter, "box extents must be positive");
        }
    }
}

double SyntheticScene::surface_distance(const Eigen::Vector3d& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : spheres) best = std::min(best, std::abs((p - s.center).norm() - s.radius));
    for (const auto& b : boxes) {
        const Eigen::Vector3d below = (b.min_corner - p).cwiseMax(0.0);
        const Eigen::Vector3d above = (p - b.max_corner).cwiseMax(0.0);
        const Eigen::Vector3d outside = below.cwiseMax(above);
        if (outside.squaredNorm() > 0.0) {
            best = std::min(best, outside.norm());
        } else {
            const Eigen::Vector3d to_min = p - b.min_corner;
            const Eigen::Vector3d to_max = b.max_corner - p;
            best = std::min(best, std::min(to_min.minCoeff(), to_max.minCoeff()));
        }
    }
    return best;
}

namespace {

constexpr double kNoHit = std::numeric_limits<double>::infinity();

// Smallest positive s with |o + s d - c| = r.
double intersect_sphere(const Eigen::Vector3d& o, const Eigen::Vector3d& d, const SphereShape& s) {
    const Eigen::Vector3d oc = o - s.center;
    const double a = d.squaredNorm();
    const double b = d.dot(oc);
    const double c = oc.squaredNorm() - s.radius * s.radius;
    const double disc = b * b - a * c;
    if (disc < 0.0) return kNoHit;
    const double root = std::sqrt(disc);
    const double near = (-b - root) / a;
    if (near > 0.0) return near;
    const double far = (-b + root) / a;
    return far > 0.0 ? far : kNoHit;
}

double intersect_box(const Eigen::Vector3d& o, const Eigen::Vector3d& d, const BoxShape& box) {
    double t_enter = -kNoHit;
    double t_exit = kNoHit;
    for (int a = 0; a < 3; ++a) {
        if (d[a] == 0.0) {
            if (o[a] < box.min_corner[a] || o[a] > box.max_corner[a]) return kNoHit;
            continue;
        }
        double t0 = (box.min_corner[a] - o[a]) / d[a];
        double t1 = (box.max_corner[a] - o[a]) / d[a];
        if (t0 > t1) std::swap(t0, t1);
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
    }
    if (t_enter > t_exit) return kNoHit;
    if (t_enter > 0.0) return t_enter;
    return t_exit > 0.0 ? t_exit : kNoHit;
}

}  // namespace

RenderedView render_depth(const SyntheticScene& scene, const CameraIntrinsics& intr, const RigidTransform& pose) {
    if (scene.empty()) raise(ErrorCode::kParameter, "cannot render an empty scene");
    scene.validate();
    intr.validate();
    pose.validate();

    RenderedView view{DepthImage(intr.height, intr.width), RgbImage(intr.height, intr.width, 3),
                      SaliencyMap(intr.height, intr.width, 1)};
    const Eigen::Vector3d origin = pose.translation();
    for (int r = 0; r < intr.height; ++r) {
        for (int c = 0; c < intr.width; ++c) {
            // Camera-frame ray with unit Z, so the hit parameter is the depth.
            const Eigen::Vector3d ray_cam((c - intr.cx) / intr.fx, (r - intr.cy) / intr.fy, 1.0);
            const Eigen::Vector3d dir = pose.rotation() * ray_cam;
            double best = kNoHit;
            Eigen::Vector3d color = Eigen::Vector3d::Zero();
            double saliency = 0.0;
            for (const auto& s : scene.spheres) {
                const double t = intersect_sphere(origin, dir, s);
                if (t < best) {
                    best = t;
                    color = s.color;
                    saliency = s.saliency;
                }
            }
            for (const auto& b : scene.boxes) {
                const double t = intersect_box(origin, dir, b);
                if (t < best) {
                    best = t;
                    color = b.color;
                    saliency = b.saliency;
                }
            }
            if (best == kNoHit) continue;
            view.depth.set(r, c, best);
            for (int a = 0; a < 3; ++a) view.rgb.at(r, c, a) = color[a];
            view.saliency.at(r, c) = saliency;
        }
    }
    return view;
}

std::vector<RigidTransform> three_camera_rig(const Eigen::Vector3d& target, double distance) {
    const Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
    return {
        look_at(target + distance * Eigen::Vector3d(0.0, -0.9, 0.45), target, up),
        look_at(target + distance * Eigen::Vector3d(-0.7, -0.55, 0.5), target, up),
        look_at(target + distance * Eigen::Vector3d(0.7, -0.55, 0.5), target, up),
    };
}

CameraIntrinsics make_intrinsics(int width, int height, double fov_deg) {
    const double f = 0.5 * width / std::tan(0.5 * fov_deg * std::numbers::pi / 180.0);
    return {f, f, 0.5 * (width - 1), 0.5 * (height - 1), width, height};
}

FeaturedPointCloud random_cloud(std::size_t count, int saliency_channels, const WorkspaceBounds& bounds,
                                std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    FeaturedPointCloud cloud(saliency_channels);
    cloud.resize(count);
    auto pos = cloud.mutable_positions();
    auto col = cloud.mutable_colors();
    auto sal = cloud.mutable_saliency_values();
    const Eigen::Vector3d extent = bounds.extent();
    for (std::size_t p = 0; p < count; ++p) {
        for (int a = 0; a < 3; ++a) pos[3 * p + a] = bounds.min_corner[a] + unit(rng) * extent[a];
        for (int a = 0; a < 3; ++a) col[3 * p + a] = unit(rng);
        for (int c = 0; c < saliency_channels; ++c) sal[p * saliency_channels + c] = unit(rng);
    }
    return cloud;
}

VoxelGrid brute_force_voxelize(const FeaturedPointCloud& cloud, const WorkspaceBounds& bounds, const GridDims& dims,
                               int saliency_channels) {
    bounds.validate();
    dims.validate();
    if (cloud.saliency_channels() != saliency_channels) raise(ErrorCode::kShape, "saliency channel mismatch");

    const int k = saliency_channels;
    const std::size_t width = 6 + static_cast<std::size_t>(k);
    const std::size_t voxels = dims.voxel_count();
    const int n[3] = {dims.nx, dims.ny, dims.nz};
    double size[3];
    for (int a = 0; a < 3; ++a) size[a] = (bounds.max_corner[a] - bounds.min_corner[a]) / n[a];

    std::vector<double> sums(voxels * width, 0.0);
    std::vector<std::uint32_t> counts(voxels, 0);
    for (std::size_t p = 0; p < cloud.size(); ++p) {
        const Eigen::Vector3d x = cloud.position(p);
        int idx[3];
        bool inside = true;
        for (int a = 0; a < 3; ++a) {
            if (x[a] < bounds.min_corner[a] || x[a] > bounds.max_corner[a] || std::isnan(x[a])) {
                inside = false;
                break;
            }
            idx[a] = static_cast<int>((x[a] - bounds.min_corner[a]) / size[a]);
            if (idx[a] >= n[a]) idx[a] = n[a] - 1;
        }
        if (!inside) continue;
        const std::size_t v = (static_cast<std::size_t>(idx[0]) * n[1] + idx[1]) * n[2] + idx[2];
        double* s = &sums[v * width];
        const Eigen::Vector3d rgb = cloud.color(p);
        const auto sal = cloud.saliency(p);
        for (int a = 0; a < 3; ++a) s[a] += rgb[a];
        for (int c = 0; c < k; ++c) s[3 + c] += sal[static_cast<std::size_t>(c)];
        for (int a = 0; a < 3; ++a) s[3 + k + a] += x[a];
        ++counts[v];
    }

    const ChannelLayout layout{k};
    std::vector<float> features(static_cast<std::size_t>(layout.count()) * voxels, 0.0f);
    VoxelGrid::Accumulators acc;
    for (std::size_t v = 0; v < voxels; ++v) {
        if (counts[v] == 0) continue;
        acc.voxels.push_back(static_cast<std::uint32_t>(v));
        acc.counts.push_back(counts[v]);
        for (std::size_t c = 0; c < width; ++c) {
            acc.sums.push_back(sums[v * width + c]);
            features[c * voxels + v] = static_cast<float>(sums[v * width + c] / counts[v]);
        }
        const std::size_t i = v / (static_cast<std::size_t>(n[1]) * n[2]);
        const std::size_t j = (v / n[2]) % n[1];
        const std::size_t kk = v % n[2];
        const std::size_t ijk[3] = {i, j, kk};
        for (int a = 0; a < 3; ++a) {
            const double g = n[a] == 1 ? 0.5 : static_cast<double>(ijk[a]) / (n[a] - 1);
            features[static_cast<std::size_t>(layout.grid_location() + a) * voxels + v] = static_cast<float>(g);
        }
        features[static_cast<std::size_t>(layout.occupancy()) * voxels + v] = 1.0f;
    }
    return VoxelGrid(dims, bounds, k, std::move(features), std::move(acc));
}

namespace {

struct Waypoint {
    int frame;
    Eigen::Vector3d position;
    double yaw_deg;
};

// Piecewise-linear interpolation between waypoints, holding the ends.
std::pair<Eigen::Vector3d, double> follow(const std::vector<Waypoint>& path, int frame) {
    if (frame <= path.front().frame) return {path.front().position, path.front().yaw_deg};
    for (std::size_t w = 1; w < path.size(); ++w) {
        if (frame <= path[w].frame) {
            const auto& a = path[w - 1];
            const auto& b = path[w];
            const double s = static_cast<double>(frame - a.frame) / (b.frame - a.frame);
            return {a.position + s * (b.position - a.position), a.yaw_deg + s * (b.yaw_deg - a.yaw_deg)};
        }
    }
    return {path.back().position, path.back().yaw_deg};
}

std::string frame_file(int t, const std::string& camera, const std::string& suffix) {
    std::ostringstream os;
    os << "frame_" << std::setw(4) << std::setfill('0') << t << '/' << camera << suffix;
    return os.str();
}

}  // namespace

std::filesystem::path write_synthetic_episode(const std::filesystem::path& dir, const SynthEpisodeOptions& options) {
    if (options.frames < 8) raise(ErrorCode::kParameter, "synthetic episodes need at least 8 frames");
    if (options.heads < 0 || options.heads > kMaxAttentionHeads) raise(ErrorCode::kParameter, "heads must lie in [0, 6]");
    if (options.patch_size < 2 || options.patch_size > std::min(options.width, options.height)) {
        raise(ErrorCode::kParameter, "patch size must lie in [2, image size]");
    }
    std::filesystem::create_directories(dir);
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);

    SyntheticScene scene;
    scene.boxes.push_back({{-0.6, -0.6, 0.70}, {0.6, 0.6, 0.75}, {0.55, 0.40, 0.25}, 0.1});
    const Eigen::Vector3d object(jitter(rng), 0.1 + jitter(rng), 0.85);
    scene.spheres.push_back({object, 0.1, {0.85, 0.1, 0.1}, 0.9});
    scene.boxes.push_back({{0.25, -0.2, 0.75}, {0.4, -0.05, 0.9}, {0.1, 0.2, 0.8}, 0.7});

    const int n = options.frames;
    const int reach = n / 3;
    const int lift = (2 * n) / 3;
    const std::vector<Waypoint> left_path = {{0, {-0.45, -0.3, 1.2}, 0.0},
                                             {reach, object + Eigen::Vector3d(0.0, 0.0, 0.12), 30.0},
                                             {reach + 3, object + Eigen::Vector3d(0.0, 0.0, 0.12), 30.0},
                                             {lift, object + Eigen::Vector3d(0.0, 0.0, 0.4), 45.0}};
    const std::vector<Waypoint> right_path = {{0, {0.45, -0.3, 1.2}, 0.0},
                                              {reach, {0.32, -0.12, 1.0}, -20.0},
                                              {lift, {0.32, -0.12, 1.0}, -20.0},
                                              {lift + 2, {0.3, -0.1, 1.05}, -20.0}};

    EpisodeManifest m;
    m.base_dir = dir;
    m.saliency.heads = options.heads;
    m.depth_scale = options.depth_scale;
    m.acting_arm = kLeftArmId;

    const CameraIntrinsics intr = make_intrinsics(options.width, options.height, 60.0);
    const CameraIntrinsics patch_intr = intr.rescaled(options.patch_size, options.patch_size);
    const auto rig = three_camera_rig(object, 1.6);
    const std::vector<std::string> names = {"front", "left_wrist", "right_wrist"};
    for (const auto& name : names) m.episode.cameras.push_back({name, intr, {}});

    for (int t = 0; t < n; ++t) {
        FrameObservation frame;
        frame.timestep = t;
        const auto [lp, lyaw] = follow(left_path, t);
        const auto [rp, ryaw] = follow(right_path, t);
        frame.left.ee_position = lp;
        frame.left.ee_orientation = euler_deg_to_quaternion({180.0, 0.0, lyaw});
        frame.left.gripper_open = t < reach + 3;
        frame.right.ee_position = rp;
        frame.right.ee_orientation = euler_deg_to_quaternion({180.0, 0.0, ryaw});
        frame.right.gripper_open = t < lift;
        for (std::size_t j = 0; j < 7; ++j) {
            frame.left.joint_positions[j] = 0.1 * static_cast<double>(j) + lp.z();
            frame.right.joint_positions[j] = -0.1 * static_cast<double>(j) + rp.z();
        }
        frame.language_acting = "pick up the red ball";
        frame.language_stabilizing = "hold the blue block steady";

        const std::vector<RigidTransform> poses = {
            rig[0],
            look_at(lp + Eigen::Vector3d(-0.1, -0.25, 0.25), object, Eigen::Vector3d::UnitZ()),
            look_at(rp + Eigen::Vector3d(0.1, -0.25, 0.25), object, Eigen::Vector3d::UnitZ()),
        };
        for (std::size_t c = 0; c < names.size(); ++c) {
            m.episode.cameras[c].poses.push_back(poses[c]);
            const RenderedView view = render_depth(scene, intr, poses[c]);
            ViewRef ref{names[c], frame_file(t, names[c], "_rgb.png"), frame_file(t, names[c], "_depth.png"), ""};
            save_rgb_png(dir / ref.rgb, view.rgb);
            save_depth_png(dir / ref.depth, view.depth, options.depth_scale);
            if (options.heads > 0) {
                const RenderedView coarse = render_depth(scene, patch_intr, poses[c]);
                SaliencyMap maps(options.patch_size, options.patch_size, options.heads);
                for (int r = 0; r < maps.height; ++r) {
                    for (int col = 0; col < maps.width; ++col) {
                        for (int h = 0; h < options.heads; ++h) {
                            maps.at(r, col, h) = coarse.saliency.at(r, col) * (1.0 - 0.12 * h);
                        }
                    }
                }
                ref.saliency = frame_file(t, names[c], "_attn.f32");
                save_saliency_file(dir / ref.saliency, maps);
            }
            frame.views.push_back(std::move(ref));
        }
        m.episode.frames.push_back(std::move(frame));
    }

    const auto manifest_path = dir / "manifest.json";
    save_manifest(manifest_path, m);
    return manifest_path;
}

}  // namespace voxelfeat
