#include "voxelfeat/featurize.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "voxelfeat/errors.hpp"
#include "voxelfeat/image_io.hpp"
#include "voxelfeat/parallel.hpp"
#include "voxelfeat/saliency.hpp"
#include "voxelfeat/tensor_file.hpp"

namespace voxelfeat {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (!known.contains(key)) raise(ErrorCode::kFormat, "unknown config key '" + where + key + "'");
    }
}

template <typename T>
T read(const json& obj, const std::string& key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        raise(ErrorCode::kFormat, "config key '" + where + key + "' has the wrong type");
    }
}

Eigen::Vector3d read_vec3(const json& obj, const std::string& key, const std::string& where) {
    const auto v = read<std::vector<double>>(obj, key, where);
    if (v.size() != 3) raise(ErrorCode::kFormat, "config key '" + where + key + "' must hold 3 numbers");
    return {v[0], v[1], v[2]};
}

json target_to_json(const ArmActionPose& pose, const ActionTarget& target) {
    const auto& q = pose.orientation;
    return json{{"role", std::string(to_string(target.role))},
                {"arm_id", target.arm_id},
                {"translation_index", {target.translation.i, target.translation.j, target.translation.k}},
                {"rotation_bins", {target.rotation_bins[0], target.rotation_bins[1], target.rotation_bins[2]}},
                {"gripper_open", target.gripper_open},
                {"collision", target.collision},
                {"position", {pose.position.x(), pose.position.y(), pose.position.z()}},
                {"orientation", {q.w(), q.x(), q.y(), q.z()}}};
}

std::string tensor_name(std::size_t observation) {
    std::ostringstream os;
    os << "obs_" << std::setw(6) << std::setfill('0') << observation << ".vxft";
    return os.str();
}

}  // namespace

FeaturizeConfig load_featurize_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::kMissingFile, "config '" + path.string() + "' not found");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        raise(ErrorCode::kFormat, "config is not valid JSON: " + std::string(e.what()));
    }
    FeaturizeConfig config;
    reject_unknown(doc, {"keyframes", "rotation_resolution_deg", "max_depth", "augmentation"}, "");
    if (doc.contains("keyframes")) {
        const json& k = doc.at("keyframes");
        reject_unknown(k, {"vel_eps", "stationary_window", "dt", "mode", "angular_eps"}, "keyframes.");
        if (k.contains("vel_eps")) config.keyframes.vel_eps = read<double>(k, "vel_eps", "keyframes.");
        if (k.contains("stationary_window")) config.keyframes.stationary_window = read<int>(k, "stationary_window", "keyframes.");
        if (k.contains("dt")) config.keyframes.dt = read<double>(k, "dt", "keyframes.");
        if (k.contains("mode")) config.keyframes.mode = parse_stationary_mode(read<std::string>(k, "mode", "keyframes."));
        if (k.contains("angular_eps")) config.keyframes.angular_eps = read<double>(k, "angular_eps", "keyframes.");
        config.keyframes.validate();
    }
    if (doc.contains("rotation_resolution_deg")) {
        config.rotation_resolution_deg = read<double>(doc, "rotation_resolution_deg", "");
        rotation_bin_count(config.rotation_resolution_deg);
    }
    if (doc.contains("max_depth")) config.max_depth = read<double>(doc, "max_depth", "");
    if (doc.contains("augmentation")) {
        const json& a = doc.at("augmentation");
        reject_unknown(a, {"enabled", "max_translation", "max_rotation_deg", "max_attempts"}, "augmentation.");
        if (a.contains("enabled")) config.augment = read<bool>(a, "enabled", "augmentation.");
        if (a.contains("max_translation")) config.augmentation.max_translation = read_vec3(a, "max_translation", "augmentation.");
        if (a.contains("max_rotation_deg")) config.augmentation.max_rotation_deg = read_vec3(a, "max_rotation_deg", "augmentation.");
        if (a.contains("max_attempts")) config.augmentation.max_attempts = read<int>(a, "max_attempts", "augmentation.");
        config.augmentation.validate();
    }
    return config;
}

std::vector<ArmActionPose> frame_action_poses(const EpisodeManifest& manifest, std::size_t frame) {
    const auto& f = manifest.episode.frames.at(frame);
    auto make = [](const ArmState& arm, ArmRole role, int id) {
        ArmActionPose pose;
        pose.role = role;
        pose.position = arm.ee_position;
        pose.orientation = arm.ee_orientation;
        pose.gripper_open = arm.gripper_open;
        pose.collision = arm.collision;
        pose.arm_id = id;
        return pose;
    };
    const bool left_acts = manifest.acting_arm == kLeftArmId;
    const ArmState& acting = left_acts ? f.left : f.right;
    const ArmState& stabilizing = left_acts ? f.right : f.left;
    return {make(acting, ArmRole::kActing, left_acts ? kLeftArmId : kRightArmId),
            make(stabilizing, ArmRole::kStabilizing, left_acts ? kRightArmId : kLeftArmId)};
}

FeaturedPointCloud frame_point_cloud(const EpisodeManifest& manifest, std::size_t frame, const FeaturizeConfig& config) {
    const auto& f = manifest.episode.frames.at(frame);
    struct Loaded {
        RgbImage rgb;
        DepthImage depth;
        SaliencyMap saliency;
    };
    std::vector<Loaded> loaded;
    loaded.reserve(manifest.episode.cameras.size());
    std::vector<CameraView> views;
    views.reserve(manifest.episode.cameras.size());
    // Cameras in manifest order; the views map is keyed by name.
    for (const auto& cam : manifest.episode.cameras) {
        const auto it = std::find_if(f.views.begin(), f.views.end(), [&](const ViewRef& v) { return v.camera == cam.name; });
        if (it == f.views.end()) raise(ErrorCode::kFormat, "frame " + std::to_string(frame) + " lacks camera '" + cam.name + "'");
        const std::string ctx = "frame " + std::to_string(frame) + " camera '" + cam.name + "': ";
        try {
            Loaded l;
            l.rgb = load_rgb_png(manifest.resolve(it->rgb));
            l.depth = load_depth_png(manifest.resolve(it->depth), manifest.depth_scale);
            if (manifest.saliency.heads > 0) {
                const SaliencyMap patches = load_saliency_file(manifest.resolve(it->saliency));
                l.saliency = process_attention(patches, l.rgb.height, l.rgb.width, manifest.saliency);
            } else {
                l.saliency = SaliencyMap(l.rgb.height, l.rgb.width, 0);
            }
            loaded.push_back(std::move(l));
        } catch (const Error& e) {
            raise(e.code(), ctx + e.what());
        }
    }
    for (std::size_t c = 0; c < loaded.size(); ++c) {
        const auto& cam = manifest.episode.cameras[c];
        views.push_back({loaded[c].rgb, loaded[c].depth, loaded[c].saliency, cam.intrinsics, cam.poses.at(frame)});
    }
    FuseOptions fuse;
    fuse.max_depth = config.max_depth;
    try {
        return fuse_views(views, fuse);
    } catch (const Error& e) {
        raise(e.code(), "frame " + std::to_string(frame) + ": " + e.what());
    }
}

std::uint64_t pair_seed(std::uint64_t seed, std::size_t observation) {
    // splitmix64 finalizer over seed + observation.
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(observation) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::vector<PairRecord> encode_episode_targets(const EpisodeManifest& manifest, const FeaturizeConfig& config) {
    const auto keyframes = extract_keyframes(manifest.episode, config.keyframes);
    std::vector<PairRecord> records;
    for (const auto& [obs, kf] : keyframe_pairs(manifest.episode, keyframes)) {
        PairRecord rec;
        rec.observation = obs;
        rec.keyframe = kf;
        rec.poses = frame_action_poses(manifest, kf);
        for (const auto& pose : rec.poses) {
            try {
                rec.targets.push_back(discretize_action(pose, manifest.bounds, manifest.dims, config.rotation_resolution_deg));
            } catch (const Error& e) {
                raise(e.code(), "keyframe " + std::to_string(kf) + ": " + e.what());
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<PairRecord> featurize_episode(const EpisodeManifest& manifest, const FeaturizeConfig& config,
                                          const std::filesystem::path& output_dir) {
    const auto keyframes = extract_keyframes(manifest.episode, config.keyframes);
    std::vector<PairRecord> records = encode_episode_targets(manifest, config);
    const int k = manifest.saliency.heads;

    parallel_for(records.size(), config.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            PairRecord& rec = records[r];
            FeaturedPointCloud cloud = frame_point_cloud(manifest, rec.observation, config);
            if (config.augment) {
                try {
                    PerturbationResult aug = se3_perturb(cloud, rec.poses, pair_seed(config.seed, rec.observation),
                                                         config.augmentation, manifest.bounds, manifest.dims,
                                                         config.rotation_resolution_deg);
                    cloud = std::move(aug.cloud);
                    rec.poses = std::move(aug.poses);
                    rec.targets = std::move(aug.targets);
                } catch (const Error& e) {
                    raise(e.code(), "observation " + std::to_string(rec.observation) + ": " + e.what());
                }
            }
            VoxelizeResult vox = voxelize(cloud, manifest.bounds, manifest.dims, k);
            rec.stats = vox.stats;
            rec.tensor_file = tensor_name(rec.observation);
            save_grid(output_dir / rec.tensor_file, vox.grid);
        }
    });

    write_text_atomic(output_dir / "targets.json", targets_json(records, keyframes, manifest, config));
    return records;
}

std::string targets_json(const std::vector<PairRecord>& pairs, const std::vector<std::size_t>& keyframes,
                         const EpisodeManifest& manifest, const FeaturizeConfig& config) {
    json doc;
    doc["version"] = 1;
    doc["keyframes"] = keyframes;
    doc["grid"] = {{"dims", {manifest.dims.nx, manifest.dims.ny, manifest.dims.nz}},
                   {"min", {manifest.bounds.min_corner.x(), manifest.bounds.min_corner.y(), manifest.bounds.min_corner.z()}},
                   {"max", {manifest.bounds.max_corner.x(), manifest.bounds.max_corner.y(), manifest.bounds.max_corner.z()}},
                   {"channels", 10 + manifest.saliency.heads}};
    doc["rotation_resolution_deg"] = config.rotation_resolution_deg;
    doc["rotation_bins"] = rotation_bin_count(config.rotation_resolution_deg);
    doc["augmented"] = config.augment;
    json list = json::array();
    for (const auto& p : pairs) {
        json rec = {{"observation", p.observation}, {"keyframe", p.keyframe}};
        if (!p.tensor_file.empty()) {
            rec["tensor"] = p.tensor_file;
            rec["points"] = p.stats.input_points;
            rec["dropped_points"] = p.stats.dropped_points;
            rec["occupied_voxels"] = p.stats.occupied_voxels;
        }
        json arms = json::array();
        for (std::size_t a = 0; a < p.targets.size(); ++a) arms.push_back(target_to_json(p.poses[a], p.targets[a]));
        rec["arms"] = arms;
        list.push_back(rec);
    }
    doc["pairs"] = list;
    return doc.dump(2) + "\n";
}

}  // namespace voxelfeat
