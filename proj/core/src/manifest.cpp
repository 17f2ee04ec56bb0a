#include "voxelfeat/manifest.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "voxelfeat/errors.hpp"
#include "voxelfeat/image_io.hpp"
#include "voxelfeat/targets.hpp"
#include "voxelfeat/tensor_file.hpp"

namespace voxelfeat {

using nlohmann::json;

namespace {

const json& field(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) raise(ErrorCode::kFormat, "missing field '" + where + key + "'");
    return obj.at(key);
}

template <typename T>
T get_as(const json& obj, const std::string& key, const std::string& where) {
    const json& v = field(obj, key, where);
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        raise(ErrorCode::kFormat, "field '" + where + key + "' has the wrong type");
    }
}

Eigen::Vector3d get_vec3(const json& obj, const std::string& key, const std::string& where) {
    const auto v = get_as<std::vector<double>>(obj, key, where);
    if (v.size() != 3) raise(ErrorCode::kFormat, "field '" + where + key + "' must hold 3 numbers");
    return {v[0], v[1], v[2]};
}

ArmState parse_arm(const json& j, const std::string& where) {
    ArmState arm;
    const auto joints = get_as<std::vector<double>>(j, "joints", where);
    if (joints.size() != 7) raise(ErrorCode::kFormat, "field '" + where + "joints' must hold 7 numbers");
    std::copy(joints.begin(), joints.end(), arm.joint_positions.begin());
    arm.ee_position = get_vec3(j, "ee_position", where);
    const auto q = get_as<std::vector<double>>(j, "ee_orientation", where);
    if (q.size() != 4) raise(ErrorCode::kFormat, "field '" + where + "ee_orientation' must be [w, x, y, z]");
    arm.ee_orientation = Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
    if (std::abs(arm.ee_orientation.norm() - 1.0) > 1e-6) {
        raise(ErrorCode::kFormat, "field '" + where + "ee_orientation' is not a unit quaternion");
    }
    arm.gripper_open = get_as<bool>(j, "gripper_open", where);
    arm.collision = j.contains("collision") ? get_as<bool>(j, "collision", where) : false;
    return arm;
}

json arm_to_json(const ArmState& arm) {
    const auto& q = arm.ee_orientation;
    return json{{"joints", std::vector<double>(arm.joint_positions.begin(), arm.joint_positions.end())},
                {"ee_position", {arm.ee_position.x(), arm.ee_position.y(), arm.ee_position.z()}},
                {"ee_orientation", {q.w(), q.x(), q.y(), q.z()}},
                {"gripper_open", arm.gripper_open},
                {"collision", arm.collision}};
}

std::vector<RigidTransform> load_pose_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::kMissingFile, "cannot open pose file " + path.string());
    std::vector<RigidTransform> poses;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<double> v;
        double x = 0.0;
        while (ls >> x) v.push_back(x);
        if (!ls.eof()) raise(ErrorCode::kFormat, path.string() + ":" + std::to_string(line_no) + ": not a number");
        if (v.empty()) continue;
        if (v.size() != 12) {
            raise(ErrorCode::kFormat, path.string() + ":" + std::to_string(line_no) + ": expected 12 numbers");
        }
        Eigen::Matrix3d r;
        r << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
        RigidTransform pose(r, Eigen::Vector3d(v[9], v[10], v[11]));
        if (!pose.is_rigid(1e-6)) {
            raise(ErrorCode::kInvalidTransform, path.string() + ":" + std::to_string(line_no) + ": rotation is not rigid");
        }
        poses.push_back(pose);
    }
    return poses;
}

void save_pose_file(const std::filesystem::path& path, const std::vector<RigidTransform>& poses) {
    std::ostringstream os;
    os << "# camera-to-world: r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz\n";
    os << std::setprecision(17);
    for (const auto& p : poses) {
        const auto& r = p.rotation();
        const auto& t = p.translation();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) os << r(i, j) << ' ';
        os << t.x() << ' ' << t.y() << ' ' << t.z() << '\n';
    }
    write_text_atomic(path, os.str());
}

void require_file(const std::filesystem::path& path, const std::string& what) {
    if (!std::filesystem::is_regular_file(path)) {
        raise(ErrorCode::kMissingFile, what + " '" + path.string() + "' does not exist");
    }
}

std::pair<int, int> saliency_header(const std::filesystem::path& path, int& channels) {
    std::ifstream in(path, std::ios::binary);
    std::uint8_t b[12];
    if (!in.read(reinterpret_cast<char*>(b), 12)) raise(ErrorCode::kFormat, "attention file " + path.string() + " is truncated");
    auto u32 = [&](int off) {
        return static_cast<int>(b[off] | (b[off + 1] << 8) | (b[off + 2] << 16) | (static_cast<std::uint32_t>(b[off + 3]) << 24));
    };
    channels = u32(8);
    return {u32(0), u32(4)};
}

}  // namespace

EpisodeManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::kMissingFile, "manifest '" + path.string() + "' not found");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        raise(ErrorCode::kFormat, "manifest is not valid JSON: " + std::string(e.what()));
    }

    EpisodeManifest m;
    m.base_dir = path.parent_path();
    m.version = get_as<int>(doc, "version", "");
    if (m.version != kManifestVersion) {
        raise(ErrorCode::kVersion, "manifest version " + std::to_string(m.version) + " is not supported (expected " +
                                       std::to_string(kManifestVersion) + ")");
    }

    const json& ws = field(doc, "workspace", "");
    m.bounds.min_corner = get_vec3(ws, "min", "workspace.");
    m.bounds.max_corner = get_vec3(ws, "max", "workspace.");
    const auto dims = get_as<std::vector<int>>(ws, "dims", "workspace.");
    if (dims.size() != 3) raise(ErrorCode::kFormat, "field 'workspace.dims' must hold 3 integers");
    m.dims = {dims[0], dims[1], dims[2]};
    m.bounds.validate();
    m.dims.validate();

    if (doc.contains("saliency")) {
        const json& s = doc.at("saliency");
        m.saliency.heads = get_as<int>(s, "heads", "saliency.");
        if (s.contains("tau")) m.saliency.tau = get_as<double>(s, "tau", "saliency.");
        if (s.contains("mode")) m.saliency.mode = parse_threshold_mode(get_as<std::string>(s, "mode", "saliency."));
        if (s.contains("order")) m.saliency.order = parse_chain_order(get_as<std::string>(s, "order", "saliency."));
        if (m.saliency.heads < 0 || m.saliency.heads > kMaxAttentionHeads) {
            raise(ErrorCode::kFormat, "field 'saliency.heads' must lie in [0, 6]");
        }
        if (!(m.saliency.tau > 0.0 && m.saliency.tau <= 1.0)) raise(ErrorCode::kFormat, "field 'saliency.tau' must lie in (0, 1]");
    }
    m.depth_scale = get_as<double>(doc, "depth_scale", "");
    if (!(m.depth_scale > 0.0)) raise(ErrorCode::kFormat, "field 'depth_scale' must be positive");
    const auto acting = doc.contains("acting_arm") ? get_as<std::string>(doc, "acting_arm", "") : std::string("left");
    if (acting != "left" && acting != "right") raise(ErrorCode::kFormat, "field 'acting_arm' must be 'left' or 'right'");
    m.acting_arm = acting == "left" ? kLeftArmId : kRightArmId;

    std::map<std::string, std::size_t> camera_index;
    const json& cams = field(doc, "cameras", "");
    if (!cams.is_array()) raise(ErrorCode::kFormat, "field 'cameras' must be a list");
    for (std::size_t c = 0; c < cams.size(); ++c) {
        const std::string where = "cameras[" + std::to_string(c) + "].";
        CameraTrack track;
        track.name = get_as<std::string>(cams[c], "name", where);
        const json& intr = field(cams[c], "intrinsics", where);
        const std::string iw = where + "intrinsics.";
        track.intrinsics = {get_as<double>(intr, "fx", iw), get_as<double>(intr, "fy", iw), get_as<double>(intr, "cx", iw),
                            get_as<double>(intr, "cy", iw), get_as<int>(intr, "width", iw), get_as<int>(intr, "height", iw)};
        try {
            track.intrinsics.validate();
        } catch (const Error& e) {
            raise(ErrorCode::kFormat, "field '" + where + "intrinsics': " + e.what());
        }
        const auto pose_path = m.resolve(get_as<std::string>(cams[c], "poses", where));
        require_file(pose_path, "pose file of camera '" + track.name + "'");
        track.poses = load_pose_file(pose_path);
        if (!camera_index.emplace(track.name, c).second) raise(ErrorCode::kFormat, "duplicate camera '" + track.name + "'");
        m.episode.cameras.push_back(std::move(track));
    }

    const json& frames = field(doc, "frames", "");
    if (!frames.is_array()) raise(ErrorCode::kFormat, "field 'frames' must be a list");
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const std::string where = "frames[" + std::to_string(t) + "].";
        const json& fj = frames[t];
        FrameObservation frame;
        frame.timestep = get_as<std::int64_t>(fj, "timestep", where);
        frame.left = parse_arm(field(fj, "left", where), where + "left.");
        frame.right = parse_arm(field(fj, "right", where), where + "right.");
        if (fj.contains("language")) {
            const json& lang = fj.at("language");
            frame.language_acting = lang.value("acting", "");
            frame.language_stabilizing = lang.value("stabilizing", "");
        }
        const json& views = field(fj, "views", where);
        if (!views.is_object()) raise(ErrorCode::kFormat, "field '" + where + "views' must map camera names to files");
        for (const auto& [name, vj] : views.items()) {
            if (!camera_index.contains(name)) raise(ErrorCode::kFormat, where + "views references unknown camera '" + name + "'");
            const std::string vw = where + "views." + name + ".";
            ViewRef ref{name, get_as<std::string>(vj, "rgb", vw), get_as<std::string>(vj, "depth", vw),
                        vj.contains("saliency") ? get_as<std::string>(vj, "saliency", vw) : std::string()};
            frame.views.push_back(std::move(ref));
        }
        m.episode.frames.push_back(std::move(frame));
    }

    if (m.episode.frames.size() < 2) {
        raise(ErrorCode::kDegenerateInput, "manifest holds " + std::to_string(m.episode.frames.size()) + " frames, need at least 2");
    }
    for (const auto& cam : m.episode.cameras) {
        if (cam.poses.size() != m.episode.frames.size()) {
            raise(ErrorCode::kDimensionMismatch, "pose file of camera '" + cam.name + "' holds " +
                                                     std::to_string(cam.poses.size()) + " poses for " +
                                                     std::to_string(m.episode.frames.size()) + " frames");
        }
    }
    m.episode.validate();

    // Every referenced file must exist and match the declared image size.
    for (std::size_t t = 0; t < m.episode.frames.size(); ++t) {
        for (const auto& view : m.episode.frames[t].views) {
            const CameraIntrinsics& intr = m.episode.cameras[camera_index.at(view.camera)].intrinsics;
            const std::string ctx = "frame " + std::to_string(t) + " camera '" + view.camera + "'";
            const auto rgb = m.resolve(view.rgb);
            const auto depth = m.resolve(view.depth);
            require_file(rgb, ctx + " rgb");
            require_file(depth, ctx + " depth");
            for (const auto& [file, kind] : {std::pair{rgb, "rgb"}, std::pair{depth, "depth"}}) {
                const auto [w, h] = png_extent(file);
                if (w != intr.width || h != intr.height) {
                    raise(ErrorCode::kDimensionMismatch, ctx + " " + kind + " is " + std::to_string(w) + "x" +
                                                             std::to_string(h) + ", camera declares " +
                                                             std::to_string(intr.width) + "x" + std::to_string(intr.height));
                }
            }
            if (m.saliency.heads > 0) {
                if (view.saliency.empty()) raise(ErrorCode::kMissingFile, ctx + " has no attention file but heads > 0");
                const auto sal = m.resolve(view.saliency);
                require_file(sal, ctx + " attention");
                int channels = 0;
                const auto [h, w] = saliency_header(sal, channels);
                if (h < 2 || w < 2 || h > intr.height || w > intr.width || channels < m.saliency.heads) {
                    raise(ErrorCode::kDimensionMismatch, ctx + " attention map is " + std::to_string(h) + "x" +
                                                             std::to_string(w) + "x" + std::to_string(channels) +
                                                             ", incompatible with the camera and head count");
                }
            }
        }
    }
    return m;
}

void save_manifest(const std::filesystem::path& path, const EpisodeManifest& m) {
    const auto dir = path.parent_path();
    json doc;
    doc["version"] = m.version;
    doc["workspace"] = {{"min", {m.bounds.min_corner.x(), m.bounds.min_corner.y(), m.bounds.min_corner.z()}},
                        {"max", {m.bounds.max_corner.x(), m.bounds.max_corner.y(), m.bounds.max_corner.z()}},
                        {"dims", {m.dims.nx, m.dims.ny, m.dims.nz}}};
    doc["saliency"] = {{"heads", m.saliency.heads},
                       {"tau", m.saliency.tau},
                       {"mode", std::string(to_string(m.saliency.mode))},
                       {"order", std::string(to_string(m.saliency.order))}};
    doc["depth_scale"] = m.depth_scale;
    doc["acting_arm"] = m.acting_arm == kLeftArmId ? "left" : "right";

    json cams = json::array();
    for (const auto& cam : m.episode.cameras) {
        const std::string pose_file = "poses_" + cam.name + ".txt";
        save_pose_file(dir / pose_file, cam.poses);
        const auto& in = cam.intrinsics;
        cams.push_back({{"name", cam.name},
                        {"intrinsics", {{"fx", in.fx}, {"fy", in.fy}, {"cx", in.cx}, {"cy", in.cy},
                                        {"width", in.width}, {"height", in.height}}},
                        {"poses", pose_file}});
    }
    doc["cameras"] = cams;

    json frames = json::array();
    for (const auto& f : m.episode.frames) {
        json views = json::object();
        for (const auto& v : f.views) {
            json vj = {{"rgb", v.rgb}, {"depth", v.depth}};
            if (!v.saliency.empty()) vj["saliency"] = v.saliency;
            views[v.camera] = vj;
        }
        frames.push_back({{"timestep", f.timestep},
                          {"left", arm_to_json(f.left)},
                          {"right", arm_to_json(f.right)},
                          {"language", {{"acting", f.language_acting}, {"stabilizing", f.language_stabilizing}}},
                          {"views", views}});
    }
    doc["frames"] = frames;
    write_text_atomic(path, doc.dump(2) + "\n");
}

}  // namespace voxelfeat
