#include "voxelfeat/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "voxelfeat/errors.hpp"

namespace voxelfeat {

void ArmState::validate() const {
    if (std::abs(ee_orientation.norm() - 1.0) > 1e-6) {
        raise(ErrorCode::kParameter, "end-effector quaternion is not unit norm");
    }
    if (!ee_position.allFinite()) raise(ErrorCode::kParameter, "end-effector position is not finite");
}

void DemonstrationEpisode::validate() const {
    if (frames.size() < 2) {
        raise(ErrorCode::kDegenerateInput, "an episode needs at least 2 frames, got " + std::to_string(frames.size()));
    }
    std::set<std::string> camera_names;
    for (const auto& cam : cameras) {
        if (!camera_names.insert(cam.name).second) raise(ErrorCode::kParameter, "duplicate camera '" + cam.name + "'");
        if (cam.poses.size() != frames.size()) {
            raise(ErrorCode::kParameter, "camera '" + cam.name + "' has " + std::to_string(cam.poses.size()) +
                                             " poses for " + std::to_string(frames.size()) + " frames");
        }
    }
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const auto& f = frames[t];
        if (t > 0 && f.timestep <= frames[t - 1].timestep) {
            raise(ErrorCode::kParameter, "timesteps must be strictly increasing (frame " + std::to_string(t) + ")");
        }
        f.left.validate();
        f.right.validate();
        std::set<std::string> seen;
        for (const auto& v : f.views) seen.insert(v.camera);
        if (seen != camera_names || seen.size() != f.views.size()) {
            raise(ErrorCode::kParameter, "frame " + std::to_string(t) + " does not reference the episode's camera set");
        }
    }
}

StationaryMode parse_stationary_mode(std::string_view text) {
    if (text == "both") return StationaryMode::kBoth;
    if (text == "either") return StationaryMode::kEither;
    raise(ErrorCode::kParameter, "unknown stationary mode '" + std::string(text) + "'");
}

std::string_view to_string(StationaryMode mode) { return mode == StationaryMode::kBoth ? "both" : "either"; }

void KeyframeOptions::validate() const {
    if (!(vel_eps > 0.0)) raise(ErrorCode::kParameter, "vel_eps must be positive");
    if (stationary_window < 1) raise(ErrorCode::kParameter, "stationary_window must be at least 1");
    if (!(dt > 0.0)) raise(ErrorCode::kParameter, "dt must be positive");
    if (angular_eps && !(*angular_eps > 0.0)) raise(ErrorCode::kParameter, "angular_eps must be positive");
}

std::vector<double> ee_speeds(const std::vector<ArmState>& track, double dt) {
    std::vector<double> speed(track.size(), 0.0);
    for (std::size_t t = 0; t < track.size(); ++t) {
        const std::size_t a = t == 0 ? 0 : t - 1;
        const std::size_t b = t == 0 ? std::min<std::size_t>(1, track.size() - 1) : t;
        speed[t] = (track[b].ee_position - track[a].ee_position).norm() / dt;
    }
    return speed;
}

std::vector<double> ee_angular_speeds(const std::vector<ArmState>& track, double dt) {
    std::vector<double> speed(track.size(), 0.0);
    for (std::size_t t = 0; t < track.size(); ++t) {
        const std::size_t a = t == 0 ? 0 : t - 1;
        const std::size_t b = t == 0 ? std::min<std::size_t>(1, track.size() - 1) : t;
        speed[t] = track[a].ee_orientation.angularDistance(track[b].ee_orientation) / dt;
    }
    return speed;
}

namespace {

std::vector<bool> arm_still(const std::vector<ArmState>& track, const KeyframeOptions& options) {
    const auto lin = ee_speeds(track, options.dt);
    std::vector<bool> still(track.size());
    std::vector<double> ang;
    if (options.angular_eps) ang = ee_angular_speeds(track, options.dt);
    for (std::size_t t = 0; t < track.size(); ++t) {
        still[t] = lin[t] < options.vel_eps && (!options.angular_eps || ang[t] < *options.angular_eps);
    }
    return still;
}

}  // namespace

KeyframeReport classify_keyframes(const DemonstrationEpisode& episode, const KeyframeOptions& options) {
    episode.validate();
    options.validate();
    const std::size_t n = episode.frames.size();

    std::vector<ArmState> left, right;
    left.reserve(n);
    right.reserve(n);
    for (const auto& f : episode.frames) {
        left.push_back(f.left);
        right.push_back(f.right);
    }
    const auto left_still = arm_still(left, options);
    const auto right_still = arm_still(right, options);

    KeyframeReport report;
    for (std::size_t t = 1; t < n; ++t) {
        if (left[t].gripper_open != left[t - 1].gripper_open || right[t].gripper_open != right[t - 1].gripper_open) {
            report.gripper_changes.push_back(t);
        }
    }

    const auto window = static_cast<std::size_t>(options.stationary_window);
    std::size_t run = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const bool still = options.mode == StationaryMode::kBoth ? (left_still[t] && right_still[t])
                                                                 : (left_still[t] || right_still[t]);
        run = still ? run + 1 : 0;
        if (run == window) report.motion_stops.push_back(t);
    }

    std::vector<std::size_t> all = report.gripper_changes;
    all.insert(all.end(), report.motion_stops.begin(), report.motion_stops.end());
    all.push_back(n - 1);
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    report.keyframes = std::move(all);
    return report;
}

std::vector<std::size_t> extract_keyframes(const DemonstrationEpisode& episode, const KeyframeOptions& options) {
    return classify_keyframes(episode, options).keyframes;
}

std::vector<std::pair<std::size_t, std::size_t>> keyframe_pairs(const DemonstrationEpisode& episode,
                                                                 const std::vector<std::size_t>& keyframes) {
    if (keyframes.empty()) raise(ErrorCode::kParameter, "keyframe list is empty");
    for (std::size_t i = 0; i < keyframes.size(); ++i) {
        if (keyframes[i] >= episode.frames.size()) raise(ErrorCode::kParameter, "keyframe index beyond the episode");
        if (i > 0 && keyframes[i] <= keyframes[i - 1]) raise(ErrorCode::kParameter, "keyframes must be strictly increasing");
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(keyframes.back());
    std::size_t next = 0;
    for (std::size_t t = 0; t < keyframes.back(); ++t) {
        while (keyframes[next] <= t) ++next;
        pairs.emplace_back(t, keyframes[next]);
    }
    return pairs;
}

}  // namespace voxelfeat
