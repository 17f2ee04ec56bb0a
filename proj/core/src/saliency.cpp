#include "voxelfeat/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "voxelfeat/errors.hpp"

namespace voxelfeat {

ThresholdMode parse_threshold_mode(std::string_view text) {
    if (text == "clamp-high") return ThresholdMode::kClampHigh;
    if (text == "zero-low") return ThresholdMode::kZeroLow;
    raise(ErrorCode::kParameter, "unknown threshold mode '" + std::string(text) + "'");
}

ChainOrder parse_chain_order(std::string_view text) {
    if (text == "upsample-threshold") return ChainOrder::kUpsampleThenThreshold;
    if (text == "threshold-upsample") return ChainOrder::kThresholdThenUpsample;
    raise(ErrorCode::kParameter, "unknown saliency chain order '" + std::string(text) + "'");
}

std::string_view to_string(ThresholdMode mode) {
    return mode == ThresholdMode::kClampHigh ? "clamp-high" : "zero-low";
}

std::string_view to_string(ChainOrder order) {
    return order == ChainOrder::kUpsampleThenThreshold ? "upsample-threshold" : "threshold-upsample";
}

namespace {

// a + f (b - a), kept inside [min(a, b), max(a, b)] despite rounding.
inline double lerp_bounded(double a, double b, double f) {
    const double v = a + f * (b - a);
    return std::clamp(v, std::min(a, b), std::max(a, b));
}

struct AxisSample {
    int lo;
    int hi;
    double frac;
};

std::vector<AxisSample> align_corners_axis(int src, int dst) {
    std::vector<AxisSample> samples(static_cast<std::size_t>(dst));
    for (int o = 0; o < dst; ++o) {
        // o * (src - 1) is an exact integer, so the last sample lands on src - 1 exactly.
        const double pos = dst == 1 ? 0.0
                                    : static_cast<double>(o) * (src - 1) / static_cast<double>(dst - 1);
        int lo = static_cast<int>(std::floor(pos));
        lo = std::clamp(lo, 0, src - 1);
        const int hi = std::min(lo + 1, src - 1);
        samples[static_cast<std::size_t>(o)] = {lo, hi, pos - lo};
    }
    return samples;
}

}  // namespace

SaliencyMap upsample_bilinear(const SaliencyMap& src, int target_height, int target_width) {
    if (src.height < 2 || src.width < 2) {
        raise(ErrorCode::kDegenerateInput, "bilinear upsampling needs a source of at least 2x2");
    }
    if (target_height < src.height || target_width < src.width) {
        raise(ErrorCode::kParameter, "upsampling target must not be smaller than the source");
    }
    const auto rows = align_corners_axis(src.height, target_height);
    const auto cols = align_corners_axis(src.width, target_width);

    SaliencyMap out(target_height, target_width, src.channels);
    for (int r = 0; r < target_height; ++r) {
        const AxisSample& sy = rows[static_cast<std::size_t>(r)];
        for (int c = 0; c < target_width; ++c) {
            const AxisSample& sx = cols[static_cast<std::size_t>(c)];
            for (int ch = 0; ch < src.channels; ++ch) {
                const double top = lerp_bounded(src.at(sy.lo, sx.lo, ch), src.at(sy.lo, sx.hi, ch), sx.frac);
                const double bottom = lerp_bounded(src.at(sy.hi, sx.lo, ch), src.at(sy.hi, sx.hi, ch), sx.frac);
                out.at(r, c, ch) = lerp_bounded(top, bottom, sy.frac);
            }
        }
    }
    return out;
}

void validate_saliency(const SaliencyMap& map) {
    for (double v : map.data) {
        if (!(v >= 0.0 && v <= 1.0)) {
            raise(ErrorCode::kParameter, "saliency value " + std::to_string(v) + " outside [0, 1]");
        }
    }
}

SaliencyMap threshold_attention(const SaliencyMap& map, double tau, ThresholdMode mode) {
    if (!(tau > 0.0 && tau <= 1.0)) {
        raise(ErrorCode::kParameter, "threshold must lie in (0, 1], got " + std::to_string(tau));
    }
    validate_saliency(map);
    SaliencyMap out = map;
    if (tau == 1.0) return out;
    if (mode == ThresholdMode::kClampHigh) {
        for (double& v : out.data) v = std::min(v, tau) / tau;
    } else {
        const double span = 1.0 - tau;
        for (double& v : out.data) v = std::max(v - tau, 0.0) / span;
    }
    return out;
}

SaliencyMap stack_heads(std::span<const SaliencyMap> maps, int count) {
    if (count < 0 || count > kMaxAttentionHeads) {
        raise(ErrorCode::kParameter, "attention head count must lie in [0, 6]");
    }
    if (maps.size() != static_cast<std::size_t>(count)) {
        raise(ErrorCode::kShape, "expected " + std::to_string(count) + " attention maps, got " +
                                     std::to_string(maps.size()));
    }
    if (count == 0) return SaliencyMap(0, 0, 0);

    const int h = maps.front().height;
    const int w = maps.front().width;
    for (const auto& m : maps) {
        if (m.channels != 1) raise(ErrorCode::kShape, "stack_heads expects single-channel maps");
        if (m.height != h || m.width != w) raise(ErrorCode::kShape, "attention maps differ in size");
    }
    SaliencyMap out(h, w, count);
    const std::size_t n = out.pixel_count();
    const auto k = static_cast<std::size_t>(count);
    for (std::size_t ch = 0; ch < k; ++ch) {
        const auto& src = maps[ch].data;
        for (std::size_t p = 0; p < n; ++p) out.data[p * k + ch] = src[p];
    }
    return out;
}

SaliencyMap select_channel(const SaliencyMap& map, int channel) {
    if (channel < 0 || channel >= map.channels) {
        raise(ErrorCode::kParameter, "channel index out of range");
    }
    SaliencyMap out(map.height, map.width, 1);
    const std::size_t n = map.pixel_count();
    const auto k = static_cast<std::size_t>(map.channels);
    for (std::size_t p = 0; p < n; ++p) out.data[p] = map.data[p * k + static_cast<std::size_t>(channel)];
    return out;
}

SaliencyMap process_attention(const SaliencyMap& patch_maps, int image_height, int image_width,
                              const SaliencyConfig& config) {
    if (config.heads < 0 || config.heads > kMaxAttentionHeads) {
        raise(ErrorCode::kParameter, "attention head count must lie in [0, 6]");
    }
    if (config.heads == 0) return SaliencyMap(image_height, image_width, 0);
    if (patch_maps.channels < config.heads) {
        raise(ErrorCode::kShape, "attention file holds " + std::to_string(patch_maps.channels) +
                                     " maps but " + std::to_string(config.heads) + " are configured");
    }

    std::vector<SaliencyMap> heads;
    heads.reserve(static_cast<std::size_t>(config.heads));
    for (int h = 0; h < config.heads; ++h) {
        SaliencyMap head = select_channel(patch_maps, h);
        if (config.order == ChainOrder::kUpsampleThenThreshold) {
            head = threshold_attention(upsample_bilinear(head, image_height, image_width), config.tau, config.mode);
        } else {
            head = upsample_bilinear(threshold_attention(head, config.tau, config.mode), image_height, image_width);
        }
        heads.push_back(std::move(head));
    }
    return stack_heads(heads, config.heads);
}

}  // namespace voxelfeat
