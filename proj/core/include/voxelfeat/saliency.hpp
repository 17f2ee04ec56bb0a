#pragma once

#include <span>
#include <string_view>

#include "voxelfeat/geometry.hpp"

namespace voxelfeat {

/// Per-pixel attention values in [0, 1], one channel per attention head.
using SaliencyMap = Image;

inline constexpr int kMaxAttentionHeads = 6;

enum class ThresholdMode {
    kClampHigh,  // min(v, tau) / tau: flattens high-intensity artifact spikes
    kZeroLow,    // max(v - tau, 0) / (1 - tau): classical soft threshold
};

enum class ChainOrder {
    kUpsampleThenThreshold,
    kThresholdThenUpsample,
};

ThresholdMode parse_threshold_mode(std::string_view text);
ChainOrder parse_chain_order(std::string_view text);
std::string_view to_string(ThresholdMode mode);
std::string_view to_string(ChainOrder order);

/// Align-corners bilinear resize of every channel. Output corners equal the
/// source corners exactly and no output value leaves the range spanned by
/// its four source neighbours.
/// Throws Error(kDegenerateInput) when the source is smaller than 2x2 and
/// Error(kParameter) when the target is smaller than the source.
SaliencyMap upsample_bilinear(const SaliencyMap& src, int target_height, int target_width);

/// Throws Error(kParameter) for tau outside (0, 1] or values outside [0, 1].
/// tau = 1 is the identity in both modes.
SaliencyMap threshold_attention(const SaliencyMap& map, double tau,
                                ThresholdMode mode = ThresholdMode::kClampHigh);

/// Stacks `count` single-channel maps into one map, preserving order.
/// count = 0 yields a map with no channels (the RGB-only configuration).
SaliencyMap stack_heads(std::span<const SaliencyMap> maps, int count);

/// Copies channel `channel` out as a single-channel map.
SaliencyMap select_channel(const SaliencyMap& map, int channel);

/// Throws Error(kParameter) unless every value lies in [0, 1].
void validate_saliency(const SaliencyMap& map);

struct SaliencyConfig {
    int heads = 1;
    double tau = 0.6;
    ThresholdMode mode = ThresholdMode::kClampHigh;
    ChainOrder order = ChainOrder::kUpsampleThenThreshold;
};

/// Full post-processing chain for patch-level attention maps: keep the first
/// `config.heads` channels, resize each to the image extent, threshold, and
/// stack.
SaliencyMap process_attention(const SaliencyMap& patch_maps, int image_height, int image_width,
                              const SaliencyConfig& config);

}  // namespace voxelfeat
