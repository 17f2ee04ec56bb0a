#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "test_support.hpp"
#include "voxelfeat/saliency.hpp"

using namespace voxelfeat;
using voxelfeat::testing::error_code_of;

namespace {

SaliencyMap random_map(int h, int w, int k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SaliencyMap m(h, w, k);
    for (double& v : m.data) v = u(rng);
    return m;
}

// Scalar align-corners reference: one output pixel at a time, source
// coordinate y * (h - 1) / (H - 1), plain bilinear weights.
double reference_sample(const SaliencyMap& src, int out_h, int out_w, int r, int c, int ch) {
    const double sy = out_h > 1 ? r * (src.height - 1.0) / (out_h - 1.0) : 0.0;
    const double sx = out_w > 1 ? c * (src.width - 1.0) / (out_w - 1.0) : 0.0;
    const int y0 = std::min(static_cast<int>(sy), src.height - 2);
    const int x0 = std::min(static_cast<int>(sx), src.width - 2);
    const double fy = sy - y0, fx = sx - x0;
    return (1 - fy) * (1 - fx) * src.at(y0, x0, ch) + (1 - fy) * fx * src.at(y0, x0 + 1, ch) +
           fy * (1 - fx) * src.at(y0 + 1, x0, ch) + fy * fx * src.at(y0 + 1, x0 + 1, ch);
}

}  // namespace

TEST(Upsample, ConstantMapStaysConstant) {
    const SaliencyMap m(5, 7, 1, 0.37);
    const SaliencyMap out = upsample_bilinear(m, 23, 31);
    for (double v : out.data) EXPECT_EQ(v, 0.37);
}

TEST(Upsample, TwoByTwoKeepsCornerColumns) {
    SaliencyMap m(2, 2, 1);
    m.at(0, 1) = 1.0;
    m.at(1, 1) = 1.0;
    const SaliencyMap out = upsample_bilinear(m, 4, 4);
    for (int r = 0; r < 4; ++r) {
        EXPECT_EQ(out.at(r, 0), 0.0);
        EXPECT_EQ(out.at(r, 3), 1.0);
    }
}

TEST(Upsample, MatchesScalarReferenceAtAttentionSizes) {
    const SaliencyMap src = random_map(74, 74, 1, 3);
    const SaliencyMap out = upsample_bilinear(src, 128, 128);
    double worst = 0.0;
    for (int r = 0; r < 128; ++r) {
        for (int c = 0; c < 128; ++c) worst = std::max(worst, std::abs(out.at(r, c) - reference_sample(src, 128, 128, r, c, 0)));
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(Upsample, CornersExactAndNoOvershootOnRandomShapes) {
    std::mt19937_64 rng(19);
    std::uniform_int_distribution<int> src_dim(2, 20), grow(0, 40), heads(1, 3);
    for (int trial = 0; trial < 40; ++trial) {
        const int h = src_dim(rng), w = src_dim(rng), k = heads(rng);
        const SaliencyMap src = random_map(h, w, k, 100 + trial);
        const int oh = h + grow(rng), ow = w + grow(rng);
        const SaliencyMap out = upsample_bilinear(src, oh, ow);
        for (int ch = 0; ch < k; ++ch) {
            EXPECT_EQ(out.at(0, 0, ch), src.at(0, 0, ch));
            EXPECT_EQ(out.at(0, ow - 1, ch), src.at(0, w - 1, ch));
            EXPECT_EQ(out.at(oh - 1, 0, ch), src.at(h - 1, 0, ch));
            EXPECT_EQ(out.at(oh - 1, ow - 1, ch), src.at(h - 1, w - 1, ch));
        }
        const auto [lo, hi] = std::minmax_element(src.data.begin(), src.data.end());
        for (double v : out.data) {
            EXPECT_GE(v, *lo);
            EXPECT_LE(v, *hi);
        }
    }
}

TEST(Upsample, SameSizeIsIdentity) {
    const SaliencyMap src = random_map(9, 6, 2, 4);
    EXPECT_EQ(upsample_bilinear(src, 9, 6).data, src.data);
}

TEST(Upsample, RejectsDegenerateSourceAndShrinking) {
    EXPECT_EQ(error_code_of([] { upsample_bilinear(SaliencyMap(1, 5, 1), 8, 8); }), ErrorCode::kDegenerateInput);
    EXPECT_EQ(error_code_of([] { upsample_bilinear(SaliencyMap(6, 6, 1), 5, 8); }), ErrorCode::kParameter);
}

TEST(Threshold, ClampHighExamples) {
    SaliencyMap m(1, 2, 1);
    m.data = {0.9, 0.3};
    const SaliencyMap out = threshold_attention(m, 0.6, ThresholdMode::kClampHigh);
    EXPECT_NEAR(out.data[0], 1.0, 1e-12);
    EXPECT_NEAR(out.data[1], 0.5, 1e-12);
}

TEST(Threshold, ZeroLowFollowsFormula) {
    const SaliencyMap m = random_map(8, 8, 1, 6);
    const SaliencyMap out = threshold_attention(m, 0.6, ThresholdMode::kZeroLow);
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        EXPECT_NEAR(out.data[i], std::max(m.data[i] - 0.6, 0.0) / 0.4, 1e-15);
    }
}

TEST(Threshold, TauOneIsIdentityInBothModes) {
    const SaliencyMap m = random_map(6, 5, 2, 7);
    EXPECT_EQ(threshold_attention(m, 1.0, ThresholdMode::kClampHigh).data, m.data);
    EXPECT_EQ(threshold_attention(m, 1.0, ThresholdMode::kZeroLow).data, m.data);
}

TEST(Threshold, OutputStaysInUnitInterval) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> tau(1e-3, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const SaliencyMap m = random_map(5, 5, 1, 200 + trial);
        const double t = tau(rng);
        for (auto mode : {ThresholdMode::kClampHigh, ThresholdMode::kZeroLow}) {
            for (double v : threshold_attention(m, t, mode).data) {
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
            }
        }
    }
}

TEST(Threshold, ClampHighOutputIsFixedUnderTauOne) {
    const SaliencyMap once = threshold_attention(random_map(6, 6, 1, 9), 0.6);
    const SaliencyMap twice = threshold_attention(once, 1.0);
    for (std::size_t i = 0; i < once.data.size(); ++i) EXPECT_NEAR(twice.data[i], once.data[i], 1e-9);
}

TEST(Threshold, RejectsBadTauAndValues) {
    const SaliencyMap m(2, 2, 1, 0.5);
    for (double tau : {0.0, -0.2, 1.5}) {
        EXPECT_EQ(error_code_of([&] { threshold_attention(m, tau); }), ErrorCode::kParameter) << tau;
    }
    SaliencyMap bad(2, 2, 1, 0.5);
    bad.data[3] = 1.2;
    EXPECT_EQ(error_code_of([&] { threshold_attention(bad, 0.6); }), ErrorCode::kParameter);
}

TEST(StackHeads, SingleHeadIsIdentity) {
    const SaliencyMap m = random_map(4, 3, 1, 10);
    const std::vector<SaliencyMap> maps = {m};
    EXPECT_EQ(stack_heads(maps, 1).data, m.data);
}

TEST(StackHeads, ChannelsKeepTheirOrder) {
    std::vector<SaliencyMap> maps;
    for (int i = 1; i <= 5; ++i) maps.emplace_back(3, 3, 1, 0.1 * i);
    const SaliencyMap stacked = stack_heads(maps, 5);
    ASSERT_EQ(stacked.channels, 5);
    for (int ch = 0; ch < 5; ++ch) EXPECT_EQ(stacked.at(2, 1, ch), 0.1 * (ch + 1));
}

TEST(StackHeads, SelectChannelRecoversEachInputBitwise) {
    std::vector<SaliencyMap> maps;
    for (int i = 0; i < 6; ++i) maps.push_back(random_map(7, 5, 1, 20 + i));
    const SaliencyMap stacked = stack_heads(maps, 6);
    for (int i = 0; i < 6; ++i) EXPECT_EQ(select_channel(stacked, i).data, maps[static_cast<std::size_t>(i)].data);
}

TEST(StackHeads, ZeroHeadsGivesNoChannels) {
    EXPECT_EQ(stack_heads(std::vector<SaliencyMap>{}, 0).channels, 0);
}

TEST(StackHeads, RejectsMismatchesAndTooManyHeads) {
    const std::vector<SaliencyMap> mixed = {SaliencyMap(3, 3, 1), SaliencyMap(3, 4, 1)};
    EXPECT_EQ(error_code_of([&] { stack_heads(mixed, 2); }), ErrorCode::kShape);
    const std::vector<SaliencyMap> seven(7, SaliencyMap(2, 2, 1));
    EXPECT_EQ(error_code_of([&] { stack_heads(seven, 7); }), ErrorCode::kParameter);
    const std::vector<SaliencyMap> two(2, SaliencyMap(2, 2, 1));
    EXPECT_EQ(error_code_of([&] { stack_heads(two, 3); }), ErrorCode::kShape);
}

TEST(ProcessAttention, FullChainStaysInUnitIntervalForBothOrders) {
    const SaliencyMap patches = random_map(74, 74, 6, 30);
    for (auto order : {ChainOrder::kUpsampleThenThreshold, ChainOrder::kThresholdThenUpsample}) {
        for (auto mode : {ThresholdMode::kClampHigh, ThresholdMode::kZeroLow}) {
            SaliencyConfig config{5, 0.6, mode, order};
            const SaliencyMap out = process_attention(patches, 128, 128, config);
            ASSERT_EQ(out.channels, 5);
            ASSERT_EQ(out.height, 128);
            for (double v : out.data) {
                ASSERT_GE(v, 0.0);
                ASSERT_LE(v, 1.0);
            }
        }
    }
}

TEST(ProcessAttention, DefaultOrderUpsamplesFirst) {
    const SaliencyMap patches = random_map(10, 10, 1, 31);
    const SaliencyMap out = process_attention(patches, 20, 20, SaliencyConfig{});
    const SaliencyMap expected = threshold_attention(upsample_bilinear(patches, 20, 20), 0.6);
    EXPECT_EQ(out.data, expected.data);
}

TEST(ProcessAttention, TooFewMapsInFileIsAShapeError) {
    const SaliencyMap patches = random_map(10, 10, 2, 32);
    SaliencyConfig config;
    config.heads = 3;
    EXPECT_EQ(error_code_of([&] { process_attention(patches, 20, 20, config); }), ErrorCode::kShape);
}

TEST(SaliencyParsing, ModeAndOrderNamesRoundTrip) {
    for (auto mode : {ThresholdMode::kClampHigh, ThresholdMode::kZeroLow}) {
        EXPECT_EQ(parse_threshold_mode(to_string(mode)), mode);
    }
    for (auto order : {ChainOrder::kUpsampleThenThreshold, ChainOrder::kThresholdThenUpsample}) {
        EXPECT_EQ(parse_chain_order(to_string(order)), order);
    }
    EXPECT_EQ(error_code_of([] { parse_threshold_mode("soft"); }), ErrorCode::kParameter);
}
